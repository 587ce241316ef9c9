//! Adjoint-based baselines and ground-truth oracles.
//!
//! Everything here is test/benchmark machinery: the power-iteration baseline
//! needs a backward map, and the dense spectrum materializes the operator
//! column by column — both things the solver itself is forbidden to do.

use crate::error::{Error, Result};
use crate::linop::{AdjointPair, LinearOperator};
use crate::matrix::DenseMatrix;
use crate::sampling::{dot, norm, uniform_unit_vector, RngStream};

/// Input-dimension cap for materialization; keeps the O(m·d) memory confined
/// to desk-scale oracles.
pub const MATERIALIZE_CAP: usize = 4096;

/// Builds the full matrix of `op` by evaluating `A e_i` for every `i`.
pub fn materialize(op: &dyn LinearOperator) -> Result<DenseMatrix> {
    materialize_with_cap(op, MATERIALIZE_CAP)
}

pub fn materialize_with_cap(op: &dyn LinearOperator, cap: usize) -> Result<DenseMatrix> {
    let (d, m) = (op.input_dim(), op.output_dim());
    if d > cap {
        return Err(Error::MaterializeCapExceeded { dim: d, cap });
    }
    let mut e = vec![0.0; d];
    let mut col = vec![0.0; m];
    let mut out = DenseMatrix::zeros(m, d);
    for j in 0..d {
        e[j] = 1.0;
        op.apply_into(&e, &mut col);
        e[j] = 0.0;
        for (i, &c) in col.iter().enumerate() {
            out[(i, j)] = c;
        }
    }
    Ok(out)
}

/// Singular values (nonincreasing) and right singular vectors of a
/// materialized matrix.
#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    pub singular_values: Vec<f64>,
    /// Orthonormal eigenvectors of `AᵀA`, one per singular value.
    pub right_vectors: Vec<Vec<f64>>,
}

impl DenseSpectrum {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values[0]
    }

    pub fn sigma_min(&self) -> f64 {
        *self.singular_values.last().unwrap()
    }
}

const JACOBI_MAX_SWEEPS: usize = 64;

/// Dense ground-truth spectrum: cyclic Jacobi sweeps on the Gram matrix
/// `AᵀA` until the off-diagonal Frobenius norm drops below `1e-12` relative
/// to the Gram norm.
pub fn dense_spectrum(matrix: &DenseMatrix) -> Result<DenseSpectrum> {
    let d = matrix.cols();
    let mut g = matrix.gram();
    let mut v = DenseMatrix::identity(d);

    let gram_norm = frobenius(&g).max(f64::MIN_POSITIVE);
    let tol = 1e-12 * gram_norm;

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&g) <= tol {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                jacobi_rotate(&mut g, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&g) > tol {
        return Err(Error::JacobiNoConvergence { sweeps: JACOBI_MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| g[(j, j)].partial_cmp(&g[(i, i)]).unwrap());
    let singular_values = order.iter().map(|&i| g[(i, i)].max(0.0).sqrt()).collect();
    let right_vectors = order
        .iter()
        .map(|&j| (0..d).map(|i| v[(i, j)]).collect())
        .collect();
    Ok(DenseSpectrum { singular_values, right_vectors })
}

fn frobenius(g: &DenseMatrix) -> f64 {
    g.data().iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn off_diagonal_norm(g: &DenseMatrix) -> f64 {
    let d = g.cols();
    let mut acc = 0.0;
    for i in 0..d {
        for j in (i + 1)..d {
            acc += 2.0 * g[(i, j)] * g[(i, j)];
        }
    }
    acc.sqrt()
}

/// One symmetric Jacobi rotation annihilating `g[p][q]`.
fn jacobi_rotate(g: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize) {
    let gpq = g[(p, q)];
    if gpq == 0.0 {
        return;
    }
    let theta = (g[(q, q)] - g[(p, p)]) / (2.0 * gpq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let d = g.cols();
    for i in 0..d {
        let gip = g[(i, p)];
        let giq = g[(i, q)];
        g[(i, p)] = c * gip - s * giq;
        g[(i, q)] = s * gip + c * giq;
    }
    for j in 0..d {
        let gpj = g[(p, j)];
        let gqj = g[(q, j)];
        g[(p, j)] = c * gpj - s * gqj;
        g[(q, j)] = s * gpj + c * gqj;
    }
    for i in 0..d {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = c * vip - s * viq;
        v[(i, q)] = s * vip + c * viq;
    }
}

/// Trace and final values of the classical `v ← B(Av)` iteration.
#[derive(Debug, Clone)]
pub struct PowerIterationReport {
    /// Final `‖Av‖` (the forward-only estimator).
    pub estimate_via_av: f64,
    /// Final `√‖B(Av)‖` (the Gram estimator; equals the other one only for a
    /// true adjoint pair).
    pub estimate_via_gram: f64,
    pub iterations: usize,
    pub trace_via_av: Vec<f64>,
    pub trace_via_gram: Vec<f64>,
}

impl PowerIterationReport {
    /// Relative disagreement of the two estimators; large values flag an
    /// adjoint mismatch.
    pub fn estimator_gap(&self) -> f64 {
        let scale = self.estimate_via_av.abs().max(self.estimate_via_gram.abs()).max(1e-300);
        (self.estimate_via_av - self.estimate_via_gram).abs() / scale
    }
}

const POWER_RESTART_BUDGET: usize = 100;

/// Power iteration on `B∘A`. Stops when the `‖Av‖` estimate is `tol`-stable
/// between iterations or the budget runs out.
pub fn power_iteration(
    pair: &AdjointPair,
    iters: usize,
    tol: f64,
    rng: &mut RngStream,
) -> Result<PowerIterationReport> {
    let d = pair.forward.input_dim();
    let m = pair.forward.output_dim();
    if iters == 0 {
        return Err(Error::InvalidInput("power iteration needs at least one iteration".into()));
    }
    let mut v = uniform_unit_vector(rng, d);
    let mut av = vec![0.0; m];
    let mut w = vec![0.0; d];
    let mut trace_av = Vec::new();
    let mut trace_gram = Vec::new();
    let mut restarts = 0usize;
    let mut prev: Option<f64> = None;
    let mut iterations = 0;
    while iterations < iters {
        pair.forward.apply_into(&v, &mut av);
        pair.backward.apply_into(&av, &mut w);
        let est_av = norm(&av);
        let wn = norm(&w);
        let est_gram = wn.sqrt();
        let iterate_scale = est_av.max(est_gram).max(1.0);
        if wn <= 1e-300 * iterate_scale {
            restarts += 1;
            if restarts > POWER_RESTART_BUDGET {
                return Err(Error::RetryBudgetExhausted);
            }
            v = uniform_unit_vector(rng, d);
            continue;
        }
        iterations += 1;
        trace_av.push(est_av);
        trace_gram.push(est_gram);
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
        if let Some(p) = prev {
            if (est_av - p).abs() <= tol * est_av.abs().max(1.0) {
                break;
            }
        }
        prev = Some(est_av);
    }
    Ok(PowerIterationReport {
        estimate_via_av: *trace_av.last().unwrap(),
        estimate_via_gram: *trace_gram.last().unwrap(),
        iterations,
        trace_via_av: trace_av,
        trace_via_gram: trace_gram,
    })
}

/// Random orthogonal matrix: Gram-Schmidt on a Gaussian matrix with redraws
/// on near-dependence.
pub fn random_orthogonal(rng: &mut RngStream, d: usize) -> DenseMatrix {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut c = rng.gaussian_vector(d);
        let raw_norm = norm(&c);
        for prev in &cols {
            let proj = dot(&c, prev);
            for (ci, pi) in c.iter_mut().zip(prev) {
                *ci -= proj * pi;
            }
        }
        let n = norm(&c);
        if n <= 1e-10 * raw_norm.max(1.0) {
            continue;
        }
        for ci in c.iter_mut() {
            *ci /= n;
        }
        // second orthogonalization pass for d-digit orthogonality
        for prev in &cols {
            let proj = dot(&c, prev);
            for (ci, pi) in c.iter_mut().zip(prev) {
                *ci -= proj * pi;
            }
        }
        let n = norm(&c);
        for ci in c.iter_mut() {
            *ci /= n;
        }
        cols.push(c);
    }
    let mut q = DenseMatrix::zeros(d, d);
    for (j, c) in cols.iter().enumerate() {
        for (i, &x) in c.iter().enumerate() {
            q[(i, j)] = x;
        }
    }
    q
}

/// Largest normalized adjointness defect `|<Av,w> - <v,Bw>|` over random
/// probe pairs.
pub fn adjointness_gap(pair: &AdjointPair, probes: usize, rng: &mut RngStream) -> Result<f64> {
    if probes < 1 {
        return Err(Error::InvalidInput("need at least one probe".into()));
    }
    let d = pair.forward.input_dim();
    let m = pair.forward.output_dim();
    let mut av = vec![0.0; m];
    let mut bw = vec![0.0; d];
    let mut worst: f64 = 0.0;
    for _ in 0..probes {
        let v = uniform_unit_vector(rng, d);
        let w = uniform_unit_vector(rng, m);
        pair.forward.apply_into(&v, &mut av);
        pair.backward.apply_into(&w, &mut bw);
        let lhs = dot(&av, &w);
        let rhs = dot(&v, &bw);
        let scale = norm(&av) * norm(&w) + norm(&v) * norm(&bw);
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).abs() / scale);
        }
    }
    Ok(worst)
}
