//! Random-search maximization of the Rayleigh quotient with exact line search.
//!
//! Each iteration samples a unit direction orthogonal to the current iterate,
//! spends exactly one operator evaluation on it and moves by the closed-form
//! optimal stepsize. The image cache is updated incrementally, so the live
//! vector storage stays at two input-size and two output-size vectors.

use std::io::Write;

use crate::error::{Error, Result};
use crate::linop::{check_input, LinearOperator};
use crate::sampling::{dot, norm, tangent_direction_into, uniform_unit_vector, DirectionSample, RngStream};

/// Which end of the spectrum the line search targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Max,
    Min,
}

#[derive(Debug, Clone)]
pub enum Init {
    /// Uniform on the unit sphere.
    Uniform,
    /// Normalized all-ones vector.
    Ones,
    /// A caller-supplied start vector (normalized before use).
    Given(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ToleranceMet,
    BudgetExhausted,
    OrthogonalDetected,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ToleranceMet => "tolerance-met",
            Self::BudgetExhausted => "budget-exhausted",
            Self::OrthogonalDetected => "orthogonal-detected",
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Iteration budget; `None` means `50 * input_dim`.
    pub max_iters: Option<usize>,
    /// Stopping tolerance ε for the resampled stopping rule.
    pub eps: f64,
    /// Resample count M of the stopping rule.
    pub resamples: usize,
    pub init: Init,
    /// Cache refresh period R: every R accepted steps the image cache is
    /// recomputed by a fresh operator evaluation.
    pub refresh_period: usize,
    pub mode: Mode,
    /// Relative threshold below which `a_k` counts as zero
    /// (scaled by ‖Av‖·‖Ax‖).
    pub a_zero_tol: f64,
    /// Consecutive degenerate directions before the orthogonality check runs.
    pub degeneracy_probes: usize,
    /// Whether to keep per-step diagnostics in the report.
    pub record_trace: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            max_iters: None,
            eps: 1e-6,
            resamples: 10,
            init: Init::Uniform,
            refresh_period: 100,
            mode: Mode::Max,
            a_zero_tol: 1e-14,
            degeneracy_probes: 10,
            record_trace: true,
        }
    }
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::InvalidInput("eps must be positive".into()));
        }
        if self.resamples < 1 {
            return Err(Error::InvalidInput("resamples must be at least 1".into()));
        }
        if self.refresh_period < 1 {
            return Err(Error::InvalidInput("refresh period must be at least 1".into()));
        }
        if self.max_iters == Some(0) {
            return Err(Error::InvalidInput("iteration budget must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-iteration scalars.
#[derive(Debug, Clone, Copy)]
pub struct StepDiagnostics {
    /// Iteration index (counts every consumed slot, degenerate ones included).
    pub k: usize,
    /// `a_k = <Av, Ax>`.
    pub a: f64,
    /// `b_k = ‖Ax‖² - ‖Av‖²`.
    pub b: f64,
    /// Stepsize; zero for degenerate directions.
    pub tau: f64,
    /// `‖Av‖²` after this iteration.
    pub objective: f64,
}

/// Current iterate plus its cached image.
pub struct SearchState {
    /// Unit iterate.
    pub v: Vec<f64>,
    /// Cached image `Av`.
    pub av: Vec<f64>,
    /// Accepted-step counter.
    pub k: usize,
    /// Operator evaluations so far.
    pub oracle_calls: usize,
    ax: Vec<f64>,
}

impl SearchState {
    /// Normalizes `v0` and spends one oracle call on the initial image.
    pub fn new(op: &dyn LinearOperator, v0: &[f64]) -> Result<Self> {
        check_input(op, v0)?;
        let n = norm(v0);
        if n == 0.0 {
            return Err(Error::InvalidInput("start vector is zero".into()));
        }
        let v: Vec<f64> = v0.iter().map(|x| x / n).collect();
        let mut av = vec![0.0; op.output_dim()];
        op.apply_into(&v, &mut av);
        Ok(Self { v, av, k: 0, oracle_calls: 1, ax: vec![0.0; op.output_dim()] })
    }

    pub fn objective(&self) -> f64 {
        dot(&self.av, &self.av)
    }

    /// Recomputes the cached image from a fresh oracle call.
    pub fn refresh(&mut self, op: &dyn LinearOperator) {
        op.apply_into(&self.v, &mut self.av);
        self.oracle_calls += 1;
    }
}

/// The per-direction scalars `a = <Av,Ax>` and `b = ‖Ax‖² - ‖Av‖²`.
pub fn coefficients(av: &[f64], ax: &[f64]) -> (f64, f64) {
    let a = dot(av, ax);
    let b = dot(ax, ax) - dot(av, av);
    (a, b)
}

/// Closed-form exact line search: the stepsize extremizing
/// `‖Av + τAx‖² / (1 + τ²)`. Returns `None` when `a == 0` (the caller treats
/// small `a` as a degenerate direction before calling this).
pub fn optimal_stepsize(a: f64, b: f64, mode: Mode) -> Option<f64> {
    if a == 0.0 {
        return None;
    }
    let t = b / (2.0 * a.abs());
    // magnitude of the maximizing root t + sqrt(t^2 + 1), cancellation-free
    let mag = if t >= 1e8 {
        2.0 * t
    } else if t <= -1e8 {
        1.0 / (2.0 * (-t))
    } else if t >= 0.0 {
        t + (t * t + 1.0).sqrt()
    } else {
        1.0 / ((t * t + 1.0).sqrt() - t)
    };
    let tau_max = a.signum() * mag;
    match mode {
        Mode::Max => Some(tau_max),
        // the two roots of a + bτ - aτ² have product -1
        Mode::Min => Some(-1.0 / tau_max),
    }
}

/// Outcome of a single iteration.
#[derive(Debug, Clone, Copy)]
pub enum StepOutcome {
    Advanced(StepDiagnostics),
    /// `|a|` fell below the degeneracy threshold; the state is unchanged.
    Degenerate { a: f64, b: f64 },
}

/// One iteration against an already-sampled direction. Spends exactly one
/// oracle call; on success the iterate, cached image and counter advance.
pub fn step(
    op: &dyn LinearOperator,
    state: &mut SearchState,
    dir: &DirectionSample,
    mode: Mode,
    a_zero_tol: f64,
) -> Result<StepOutcome> {
    if dir.x.len() != state.v.len() {
        return Err(Error::DimensionMismatch { expected: state.v.len(), got: dir.x.len() });
    }
    Ok(step_core(op, state, &dir.x, mode, a_zero_tol))
}

fn step_core(
    op: &dyn LinearOperator,
    state: &mut SearchState,
    x: &[f64],
    mode: Mode,
    a_zero_tol: f64,
) -> StepOutcome {
    let st = &mut *state;
    op.apply_into(x, &mut st.ax);
    st.oracle_calls += 1;
    let (a, b) = coefficients(&st.av, &st.ax);
    let obj = dot(&st.av, &st.av);
    let ax_sq = obj + b;
    let scale = (obj * ax_sq).max(0.0).sqrt();
    if a.abs() <= a_zero_tol * scale {
        return StepOutcome::Degenerate { a, b };
    }
    let tau = optimal_stepsize(a, b, mode).expect("a is nonzero here");

    // v ← (v + τx)/√(1+τ²), with the reciprocal form for large |τ| to avoid
    // overflow; the image cache gets the same combination.
    if tau.abs() <= 1.0 {
        let denom = (1.0 + tau * tau).sqrt();
        for (vi, xi) in st.v.iter_mut().zip(x) {
            *vi = (*vi + tau * xi) / denom;
        }
        for (avi, axi) in st.av.iter_mut().zip(&st.ax) {
            *avi = (*avi + tau * axi) / denom;
        }
    } else {
        let s = tau.signum();
        let denom = (1.0 / (tau * tau) + 1.0).sqrt();
        for (vi, xi) in st.v.iter_mut().zip(x) {
            *vi = s * (*vi / tau + xi) / denom;
        }
        for (avi, axi) in st.av.iter_mut().zip(&st.ax) {
            *avi = s * (*avi / tau + axi) / denom;
        }
    }
    let nv = norm(&st.v);
    for vi in st.v.iter_mut() {
        *vi /= nv;
    }
    for avi in st.av.iter_mut() {
        *avi /= nv;
    }
    st.k += 1;
    StepOutcome::Advanced(StepDiagnostics { k: st.k, a, b, tau, objective: dot(&st.av, &st.av) })
}

/// Result of a run.
#[derive(Debug, Clone)]
pub struct EstimateReport {
    /// `‖Av‖` at the final iterate.
    pub norm_estimate: f64,
    /// The final iterate, an approximate right singular vector.
    pub singular_vector: Vec<f64>,
    pub trace: Vec<StepDiagnostics>,
    pub termination: Termination,
    pub running_min_a_sq: f64,
    pub oracle_calls: usize,
}

/// Estimates the extreme singular value of `op` per the configured mode.
pub fn run(op: &dyn LinearOperator, cfg: &RunConfig, rng: &mut RngStream) -> Result<EstimateReport> {
    run_with_basis(op, cfg, rng, &[])
}

/// Same as [`run`] with the smallest-singular-value stepsize.
pub fn run_min_mode(
    op: &dyn LinearOperator,
    cfg: &RunConfig,
    rng: &mut RngStream,
) -> Result<EstimateReport> {
    let cfg = RunConfig { mode: Mode::Min, ..cfg.clone() };
    run_with_basis(op, &cfg, rng, &[])
}

// Relative agreement required between probe image norms before a degeneracy
// streak is declared an A*A = cI detection.
const ORTHO_CONFIRM_TOL: f64 = 1e-8;

fn init_vector(
    cfg: &RunConfig,
    d: usize,
    frozen: &[Vec<f64>],
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let raw = match &cfg.init {
        Init::Uniform => uniform_unit_vector(rng, d),
        Init::Ones => vec![1.0; d],
        Init::Given(v) => {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: v.len() });
            }
            v.clone()
        }
    };
    let mut v = raw;
    for attempt in 0..crate::sampling::DEFAULT_RETRIES {
        let before = norm(&v);
        for f in frozen {
            let c = dot(&v, f);
            for (vi, fi) in v.iter_mut().zip(f) {
                *vi -= c * fi;
            }
        }
        let after = norm(&v);
        if after > 1e-12 * before.max(1.0) {
            for vi in v.iter_mut() {
                *vi /= after;
            }
            return Ok(v);
        }
        if matches!(cfg.init, Init::Given(_)) && attempt == 0 {
            return Err(Error::InvalidInput(
                "start vector lies in the deflated subspace".into(),
            ));
        }
        v = uniform_unit_vector(rng, d);
    }
    Err(Error::RetryBudgetExhausted)
}

pub(crate) fn run_with_basis(
    op: &dyn LinearOperator,
    cfg: &RunConfig,
    rng: &mut RngStream,
    frozen: &[Vec<f64>],
) -> Result<EstimateReport> {
    cfg.validate()?;
    let d = op.input_dim();
    let m = op.output_dim();
    if d == 0 || m == 0 {
        return Err(Error::InvalidInput("operator dimensions must be positive".into()));
    }
    let free_dims = d - frozen.len();

    // One free direction left (d = 1, or a fully deflated search space): the
    // iterate is determined up to sign and the norm is a single evaluation.
    if free_dims == 1 {
        let v = init_vector(cfg, d, frozen, rng)?;
        let state = SearchState::new(op, &v)?;
        return Ok(EstimateReport {
            norm_estimate: state.objective().sqrt(),
            singular_vector: state.v,
            trace: Vec::new(),
            termination: Termination::ToleranceMet,
            running_min_a_sq: f64::INFINITY,
            oracle_calls: state.oracle_calls,
        });
    }

    let max_iters = cfg.max_iters.unwrap_or(50 * d);
    let tangent_dims = (free_dims - 1) as f64;
    let eps_sq = cfg.eps * cfg.eps;

    let v0 = init_vector(cfg, d, frozen, rng)?;
    let mut state = SearchState::new(op, &v0)?;
    let mut x = vec![0.0; d];
    let mut trace = Vec::new();
    let mut min_a_sq = f64::INFINITY;
    let mut streak = 0usize;
    // |b| of the most recent consecutive degenerate probes
    let mut streak_b: Vec<f64> = Vec::with_capacity(cfg.degeneracy_probes);

    let mut termination = Termination::BudgetExhausted;
    let mut slot = 0usize;
    while slot < max_iters {
        tangent_direction_into(rng, &state.v, frozen, &mut x, None)?;
        let outcome = step_core(op, &mut state, &x, cfg.mode, cfg.a_zero_tol);
        slot += 1;
        match outcome {
            StepOutcome::Advanced(diag) => {
                streak = 0;
                streak_b.clear();
                min_a_sq = min_a_sq.min(diag.a * diag.a);
                if cfg.record_trace {
                    trace.push(StepDiagnostics { k: slot, ..diag });
                }
                if state.k % cfg.refresh_period == 0 {
                    state.refresh(op);
                }
                if tangent_dims * diag.a * diag.a <= eps_sq
                    && stop_check_inner(op, &mut state, cfg, rng, frozen, &mut x)?
                {
                    termination = Termination::ToleranceMet;
                    break;
                }
            }
            StepOutcome::Degenerate { a, b } => {
                min_a_sq = min_a_sq.min(a * a);
                if cfg.record_trace {
                    trace.push(StepDiagnostics {
                        k: slot,
                        a,
                        b,
                        tau: 0.0,
                        objective: state.objective(),
                    });
                }
                streak += 1;
                streak_b.push(b);
                if streak >= cfg.degeneracy_probes {
                    let obj = state.objective();
                    let confirmed = streak_b
                        .iter()
                        .all(|bb| bb.abs() <= ORTHO_CONFIRM_TOL * obj.max(obj + bb));
                    if confirmed {
                        termination = Termination::OrthogonalDetected;
                        break;
                    }
                    if stop_check_inner(op, &mut state, cfg, rng, frozen, &mut x)? {
                        termination = Termination::ToleranceMet;
                        break;
                    }
                    streak = 0;
                    streak_b.clear();
                }
            }
        }
    }

    Ok(EstimateReport {
        norm_estimate: state.objective().sqrt(),
        singular_vector: state.v,
        trace,
        termination,
        running_min_a_sq: min_a_sq,
        oracle_calls: state.oracle_calls,
    })
}

/// Resampled stopping rule: draws M fresh tangent directions and accepts when
/// `(d-1)·mean(a²) ≤ ε²`, an unbiased estimate of the residual
/// `‖(I - vv*)A*Av‖²` of the singular-vector equation.
pub fn stop_check(
    op: &dyn LinearOperator,
    state: &mut SearchState,
    cfg: &RunConfig,
    rng: &mut RngStream,
) -> Result<bool> {
    let mut x = vec![0.0; state.v.len()];
    stop_check_inner(op, state, cfg, rng, &[], &mut x)
}

fn stop_check_inner(
    op: &dyn LinearOperator,
    state: &mut SearchState,
    cfg: &RunConfig,
    rng: &mut RngStream,
    frozen: &[Vec<f64>],
    x: &mut [f64],
) -> Result<bool> {
    let tangent_dims = (state.v.len() - 1 - frozen.len()) as f64;
    let mut mean_a_sq = 0.0;
    for _ in 0..cfg.resamples {
        tangent_direction_into(rng, &state.v, frozen, x, None)?;
        op.apply_into(x, &mut state.ax);
        state.oracle_calls += 1;
        let a = dot(&state.av, &state.ax);
        mean_a_sq += a * a;
    }
    mean_a_sq /= cfg.resamples as f64;
    Ok(tangent_dims * mean_a_sq <= cfg.eps * cfg.eps)
}

/// Verdict of the orthogonal-columns probe.
#[derive(Debug, Clone)]
pub struct OrthogonalityVerdict {
    pub detected: bool,
    /// The constant in `A*A = cI` when detected; `‖Av⁰‖²` either way.
    pub c_estimate: f64,
    pub probes_used: usize,
}

/// Probes whether `A*A = cI`: at a random start every tangent direction must
/// give `a ≈ 0` and an image norm matching `‖Av⁰‖`.
pub fn detect_orthogonal(
    op: &dyn LinearOperator,
    rng: &mut RngStream,
    probes: usize,
    tol: f64,
) -> Result<OrthogonalityVerdict> {
    if probes < 2 {
        return Err(Error::InvalidInput("orthogonality detection needs at least 2 probes".into()));
    }
    let d = op.input_dim();
    if d == 0 || op.output_dim() == 0 {
        return Err(Error::InvalidInput("operator dimensions must be positive".into()));
    }
    let v0 = uniform_unit_vector(rng, d);
    let mut av = vec![0.0; op.output_dim()];
    op.apply_into(&v0, &mut av);
    let c = dot(&av, &av);
    if d == 1 {
        // A*A is a 1x1 matrix; it is always a multiple of the identity
        return Ok(OrthogonalityVerdict { detected: true, c_estimate: c, probes_used: 0 });
    }
    let mut x = vec![0.0; d];
    let mut ax = vec![0.0; op.output_dim()];
    for p in 0..probes {
        tangent_direction_into(rng, &v0, &[], &mut x, None)?;
        op.apply_into(&x, &mut ax);
        let a = dot(&av, &ax);
        let ax_sq = dot(&ax, &ax);
        let a_ok = a.abs() <= tol * (c * ax_sq).sqrt().max(f64::MIN_POSITIVE);
        let norm_ok = (ax_sq - c).abs() <= tol * c.max(ax_sq).max(f64::MIN_POSITIVE);
        if !(a_ok && norm_ok) {
            return Ok(OrthogonalityVerdict { detected: false, c_estimate: c, probes_used: p + 1 });
        }
    }
    Ok(OrthogonalityVerdict { detected: true, c_estimate: c, probes_used: probes })
}

/// Deflated runs: finds the leading `k_values` singular values by restricting
/// both the initialization and every sampled direction to the orthogonal
/// complement of the vectors found so far.
pub fn run_deflated(
    op: &dyn LinearOperator,
    cfg: &RunConfig,
    rng: &mut RngStream,
    k_values: usize,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let d = op.input_dim();
    if k_values < 1 {
        return Err(Error::InvalidInput("k_values must be at least 1".into()));
    }
    if k_values > d {
        return Err(Error::InvalidInput(format!(
            "cannot deflate {k_values} values out of input dimension {d}"
        )));
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k_values);
    let mut results = Vec::with_capacity(k_values);
    for _ in 0..k_values {
        let report = run_with_basis(op, cfg, rng, &basis)?;
        let mut v = report.singular_vector;
        for f in &basis {
            let c = dot(&v, f);
            for (vi, fi) in v.iter_mut().zip(f) {
                *vi -= c * fi;
            }
        }
        let n = norm(&v);
        for vi in v.iter_mut() {
            *vi /= n;
        }
        results.push((report.norm_estimate, v.clone()));
        basis.push(v);
    }
    Ok(results)
}

/// Writes the trace in the CSV layout `k,a,b,tau,objective,min_a_sq`.
pub fn write_trace_csv<W: Write>(trace: &[StepDiagnostics], mut writer: W) -> Result<()> {
    writeln!(writer, "k,a,b,tau,objective,min_a_sq")?;
    let mut min_a_sq = f64::INFINITY;
    for diag in trace {
        min_a_sq = min_a_sq.min(diag.a * diag.a);
        writeln!(
            writer,
            "{},{},{},{},{},{}",
            diag.k, diag.a, diag.b, diag.tau, diag.objective, min_a_sq
        )?;
    }
    Ok(())
}
