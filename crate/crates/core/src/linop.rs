//! Black-box linear operator abstraction.
//!
//! An operator is only required to evaluate `v -> Av`; the solver never asks
//! for an adjoint. Adjoint pairs exist for baselines and diagnostics only.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// A forward-only evaluation oracle with declared dimensions.
///
/// Implementations must be deterministic and linear; `apply_into` may assume
/// that dimensions were already checked (see [`apply`]).
pub trait LinearOperator: Send + Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;

    /// Writes `Av` into `out`. `v.len() == input_dim()`, `out.len() == output_dim()`.
    fn apply_into(&self, v: &[f64], out: &mut [f64]);
}

/// Checked evaluation: validates dimensions and finiteness, then delegates.
pub fn apply(op: &dyn LinearOperator, v: &[f64]) -> Result<Vec<f64>> {
    check_input(op, v)?;
    let mut out = vec![0.0; op.output_dim()];
    op.apply_into(v, &mut out);
    Ok(out)
}

pub(crate) fn check_input(op: &dyn LinearOperator, v: &[f64]) -> Result<()> {
    if v.len() != op.input_dim() {
        return Err(Error::DimensionMismatch { expected: op.input_dim(), got: v.len() });
    }
    if !v.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Dense matrix wrapped as an operator.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    matrix: DenseMatrix,
}

impl DenseOperator {
    pub fn new(matrix: DenseMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }
}

/// `make_dense` of the interface: builds the matrix-vector product oracle.
pub fn make_dense(rows: &[Vec<f64>]) -> Result<DenseOperator> {
    Ok(DenseOperator::new(DenseMatrix::from_rows(rows)?))
}

impl LinearOperator for DenseOperator {
    fn input_dim(&self) -> usize {
        self.matrix.cols()
    }

    fn output_dim(&self) -> usize {
        self.matrix.rows()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        self.matrix.matvec_into(v, out);
    }
}

/// Operator defined by an arbitrary evaluation closure.
pub struct FnOperator<F> {
    input_dim: usize,
    output_dim: usize,
    eval: F,
}

impl<F> FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(input_dim: usize, output_dim: usize, eval: F) -> Self {
        Self { input_dim, output_dim, eval }
    }
}

impl<F> LinearOperator for FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        (self.eval)(v, out);
    }
}

/// Whether a backward map claims to be the exact adjoint of the forward map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjointClaim {
    ClaimedExact,
    Mismatched,
}

/// A forward operator together with a (possibly wrong) backward map.
///
/// Used by the power-iteration baseline and the adjointness diagnostics,
/// never by the core solver.
pub struct AdjointPair {
    pub forward: Arc<dyn LinearOperator>,
    pub backward: Arc<dyn LinearOperator>,
    pub claim: AdjointClaim,
}

impl AdjointPair {
    pub fn new(
        forward: Arc<dyn LinearOperator>,
        backward: Arc<dyn LinearOperator>,
        claim: AdjointClaim,
    ) -> Result<Self> {
        if forward.input_dim() != backward.output_dim()
            || forward.output_dim() != backward.input_dim()
        {
            return Err(Error::InvalidInput(
                "backward map dimensions do not mirror the forward map".into(),
            ));
        }
        Ok(Self { forward, backward, claim })
    }

    /// Exact pair for a dense matrix: backward is the transpose product.
    pub fn exact_dense(matrix: DenseMatrix) -> Self {
        let t = matrix.transpose();
        Self {
            forward: Arc::new(DenseOperator::new(matrix)),
            backward: Arc::new(DenseOperator::new(t)),
            claim: AdjointClaim::ClaimedExact,
        }
    }
}

/// Applies the backward map of the pair.
pub fn adjoint_apply(pair: &AdjointPair, w: &[f64]) -> Result<Vec<f64>> {
    apply(pair.backward.as_ref(), w)
}
