//! Python bindings: wraps the operators and the solver entry points.

use opnorm::linop::{DenseOperator, LinearOperator};
use opnorm::matrix::DenseMatrix;
use opnorm::projector::make_projector;
use opnorm::reference;
use opnorm::rotation::{make_rotation, Interpolation, RotationOperatorSpec};
use opnorm::sampling::RngStream;
use opnorm::solver::{self, Init, Mode, RunConfig};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use std::sync::Arc;

fn to_py_err(err: opnorm::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

/// A Python callable used as the forward oracle.
struct CallableOperator {
    input_dim: usize,
    output_dim: usize,
    func: Py<PyAny>,
}

impl LinearOperator for CallableOperator {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        Python::attach(|py| {
            let result: Vec<f64> = self
                .func
                .call1(py, (v.to_vec(),))
                .and_then(|r| r.extract(py))
                .unwrap_or_else(|e| panic!("operator callable failed: {e}"));
            assert_eq!(result.len(), out.len(), "operator callable returned a wrong-sized vector");
            out.copy_from_slice(&result);
        });
    }
}

/// A black-box linear map usable with `estimate`, `detect_orthogonal`,
/// `top_k`, and `materialize`.
#[pyclass]
struct Operator {
    inner: Arc<dyn LinearOperator>,
}

#[pymethods]
impl Operator {
    /// Dense operator from a list of rows.
    #[staticmethod]
    fn dense(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let m = DenseMatrix::from_rows(&rows).map_err(to_py_err)?;
        Ok(Self { inner: Arc::new(DenseOperator::new(m)) })
    }

    /// Grid rotation by `angle_deg` with interpolation "nearest", "bilinear",
    /// or "bicubic"; acts on flattened n-by-n images.
    #[staticmethod]
    fn rotation(n: usize, angle_deg: f64, interp: &str) -> PyResult<Self> {
        let interpolation: Interpolation = interp.parse().map_err(to_py_err)?;
        let op = make_rotation(RotationOperatorSpec { n, angle_deg, interpolation })
            .map_err(to_py_err)?;
        Ok(Self { inner: Arc::new(op) })
    }

    /// Parallel-beam projector over equispaced angles in [0, 180).
    #[staticmethod]
    fn projector(n_pixels: usize, n_angles: usize) -> PyResult<Self> {
        let op = make_projector(n_pixels, n_angles).map_err(to_py_err)?;
        Ok(Self { inner: Arc::new(op) })
    }

    /// Wraps a Python callable mapping a length-`input_dim` list of floats to
    /// a length-`output_dim` one. The callable must be linear.
    #[staticmethod]
    fn from_callable(input_dim: usize, output_dim: usize, func: Py<PyAny>) -> PyResult<Self> {
        if input_dim == 0 || output_dim == 0 {
            return Err(PyValueError::new_err("operator dimensions must be positive"));
        }
        Ok(Self { inner: Arc::new(CallableOperator { input_dim, output_dim, func }) })
    }

    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    fn output_dim(&self) -> usize {
        self.inner.output_dim()
    }

    fn apply(&self, v: Vec<f64>) -> PyResult<Vec<f64>> {
        opnorm::linop::apply(self.inner.as_ref(), &v).map_err(to_py_err)
    }
}

/// Result of an estimation run.
#[pyclass]
struct Report {
    #[pyo3(get)]
    norm_estimate: f64,
    #[pyo3(get)]
    singular_vector: Vec<f64>,
    #[pyo3(get)]
    termination: String,
    #[pyo3(get)]
    oracle_calls: usize,
    #[pyo3(get)]
    running_min_a_sq: f64,
}

fn build_config(
    eps: f64,
    max_iters: Option<usize>,
    resamples: usize,
    init: &str,
    mode: &str,
) -> PyResult<RunConfig> {
    let init = match init {
        "uniform" => Init::Uniform,
        "ones" => Init::Ones,
        other => return Err(PyValueError::new_err(format!("unknown init {other:?}"))),
    };
    let mode = match mode {
        "max" => Mode::Max,
        "min" => Mode::Min,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    Ok(RunConfig { eps, max_iters, resamples, init, mode, ..Default::default() })
}

/// Estimates the extreme singular value of `op`.
#[pyfunction]
#[pyo3(signature = (op, seed=0, eps=1e-6, max_iters=None, resamples=10, init="uniform", mode="max"))]
fn estimate(
    op: &Operator,
    seed: u64,
    eps: f64,
    max_iters: Option<usize>,
    resamples: usize,
    init: &str,
    mode: &str,
) -> PyResult<Report> {
    let cfg = build_config(eps, max_iters, resamples, init, mode)?;
    let mut rng = RngStream::from_seed(seed);
    let report = solver::run(op.inner.as_ref(), &cfg, &mut rng).map_err(to_py_err)?;
    Ok(Report {
        norm_estimate: report.norm_estimate,
        singular_vector: report.singular_vector,
        termination: report.termination.to_string(),
        oracle_calls: report.oracle_calls,
        running_min_a_sq: report.running_min_a_sq,
    })
}

/// Probes whether `A*A = cI`; returns `(detected, c_estimate, probes_used)`.
#[pyfunction]
#[pyo3(signature = (op, seed=0, probes=10, tol=1e-8))]
fn detect_orthogonal(
    op: &Operator,
    seed: u64,
    probes: usize,
    tol: f64,
) -> PyResult<(bool, f64, usize)> {
    let mut rng = RngStream::from_seed(seed);
    let verdict =
        solver::detect_orthogonal(op.inner.as_ref(), &mut rng, probes, tol).map_err(to_py_err)?;
    Ok((verdict.detected, verdict.c_estimate, verdict.probes_used))
}

/// The `k` leading singular values with their right singular vectors, found
/// by deflation.
#[pyfunction]
#[pyo3(signature = (op, k, seed=0, eps=1e-6, max_iters=None))]
fn top_k(
    op: &Operator,
    k: usize,
    seed: u64,
    eps: f64,
    max_iters: Option<usize>,
) -> PyResult<Vec<(f64, Vec<f64>)>> {
    let cfg = build_config(eps, max_iters, 10, "uniform", "max")?;
    let mut rng = RngStream::from_seed(seed);
    solver::run_deflated(op.inner.as_ref(), &cfg, &mut rng, k).map_err(to_py_err)
}

/// Evaluates the operator column by column into a list of rows (test oracle;
/// capped input dimension).
#[pyfunction]
fn materialize(op: &Operator) -> PyResult<Vec<Vec<f64>>> {
    let m = reference::materialize(op.inner.as_ref()).map_err(to_py_err)?;
    Ok((0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect())
        .collect())
}

/// Dense operator from a headerless CSV of comma-separated floats.
#[pyfunction]
fn load_matrix_csv(path: &str) -> PyResult<Operator> {
    let m = DenseMatrix::load_csv(path).map_err(to_py_err)?;
    Ok(Operator { inner: Arc::new(DenseOperator::new(m)) })
}

#[pymodule]
fn opnorm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Operator>()?;
    m.add_class::<Report>()?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(detect_orthogonal, m)?)?;
    m.add_function(wrap_pyfunction!(top_k, m)?)?;
    m.add_function(wrap_pyfunction!(materialize, m)?)?;
    m.add_function(wrap_pyfunction!(load_matrix_csv, m)?)?;
    Ok(())
}
