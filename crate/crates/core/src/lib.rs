//! Matrix- and adjoint-free operator norm estimation.
//!
//! Estimates the largest (or smallest) singular value of a black-box linear
//! map using forward evaluations only: a stochastic random search on the unit
//! sphere with an exact closed-form line search in each sampled tangent
//! direction. The crate also ships the built-in test operators (dense
//! matrices, grid rotation, a parallel-beam projector), a resampled stopping
//! rule, deflation for leading singular triplets, an orthogonal-columns
//! detector, and adjoint-based reference baselines for validation.
//!
//! ```
//! use opnorm::{linop, solver, sampling::RngStream};
//!
//! let op = linop::make_dense(&[vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap();
//! let mut rng = RngStream::from_seed(1);
//! let report = solver::run(&op, &solver::RunConfig::default(), &mut rng).unwrap();
//! assert!((report.norm_estimate - 3.0).abs() < 1e-6);
//! ```

pub mod error;
pub mod linop;
pub mod matrix;
pub mod projector;
pub mod reference;
pub mod rotation;
pub mod sampling;
pub mod solver;

pub use error::{Error, Result};
