//! Operator construction shared by all subcommands.

use anyhow::{bail, Context, Result};
use clap::Args;
use opnorm::linop::{DenseOperator, LinearOperator};
use opnorm::matrix::DenseMatrix;
use opnorm::projector::make_projector;
use opnorm::rotation::{make_rotation, Interpolation, RotationOperatorSpec};
use std::path::PathBuf;

/// Selects the operator: either a dense matrix from a CSV file or one of the
/// built-in test operators.
#[derive(Args, Debug, Clone)]
pub struct OperatorArgs {
    /// CSV file with one comma-separated row of floats per matrix row.
    #[arg(long, value_name = "FILE")]
    pub matrix: Option<PathBuf>,

    /// Built-in operator: "rotation" or "projector".
    #[arg(long, value_name = "NAME")]
    pub op: Option<String>,

    /// Grid side length for rotation / pixel count per side for projector.
    #[arg(long, default_value_t = 25)]
    pub n: usize,

    /// Rotation angle in degrees.
    #[arg(long, default_value_t = 30.0, allow_hyphen_values = true)]
    pub angle: f64,

    /// Rotation interpolation: nearest, bilinear, or bicubic.
    #[arg(long, default_value = "bilinear")]
    pub interp: String,

    /// Number of projection angles for the projector.
    #[arg(long, default_value_t = 16)]
    pub angles: usize,
}

impl OperatorArgs {
    pub fn build(&self) -> Result<Box<dyn LinearOperator>> {
        match (&self.matrix, &self.op) {
            (Some(_), Some(_)) => bail!("--matrix and --op are mutually exclusive"),
            (None, None) => bail!("one of --matrix or --op is required"),
            (Some(path), None) => {
                let m = DenseMatrix::load_csv(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                Ok(Box::new(DenseOperator::new(m)))
            }
            (None, Some(name)) => match name.as_str() {
                "rotation" => {
                    let interpolation: Interpolation =
                        self.interp.parse().map_err(anyhow::Error::msg)?;
                    Ok(Box::new(make_rotation(RotationOperatorSpec {
                        n: self.n,
                        angle_deg: self.angle,
                        interpolation,
                    })?))
                }
                "projector" => Ok(Box::new(make_projector(self.n, self.angles)?)),
                other => bail!("unknown operator {other:?} (expected rotation or projector)"),
            },
        }
    }
}
