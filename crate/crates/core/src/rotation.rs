//! Grid rotation as a linear operator on circle-masked images.
//!
//! The operator evaluates the (masked) input image at `R_α x` for every output
//! grid point `x` and masks the result to the inscribed circle again. The
//! bicubic kernel is cubic convolution with parameter a = -0.5 (Catmull-Rom),
//! not a spline with prefiltering, so it is local and self-contained.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linop::LinearOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    Nearest,
    Bilinear,
    Bicubic,
}

impl FromStr for Interpolation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(Self::Nearest),
            "bilinear" => Ok(Self::Bilinear),
            "bicubic" => Ok(Self::Bicubic),
            other => Err(Error::InvalidInput(format!(
                "unknown interpolation {other:?} (expected nearest, bilinear or bicubic)"
            ))),
        }
    }
}

impl std::fmt::Display for Interpolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Nearest => "nearest",
            Self::Bilinear => "bilinear",
            Self::Bicubic => "bicubic",
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RotationOperatorSpec {
    /// Grid side in pixels.
    pub n: usize,
    /// Rotation angle in degrees.
    pub angle_deg: f64,
    pub interpolation: Interpolation,
}

pub struct RotationOperator {
    n: usize,
    cos: f64,
    sin: f64,
    interpolation: Interpolation,
    center: f64,
    radius_sq: f64,
}

/// Builds the rotation operator on `R^{n·n}`.
pub fn make_rotation(spec: RotationOperatorSpec) -> Result<RotationOperator> {
    if spec.n < 3 {
        return Err(Error::InvalidInput("rotation grid side must be at least 3".into()));
    }
    if !spec.angle_deg.is_finite() {
        return Err(Error::NonFinite);
    }
    let rad = spec.angle_deg.to_radians();
    let center = (spec.n as f64 - 1.0) / 2.0;
    Ok(RotationOperator {
        n: spec.n,
        cos: rad.cos(),
        sin: rad.sin(),
        interpolation: spec.interpolation,
        center,
        // tiny slack so that grid points exactly on the circle survive the
        // floating-point rotation at multiples of 90 degrees
        radius_sq: center * center * (1.0 + 1e-9),
    })
}

impl RotationOperator {
    pub fn n(&self) -> usize {
        self.n
    }

    fn in_circle(&self, i: f64, j: f64) -> bool {
        let (di, dj) = (i - self.center, j - self.center);
        di * di + dj * dj <= self.radius_sq
    }

    /// Reads the circle-masked input image; zero outside the grid or circle.
    fn read(&self, v: &[f64], i: i64, j: i64) -> f64 {
        if i < 0 || j < 0 || i >= self.n as i64 || j >= self.n as i64 {
            return 0.0;
        }
        if !self.in_circle(i as f64, j as f64) {
            return 0.0;
        }
        v[i as usize * self.n + j as usize]
    }

    fn sample(&self, v: &[f64], i: f64, j: f64) -> f64 {
        match self.interpolation {
            Interpolation::Nearest => self.read(v, i.round() as i64, j.round() as i64),
            Interpolation::Bilinear => {
                let (i0, j0) = (i.floor(), j.floor());
                let (fi, fj) = (i - i0, j - j0);
                let (i0, j0) = (i0 as i64, j0 as i64);
                self.read(v, i0, j0) * (1.0 - fi) * (1.0 - fj)
                    + self.read(v, i0 + 1, j0) * fi * (1.0 - fj)
                    + self.read(v, i0, j0 + 1) * (1.0 - fi) * fj
                    + self.read(v, i0 + 1, j0 + 1) * fi * fj
            }
            Interpolation::Bicubic => {
                let (i0, j0) = (i.floor(), j.floor());
                let (fi, fj) = (i - i0, j - j0);
                let (i0, j0) = (i0 as i64, j0 as i64);
                let wi = [
                    cubic_kernel(1.0 + fi),
                    cubic_kernel(fi),
                    cubic_kernel(1.0 - fi),
                    cubic_kernel(2.0 - fi),
                ];
                let wj = [
                    cubic_kernel(1.0 + fj),
                    cubic_kernel(fj),
                    cubic_kernel(1.0 - fj),
                    cubic_kernel(2.0 - fj),
                ];
                let mut acc = 0.0;
                for (di, wi) in wi.iter().enumerate() {
                    let mut row = 0.0;
                    for (dj, wj) in wj.iter().enumerate() {
                        row += wj * self.read(v, i0 + di as i64 - 1, j0 + dj as i64 - 1);
                    }
                    acc += wi * row;
                }
                acc
            }
        }
    }
}

/// Cubic convolution kernel, a = -0.5.
fn cubic_kernel(t: f64) -> f64 {
    let s = t.abs();
    if s <= 1.0 {
        (1.5 * s - 2.5) * s * s + 1.0
    } else if s < 2.0 {
        ((-0.5 * s + 2.5) * s - 4.0) * s + 2.0
    } else {
        0.0
    }
}

impl LinearOperator for RotationOperator {
    fn input_dim(&self) -> usize {
        self.n * self.n
    }

    fn output_dim(&self) -> usize {
        self.n * self.n
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let n = self.n;
        for oi in 0..n {
            for oj in 0..n {
                let idx = oi * n + oj;
                if !self.in_circle(oi as f64, oj as f64) {
                    out[idx] = 0.0;
                    continue;
                }
                // output pixel x reads the input at R_α x, centered coordinates
                let pi = oi as f64 - self.center;
                let pj = oj as f64 - self.center;
                let qi = self.cos * pi + self.sin * pj;
                let qj = -self.sin * pi + self.cos * pj;
                if qi * qi + qj * qj > self.radius_sq {
                    out[idx] = 0.0;
                    continue;
                }
                out[idx] = self.sample(v, qi + self.center, qj + self.center);
            }
        }
    }
}
