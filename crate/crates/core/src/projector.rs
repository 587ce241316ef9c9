//! A simple parallel-beam forward projector (Joseph-style line sums).
//!
//! Detector spacing equals pixel spacing, rays pass through pixel centers and
//! image values are read by bilinear interpolation at unit steps along each
//! ray. This is a demo operator; matching any particular tomography package
//! is a non-goal.

use crate::error::{Error, Result};
use crate::linop::LinearOperator;

pub struct ParallelBeamProjector {
    n_pixels: usize,
    /// (cos, sin) per projection angle, equispaced in [0°, 180°).
    angles: Vec<(f64, f64)>,
    center: f64,
}

pub fn make_projector(n_pixels: usize, n_angles: usize) -> Result<ParallelBeamProjector> {
    if n_pixels < 4 {
        return Err(Error::InvalidInput("projector needs at least 4 pixels".into()));
    }
    if n_angles < 1 {
        return Err(Error::InvalidInput("projector needs at least one angle".into()));
    }
    let angles = (0..n_angles)
        .map(|a| {
            let rad = (a as f64 * 180.0 / n_angles as f64).to_radians();
            (rad.cos(), rad.sin())
        })
        .collect();
    Ok(ParallelBeamProjector { n_pixels, angles, center: (n_pixels as f64 - 1.0) / 2.0 })
}

impl ParallelBeamProjector {
    pub fn n_pixels(&self) -> usize {
        self.n_pixels
    }

    pub fn n_angles(&self) -> usize {
        self.angles.len()
    }

    fn bilinear(&self, v: &[f64], i: f64, j: f64) -> f64 {
        let n = self.n_pixels as i64;
        let read = |i: i64, j: i64| -> f64 {
            if i < 0 || j < 0 || i >= n || j >= n {
                0.0
            } else {
                v[i as usize * self.n_pixels + j as usize]
            }
        };
        let (i0, j0) = (i.floor(), j.floor());
        let (fi, fj) = (i - i0, j - j0);
        let (i0, j0) = (i0 as i64, j0 as i64);
        read(i0, j0) * (1.0 - fi) * (1.0 - fj)
            + read(i0 + 1, j0) * fi * (1.0 - fj)
            + read(i0, j0 + 1) * (1.0 - fi) * fj
            + read(i0 + 1, j0 + 1) * fi * fj
    }
}

impl LinearOperator for ParallelBeamProjector {
    fn input_dim(&self) -> usize {
        self.n_pixels * self.n_pixels
    }

    fn output_dim(&self) -> usize {
        self.n_pixels * self.angles.len()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let n = self.n_pixels;
        let c = self.center;
        for (a, &(cos, sin)) in self.angles.iter().enumerate() {
            // ray direction (cos, sin), detector axis (-sin, cos)
            for t in 0..n {
                let offset = t as f64 - c;
                let mut acc = 0.0;
                for s in 0..n {
                    let step = s as f64 - c;
                    let i = c + step * cos - offset * sin;
                    let j = c + step * sin + offset * cos;
                    acc += self.bilinear(v, i, j);
                }
                out[a * n + t] = acc;
            }
        }
    }
}
