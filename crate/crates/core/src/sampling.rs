//! Seedable randomness and the tangent-direction sampler.
//!
//! Normal draws come from `rand_distr::StandardNormal` (ziggurat) on top of
//! ChaCha12; reproducibility is per seed within one build of the crate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Relative threshold below which a projected direction counts as underflowed
/// and is redrawn.
const PROJECTION_UNDERFLOW: f64 = 1e-12;

/// Default retry budget for redraws after projection underflow.
pub const DEFAULT_RETRIES: usize = 100;

/// A seeded random stream. Streams derived via [`RngStream::substream`] with
/// distinct labels are independent for testing purposes.
pub struct RngStream {
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        Self { rng: ChaCha12Rng::seed_from_u64(seed) }
    }

    /// Derives an independent stream from a base seed and a label
    /// (splitmix64 finalizer over the pair).
    pub fn substream(base_seed: u64, label: u64) -> Self {
        let mut z = base_seed ^ label.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        Self::from_seed(z ^ (z >> 31))
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// `d` independent standard-normal draws.
    pub fn gaussian_vector(&mut self, d: usize) -> Vec<f64> {
        let mut v = vec![0.0; d];
        self.fill_gaussian(&mut v);
        v
    }

    pub fn fill_gaussian(&mut self, out: &mut [f64]) {
        for x in out.iter_mut() {
            *x = self.standard_normal();
        }
    }
}

/// A sampled unit search direction together with the raw Gaussian draw.
#[derive(Debug, Clone)]
pub struct DirectionSample {
    /// Unit direction orthogonal to the anchor it was sampled for.
    pub x: Vec<f64>,
    /// The raw Gaussian vector, retained only for diagnostics.
    pub y: Vec<f64>,
}

pub fn gaussian_vector(rng: &mut RngStream, d: usize) -> Vec<f64> {
    rng.gaussian_vector(d)
}

/// Uniform draw from the unit sphere: normalized Gaussian, redrawn on underflow.
pub fn uniform_unit_vector(rng: &mut RngStream, d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    loop {
        rng.fill_gaussian(&mut v);
        let n = norm(&v);
        if n > 0.0 && n.is_finite() {
            for x in v.iter_mut() {
                *x /= n;
            }
            return v;
        }
    }
}

/// Samples a unit direction uniformly on the sphere of the orthogonal
/// complement of `v`: project a Gaussian onto `{v}^⊥` and normalize.
pub fn tangent_direction(rng: &mut RngStream, v: &[f64]) -> Result<DirectionSample> {
    let d = v.len();
    if d < 2 {
        return Err(Error::InvalidInput("tangent sampling needs dimension >= 2".into()));
    }
    let mut x = vec![0.0; d];
    let mut y = vec![0.0; d];
    tangent_direction_into(rng, v, &[], &mut x, Some(&mut y))?;
    Ok(DirectionSample { x, y })
}

/// Buffer-reusing variant: fills `x` with a unit direction orthogonal to `v`
/// and to every vector in `frozen` (used by deflated runs). `raw` receives the
/// Gaussian draw when provided.
pub(crate) fn tangent_direction_into(
    rng: &mut RngStream,
    v: &[f64],
    frozen: &[Vec<f64>],
    x: &mut [f64],
    mut raw: Option<&mut [f64]>,
) -> Result<()> {
    for _ in 0..DEFAULT_RETRIES {
        rng.fill_gaussian(x);
        if let Some(ref mut raw) = raw {
            raw.copy_from_slice(x);
        }
        let y_norm = norm(x);
        orthogonalize(x, v);
        for f in frozen {
            orthogonalize(x, f);
        }
        let p_norm = norm(x);
        if p_norm > PROJECTION_UNDERFLOW * y_norm {
            for e in x.iter_mut() {
                *e /= p_norm;
            }
            return Ok(());
        }
    }
    Err(Error::RetryBudgetExhausted)
}

/// `x -= <x,u> u` for unit `u`.
fn orthogonalize(x: &mut [f64], u: &[f64]) {
    let c = dot(x, u);
    for (xi, ui) in x.iter_mut().zip(u) {
        *xi -= c * ui;
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
