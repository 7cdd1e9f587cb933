//! Seeded point sets on the unit square.
//!
//! The generator is ChaCha20 keyed by `seed_from_u64(seed)`. Each kind of
//! data reads its own stream of that key so adding evaluation points never
//! perturbs the sources:
//!
//! | stream | data |
//! |--------|------|
//! | 0 | source positions |
//! | 1 | strengths |
//! | 2 | separate evaluation points |

use clap::ValueEnum;
use fmm2d_core::{Complex64, ParticleSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{CliError, Result};

pub const STREAM_POSITIONS: u64 = 0;
pub const STREAM_STRENGTHS: u64 = 1;
pub const STREAM_EVAL: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistKind {
    Uniform,
    /// Isotropic Gaussian around (0.5, 0.5).
    Normal,
    /// Uniform in x, Gaussian around 0.5 in y.
    Layer,
}

impl DistKind {
    pub fn name(self) -> &'static str {
        match self {
            DistKind::Uniform => "uniform",
            DistKind::Normal => "normal",
            DistKind::Layer => "layer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSpec {
    pub kind: DistKind,
    /// Variance of the Gaussian parts.
    pub sigma2: f64,
    pub seed: u64,
}

impl DistributionSpec {
    pub fn new(kind: DistKind, sigma2: f64, seed: u64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(CliError::BadArgs(format!("sigma2 must be positive, got {sigma2}")));
        }
        Ok(Self { kind, sigma2, seed })
    }

    pub fn uniform(seed: u64) -> Self {
        Self {
            kind: DistKind::Uniform,
            sigma2: 0.01,
            seed,
        }
    }

    fn rng(&self, stream: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    fn positions(&self, n: usize, stream: u64) -> Vec<Complex64> {
        let mut rng = self.rng(stream);
        let normal = Normal::new(0.5, self.sigma2.sqrt()).expect("sigma2 checked in new");
        let clipped = |rng: &mut ChaCha20Rng| loop {
            let v: f64 = normal.sample(rng);
            if (0.0..=1.0).contains(&v) {
                return v;
            }
        };
        (0..n)
            .map(|_| match self.kind {
                DistKind::Uniform => Complex64::new(rng.gen(), rng.gen()),
                DistKind::Normal => loop {
                    // redraw the pair, not just the stray coordinate
                    let (x, y): (f64, f64) = (normal.sample(&mut rng), normal.sample(&mut rng));
                    if (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y) {
                        break Complex64::new(x, y);
                    }
                },
                DistKind::Layer => {
                    let x = rng.gen();
                    Complex64::new(x, clipped(&mut rng))
                }
            })
            .collect()
    }
}

/// `n` sources with strengths uniform on [−1, 1], plus `m` separate
/// evaluation points from the same distribution when `m` is given.
pub fn sample_points(spec: &DistributionSpec, n: usize, m: Option<usize>) -> Result<ParticleSet> {
    let z = spec.positions(n, STREAM_POSITIONS);
    let mut rng = spec.rng(STREAM_STRENGTHS);
    let g = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let mut points = ParticleSet::new(z, g)?;
    if let Some(m) = m {
        points = points.with_eval_points(spec.positions(m, STREAM_EVAL))?;
    }
    Ok(points)
}
