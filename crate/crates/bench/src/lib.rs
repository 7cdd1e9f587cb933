//! Shared inputs for the criterion benches.

use fmm2d_cli::{sample_points, DistKind, DistributionSpec};
use fmm2d_core::{Complex64, MultipoleExpansion, ParticleSet};

pub fn points(kind: DistKind, n: usize) -> ParticleSet {
    let spec = DistributionSpec::new(kind, 0.01, 42).expect("valid variance");
    sample_points(&spec, n, None).expect("non-empty sample")
}

/// Multipole expansion of `n` unit-square sources about the square's center.
pub fn expansion(p: usize, n: usize) -> MultipoleExpansion {
    let src = points(DistKind::Uniform, n);
    let shifted: Vec<Complex64> = src.positions().iter().map(|z| z - Complex64::new(0.5, 0.5)).collect();
    MultipoleExpansion::from_sources(&shifted, src.strengths(), Complex64::new(0.0, 0.0), p)
}
