//! Adaptive fast multipole method in the complex plane.
//!
//! The tree is a balanced pyramid built from successive median splits of the
//! source points, so every level `l` holds exactly `4^l` boxes. Boxes at the
//! same level are coupled either weakly (multipole-to-local shifts) or
//! strongly (deferred to the children, and at the finest level handled by
//! direct evaluation) according to the θ-criterion.
//!
//! The kernel is the harmonic potential `Γ / (z_s − y)`.
//!
//! ```
//! use fmm2d_core::{direct_evaluate, fmm_evaluate, max_rel_error, Complex64, ParticleSet, TreeConfig};
//!
//! let positions: Vec<Complex64> = (0..500)
//!     .map(|i| {
//!         let t = i as f64 * 0.618_033_988_75;
//!         Complex64::new(t.fract(), (t * 7.31).fract())
//!     })
//!     .collect();
//! let strengths = vec![1.0; positions.len()];
//! let points = ParticleSet::new(positions, strengths).unwrap();
//!
//! let cfg = TreeConfig { n_desired_per_box: 10, ..TreeConfig::default() };
//! let (field, _report) = fmm_evaluate(&points, &cfg).unwrap();
//! let exact = direct_evaluate(&points, false);
//! assert!(max_rel_error(&field, &exact).unwrap().max < 1e-5);
//! ```

pub mod connectivity;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod operators;
pub mod partition;
pub mod tree;

mod exec;

pub use connectivity::{build_connectivity, InteractionKind, InteractionLists};
pub use engine::{
    direct_evaluate, direct_evaluate_with, fmm_evaluate, max_rel_error, EngineReport, ErrorSummary, Phase, PotentialField,
    TreeStats,
};
pub use error::{FmmError, Result};
pub use geometry::{well_separated, well_separated_swapped, Axis, BoxGeometry, ThetaConfig};
pub use num_complex::Complex64;
pub use operators::{LocalExpansion, MultipoleExpansion, ShiftVariant};
pub use partition::partition_median;
pub use tree::{build_tree, num_levels, BoxNode, FmmTree, ParticleSet, TreeConfig};
