//! Certified computation of singleton pullback attractors for
//! discrete-time Markov chains whose tridiagonal transition rates vary in
//! time — constantly, periodically, or randomly.
//!
//! The pieces fit together like this:
//!
//! - [`chain`] builds tridiagonal generators `Q`, Euler transition
//!   matrices `L = I + delta * Q`, the closed-form stationary distribution
//!   of the autonomous chain, and the positivity constant `gamma`.
//! - [`hilbert`] provides the Hilbert projective metric on the nonnegative
//!   cone, projective diameters, and Birkhoff contraction ratios.
//! - [`driver`] is the environment: a reproducible, two-sided,
//!   integer-indexed source of band rates with exact shift maps.
//! - [`cocycle`] forms ordered products of transition matrices and checks
//!   their band structure and dissipativity.
//! - [`attractor`] runs the pullback solver, certifies each attractor
//!   point by the Hilbert diameter of a deep product's image, and
//!   cross-checks via forward tracking, periodic fixed points, and a
//!   spectral estimate.
//!
//! Everything is a pure function of immutable values; all types are
//! `Send + Sync` and safe to share across threads.

pub mod attractor;
pub mod chain;
pub mod cocycle;
pub mod driver;
pub mod error;
pub mod hilbert;

pub use attractor::{
    attractor_path, default_max_depth, equivariance_defect, forward_tracking_report,
    periodic_attractor, point_distance, pullback_point, pullback_point_traced,
    subdominant_spectral_bound, AttractorPoint, ConvergenceTrace, TraceRow, DEFAULT_TOLERANCE,
};
pub use chain::{
    build_generator, build_transition, positivity_floor, stationary_distribution, BandParameters,
    GeneratorMatrix, ProbabilityVector, RateBounds, SimplexSlice, TransitionMatrix,
};
pub use cocycle::{
    cocycle_matrix, contraction_certificate, slice_diameter, verify_band_structure,
    verify_dissipativity, BandReport, CocycleProduct,
};
pub use driver::{EnvironmentDriver, RateDistribution};
pub use error::{Error, Result};
pub use hilbert::{
    birkhoff_ratio, hilbert_distance, project_to_simplex, projective_diameter,
    simplex_image_diameter, ContractionCertificate, HilbertDistance,
};
