//! Shared error type for the solver crates.

use crate::attractor::AttractorPoint;

/// Errors produced by chain construction, geometry, and the solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter violated a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two vectors or matrices had incompatible dimensions.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        /// Expected length or order.
        expected: usize,
        /// Length or order actually supplied.
        got: usize,
    },

    /// The Euler step is too large to keep the transition matrices
    /// nonnegative with a positive floor: `delta < 1/(2*beta)` is required.
    #[error("time step {delta} too large: the rate bounds require delta < {limit}")]
    StepTooLarge {
        /// The offending step.
        delta: f64,
        /// The strict upper limit `1/(2*beta)`.
        limit: f64,
    },

    /// A pullback run hit its depth budget before the image diameter
    /// dropped below the requested tolerance. Carries the best point
    /// found and its certified radius.
    #[error(
        "pullback unconverged at depth {depth}: image diameter {radius:e} > tolerance {tolerance:e}"
    )]
    Unconverged {
        /// Best point available when the budget ran out.
        best: Box<AttractorPoint>,
        /// Depth reached.
        depth: usize,
        /// Image diameter at that depth (the certified error radius).
        radius: f64,
        /// Tolerance that was requested.
        tolerance: f64,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
