//! Error type shared by every fallible operation in the crate.

use thiserror::Error;

/// Crate-wide error enumeration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A Stokes-operator index outside {1, 2, 3}.
    #[error("stokes operator index must be 1, 2, or 3 (got {index})")]
    InvalidStokesIndex { index: u8 },

    /// An amplitude, matrix entry, or argument was NaN or infinite.
    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    /// A state vector's squared norm deviates from 1 by more than the
    /// renormalization window allows.
    #[error("state norm² = {norm_sqr:e} is too far from 1 to renormalize")]
    NormOutOfRange { norm_sqr: f64 },

    /// A matrix expected to be Hermitian is not, or an expectation value
    /// came out with a non-negligible imaginary part.
    #[error("operator is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    /// A measurement target must square to the identity.
    #[error("measurement target must square to the identity (deviation {deviation:e})")]
    NotInvolutory { deviation: f64 },

    /// The Gaussian measurement kernel needs a positive, finite width.
    #[error("measurement resolution must be positive and finite (got {value})")]
    InvalidResolution { value: f64 },

    /// A second-component sign must be −1 or +1.
    #[error("component sign must be -1 or +1 (got {value})")]
    InvalidComponentSign { value: i8 },

    /// An outcome so unlikely that the post-measurement state is numerically
    /// undefined.
    #[error("outcome density {density:e} is numerically degenerate; post-measurement state undefined")]
    DegenerateOutcome { density: f64 },

    /// An estimator was handed fewer records than it needs.
    #[error("estimator needs at least {needed} records (got {got})")]
    InsufficientSamples { needed: usize, got: usize },

    /// An estimator was handed records of the wrong experiment kind.
    #[error("estimator expects {expected} records")]
    WrongRecordKind { expected: &'static str },

    /// A table operation was handed the other table shape.
    #[error("operation requires a {expected} table")]
    WrongTableKind { expected: &'static str },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature failed to converge (best estimate {estimate:e})")]
    QuadratureNoConvergence { estimate: f64 },

    /// Bisection was started on an interval whose endpoints do not bracket
    /// a sign change.
    #[error("root is not bracketed on [{a}, {b}]")]
    RootNotBracketed { a: f64, b: f64 },

    /// A tabulated function could not be interpolated (non-monotone or
    /// degenerate knot sequence).
    #[error("interpolation knots are invalid: {reason}")]
    InvalidKnots { reason: &'static str },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
