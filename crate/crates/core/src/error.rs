//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Shape validation failed at construction.
    #[error("invalid algebra shape: {0}")]
    InvalidShape(String),

    /// Two operands live on different algebras.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A caller-supplied argument is out of range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An operation required a selfadjoint element.
    #[error("element not selfadjoint: residual {residual:.3e} exceeds tol {tol:.3e}")]
    NotSelfadjoint { residual: f64, tol: f64 },

    /// An operation required a positive functional.
    #[error("functional not positive: {0}")]
    NotPositive(String),

    /// An operation required a contraction.
    #[error("element outside the unit ball: operator norm {norm:.6}")]
    OutsideUnitBall { norm: f64 },

    /// Compression of a functional lost essentially all of its mass.
    #[error("degenerate compression: compressed norm {norm:.3e} below cutoff {cutoff:.3e}")]
    DegenerateCompression { norm: f64, cutoff: f64 },

    /// Support-mass hypothesis of a compression estimate fails; carries the
    /// measured masses so the caller can see by how much.
    #[error(
        "support mass below 1-beta: right mass {right_mass:.9}, left mass {left_mass:.9}, required {required:.9}"
    )]
    SupportMass {
        right_mass: f64,
        left_mass: f64,
        required: f64,
    },

    /// A measured lower ℓ¹ constant is below what the caller demanded.
    #[error("insufficient l1 span: measured {measured:.9}, required {required:.9}")]
    InsufficientSpan { measured: f64, required: f64 },

    /// Normalizing a functional whose norm is numerically zero.
    #[error("near-zero functional: norm {norm:.3e} below cutoff {cutoff:.3e}")]
    NearZero { norm: f64, cutoff: f64 },

    /// Per-block numerical failure (eigensolver and friends).
    #[error("numeric failure in block {block}: {message}")]
    Numeric { block: usize, message: String },

    /// The dyadic schedule left the range of f64.
    #[error("delta schedule underflows f64 at step {step} of {n}")]
    ScheduleUnderflow { step: usize, n: usize },

    /// Generic precondition failure with context.
    #[error("precondition failed: {0}")]
    Precondition(String),
}
