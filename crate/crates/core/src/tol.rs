//! Tolerance policy.
//!
//! Boolean predicates all take an explicit tolerance; the helpers here produce
//! the default: an absolute 1e-9 scaled by the size of the inputs and by the
//! total dimension of the algebra.

/// Base absolute tolerance before scaling.
pub const BASE_TOL: f64 = 1e-9;

/// Relative shift used to break spectral ties, scaled by the operator norm.
pub const SPECTRAL_TIE: f64 = 1e-12;

/// Relative cutoff below which a singular value counts as zero (rank decisions).
pub const RANK_CUTOFF: f64 = 1e-12;

/// Default tolerance for inputs of operator-norm scale `scale` on an algebra of
/// total dimension `total_dim`.
pub fn scaled(scale: f64, total_dim: usize) -> f64 {
    BASE_TOL * scale.max(1.0) * (total_dim as f64).max(1.0)
}
