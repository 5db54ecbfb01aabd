//! Numerical workbench for finite-dimensional von Neumann algebras with a
//! faithful weighted trace, their L¹ preduals, and the geometry of ℓ¹-spanning
//! families.
//!
//! The ambient object is a direct sum of complex matrix blocks `⊕_j M_{n_j}`
//! carrying the trace `τ(x) = Σ_j w_j tr(x_j)` with positive weights. On top of
//! that [`algebra`] provides trace norms, polar data, spectral projections and
//! the projection lattice; [`functional`] the dictionary between densities and
//! normal functionals; [`measure`] convergence in measure for the finite
//! trace; [`span`] lower ℓ¹-basis constants and James blocking; [`perturb`]
//! quantitative perturbation bounds and finite orthogonal extraction;
//! [`ortho`] the orthogonalization drivers tying everything together.
//!
//! [`reference`] holds independent reference implementations (naive
//! multiplication, Jacobi SVD, row-reduction ranks, dense grid minimisation)
//! used by the validation suites; production code never calls into it.

pub mod algebra;
pub mod error;
pub mod functional;
pub mod measure;
pub mod ortho;
pub mod perturb;
pub mod reference;
pub mod span;
pub mod tol;

pub use algebra::{AlgebraShape, Element, ElementKind, Projection, ThresholdMode};
pub use error::{Error, Result};
pub use functional::{Functional, Side, SupportPair};
