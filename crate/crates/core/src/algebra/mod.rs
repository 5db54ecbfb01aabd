//! The ambient finite-dimensional algebra: shapes, elements, spectral data,
//! projections, and seeded random inputs.

pub(crate) mod element;
mod projection;
mod random;
mod shape;
mod spectral;

pub use element::Element;
pub use projection::{is_orthogonal_elements, Projection};
pub use random::{random_suite, ElementKind};
pub use shape::{same_shape, AlgebraShape};
pub use spectral::{Polar, ThresholdMode};
