//! Block matrices: simultaneously operators (L^∞) and densities (L¹).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::sync::Arc;

use super::shape::{check_same_shape, AlgebraShape};
use crate::error::{Error, Result};

/// Per-block storage. Shapes whose blocks are all 1×1 keep one flat diagonal
/// vector; everything else keeps dense per-block matrices.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum BlockData {
    Diag(Vec<Complex64>),
    Dense(Vec<DMatrix<Complex64>>),
}

/// An element of the algebra: one complex matrix per block.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    shape: Arc<AlgebraShape>,
    pub(crate) data: BlockData,
}

impl Element {
    pub fn zeros(shape: &Arc<AlgebraShape>) -> Self {
        let data = if shape.is_diagonal() {
            BlockData::Diag(vec![Complex64::ZERO; shape.num_blocks()])
        } else {
            BlockData::Dense(
                shape
                    .block_dims()
                    .iter()
                    .map(|&n| DMatrix::zeros(n, n))
                    .collect(),
            )
        };
        Element {
            shape: shape.clone(),
            data,
        }
    }

    pub fn identity(shape: &Arc<AlgebraShape>) -> Self {
        let data = if shape.is_diagonal() {
            BlockData::Diag(vec![Complex64::ONE; shape.num_blocks()])
        } else {
            BlockData::Dense(
                shape
                    .block_dims()
                    .iter()
                    .map(|&n| DMatrix::identity(n, n))
                    .collect(),
            )
        };
        Element {
            shape: shape.clone(),
            data,
        }
    }

    /// Build from per-block dense matrices; dimensions must match the shape.
    pub fn from_blocks(shape: &Arc<AlgebraShape>, blocks: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if blocks.len() != shape.num_blocks() {
            return Err(Error::ShapeMismatch(format!(
                "{} blocks vs {} expected",
                blocks.len(),
                shape.num_blocks()
            )));
        }
        for (j, (b, &n)) in blocks.iter().zip(shape.block_dims()).enumerate() {
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::ShapeMismatch(format!(
                    "block {j} is {}x{}, expected {n}x{n}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        let data = if shape.is_diagonal() {
            BlockData::Diag(blocks.iter().map(|b| b[(0, 0)]).collect())
        } else {
            BlockData::Dense(blocks)
        };
        Ok(Element {
            shape: shape.clone(),
            data,
        })
    }

    /// Build a diagonal element on a diagonal (all blocks 1×1) shape.
    pub fn from_diagonal(shape: &Arc<AlgebraShape>, diag: Vec<Complex64>) -> Result<Self> {
        if !shape.is_diagonal() {
            return Err(Error::InvalidArgument(
                "from_diagonal requires an all-1x1 shape".into(),
            ));
        }
        if diag.len() != shape.num_blocks() {
            return Err(Error::ShapeMismatch(format!(
                "{} diagonal entries vs {} atoms",
                diag.len(),
                shape.num_blocks()
            )));
        }
        Ok(Element {
            shape: shape.clone(),
            data: BlockData::Diag(diag),
        })
    }

    /// The matrix unit `e_{rc}` inside one block, zero elsewhere.
    pub fn matrix_unit(
        shape: &Arc<AlgebraShape>,
        block: usize,
        row: usize,
        col: usize,
    ) -> Result<Self> {
        let dims = shape.block_dims();
        if block >= dims.len() || row >= dims[block] || col >= dims[block] {
            return Err(Error::InvalidArgument(format!(
                "matrix unit ({row},{col}) out of range for block {block}"
            )));
        }
        let mut e = Element::zeros(shape);
        match &mut e.data {
            BlockData::Diag(d) => d[block] = Complex64::ONE,
            BlockData::Dense(bs) => bs[block][(row, col)] = Complex64::ONE,
        }
        Ok(e)
    }

    pub fn shape(&self) -> &Arc<AlgebraShape> {
        &self.shape
    }

    pub fn is_on_same_shape(&self, other: &Element) -> bool {
        super::shape::same_shape(&self.shape, &other.shape)
    }

    /// Flat diagonal when stored diagonally.
    pub fn diagonal(&self) -> Option<&[Complex64]> {
        match &self.data {
            BlockData::Diag(d) => Some(d),
            BlockData::Dense(_) => None,
        }
    }

    /// Materialize per-block dense matrices (copies for diagonal storage).
    pub fn blocks_dense(&self) -> Vec<DMatrix<Complex64>> {
        match &self.data {
            BlockData::Diag(d) => d.iter().map(|&z| DMatrix::from_element(1, 1, z)).collect(),
            BlockData::Dense(bs) => bs.clone(),
        }
    }

    fn zip_with(
        &self,
        other: &Element,
        fd: impl Fn(Complex64, Complex64) -> Complex64,
        fm: impl Fn(&DMatrix<Complex64>, &DMatrix<Complex64>) -> DMatrix<Complex64>,
    ) -> Result<Element> {
        check_same_shape(&self.shape, &other.shape)?;
        let data = match (&self.data, &other.data) {
            (BlockData::Diag(a), BlockData::Diag(b)) => {
                BlockData::Diag(a.iter().zip(b).map(|(&x, &y)| fd(x, y)).collect())
            }
            (BlockData::Dense(a), BlockData::Dense(b)) => {
                BlockData::Dense(a.iter().zip(b).map(|(x, y)| fm(x, y)).collect())
            }
            _ => unreachable!("storage variant is determined by the shape"),
        };
        Ok(Element {
            shape: self.shape.clone(),
            data,
        })
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |x, y| x + y, |a, b| a + b)
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |x, y| x - y, |a, b| a - b)
    }

    pub fn mul(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |x, y| x * y, |a, b| a * b)
    }

    pub fn neg(&self) -> Element {
        self.map(|z| -z)
    }

    pub fn scale(&self, s: f64) -> Element {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: Complex64) -> Element {
        self.map(|z| z * s)
    }

    /// Conjugate transpose per block.
    pub fn adjoint(&self) -> Element {
        let data = match &self.data {
            BlockData::Diag(d) => BlockData::Diag(d.iter().map(|z| z.conj()).collect()),
            BlockData::Dense(bs) => BlockData::Dense(bs.iter().map(|b| b.adjoint()).collect()),
        };
        Element {
            shape: self.shape.clone(),
            data,
        }
    }

    fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Element {
        let data = match &self.data {
            BlockData::Diag(d) => BlockData::Diag(d.iter().map(|&z| f(z)).collect()),
            BlockData::Dense(bs) => BlockData::Dense(bs.iter().map(|b| b.map(&f)).collect()),
        };
        Element {
            shape: self.shape.clone(),
            data,
        }
    }

    /// `τ(x) = Σ_j w_j tr(x_j)`.
    pub fn trace(&self) -> Complex64 {
        match &self.data {
            BlockData::Diag(d) => d
                .iter()
                .zip(self.shape.trace_weights())
                .map(|(&z, &w)| z * w)
                .sum(),
            BlockData::Dense(bs) => bs
                .iter()
                .zip(self.shape.trace_weights())
                .map(|(b, &w)| b.trace() * w)
                .sum(),
        }
    }

    /// Residual `‖x − x*‖_∞` used by the selfadjointness predicate.
    pub fn selfadjoint_residual(&self) -> f64 {
        self.sub(&self.adjoint()).expect("same shape").norm_op()
    }

    /// `‖x − x*‖_∞ ≤ tol · max(1, ‖x‖_∞)`.
    pub fn is_selfadjoint(&self, tol: f64) -> bool {
        self.selfadjoint_residual() <= tol * self.norm_op().max(1.0)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.norm_op() <= tol
    }

    /// Largest entry-wise modulus; cheap coarse size gauge.
    pub fn max_abs_entry(&self) -> f64 {
        match &self.data {
            BlockData::Diag(d) => d.iter().map(|z| z.norm()).fold(0.0, f64::max),
            BlockData::Dense(bs) => bs
                .iter()
                .flat_map(|b| b.iter())
                .map(|z| z.norm())
                .fold(0.0, f64::max),
        }
    }

    /// `‖x − y‖₁`.
    pub fn distance_l1(&self, other: &Element) -> Result<f64> {
        Ok(self.sub(other)?.norm_l1())
    }
}

// Serialization: {"dims": [...], "weights": [...], "blocks": [[[re,im],...],...]}
// with each block flattened row-major. Field names are fixed for interchange.

#[derive(Serialize, Deserialize)]
struct ElementRepr {
    dims: Vec<usize>,
    weights: Vec<f64>,
    blocks: Vec<Vec<[f64; 2]>>,
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let blocks = match &self.data {
            BlockData::Diag(d) => d.iter().map(|z| vec![[z.re, z.im]]).collect(),
            BlockData::Dense(bs) => bs
                .iter()
                .map(|b| {
                    let n = b.nrows();
                    let mut flat = Vec::with_capacity(n * n);
                    for i in 0..n {
                        for j in 0..n {
                            let z = b[(i, j)];
                            flat.push([z.re, z.im]);
                        }
                    }
                    flat
                })
                .collect(),
        };
        ElementRepr {
            dims: self.shape.block_dims().to_vec(),
            weights: self.shape.trace_weights().to_vec(),
            blocks,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = ElementRepr::deserialize(deserializer)?;
        element_from_repr(repr).map_err(D::Error::custom)
    }
}

fn element_from_repr(repr: ElementRepr) -> Result<Element> {
    let shape = AlgebraShape::new(repr.dims, repr.weights)?;
    if repr.blocks.len() != shape.num_blocks() {
        return Err(Error::ShapeMismatch(format!(
            "{} serialized blocks vs {} expected",
            repr.blocks.len(),
            shape.num_blocks()
        )));
    }
    let mut blocks = Vec::with_capacity(repr.blocks.len());
    for (j, (flat, &n)) in repr.blocks.iter().zip(shape.block_dims()).enumerate() {
        if flat.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "block {j} has {} entries, expected {}",
                flat.len(),
                n * n
            )));
        }
        blocks.push(DMatrix::from_fn(n, n, |i, k| {
            let [re, im] = flat[i * n + k];
            Complex64::new(re, im)
        }));
    }
    Element::from_blocks(&shape, blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trace_of_identity() {
        let shape = AlgebraShape::new(vec![2, 3], vec![1.0, 2.0]).unwrap();
        let one = Element::identity(&shape);
        assert!((one.trace() - c(8.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn trace_of_diag() {
        let shape = AlgebraShape::new(vec![2], vec![1.0]).unwrap();
        let x = Element::from_blocks(
            &shape,
            vec![DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                c(3.0, 0.0),
                c(-4.0, 0.0),
            ]))],
        )
        .unwrap();
        assert!((x.trace() - c(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn adjoint_is_involutive() {
        let shape = AlgebraShape::new(vec![2, 3], vec![1.0, 0.5]).unwrap();
        let x = super::super::random::random_suite(&shape, crate::algebra::ElementKind::Generic, 7);
        let back = x.adjoint().adjoint();
        assert!(back.sub(&x).unwrap().norm_op() < 1e-14);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let s1 = AlgebraShape::new(vec![2], vec![1.0]).unwrap();
        let s2 = AlgebraShape::new(vec![3], vec![1.0]).unwrap();
        let x = Element::identity(&s1);
        let y = Element::identity(&s2);
        assert!(matches!(x.add(&y), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let shape = AlgebraShape::new(vec![2, 1], vec![0.3, 1.7]).unwrap();
        let x =
            super::super::random::random_suite(&shape, crate::algebra::ElementKind::Generic, 42);
        let json = serde_json::to_string(&x).unwrap();
        let y: Element = serde_json::from_str(&json).unwrap();
        assert_eq!(x.blocks_dense(), y.blocks_dense());
        assert_eq!(x.shape().block_dims(), y.shape().block_dims());
        assert_eq!(x.shape().trace_weights(), y.shape().trace_weights());
    }

    #[test]
    fn diagonal_storage_used_for_atomic_shapes() {
        let shape = AlgebraShape::discretized_interval(8).unwrap();
        let x = Element::identity(&shape);
        assert!(x.diagonal().is_some());
        let json = serde_json::to_string(&x).unwrap();
        let y: Element = serde_json::from_str(&json).unwrap();
        assert!(y.diagonal().is_some());
        assert_eq!(x, y);
    }
}
