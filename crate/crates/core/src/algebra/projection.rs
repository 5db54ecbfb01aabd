//! Projections and the projection lattice.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::element::{BlockData, Element};
use super::shape::AlgebraShape;
use crate::error::{Error, Result};
use std::sync::Arc;

/// Cosine threshold above which a principal angle counts as an exact
/// intersection direction, and the matching R-diagonal drop threshold for the
/// join rank; `JOIN_DROP ≈ sin(acos(MEET_COS))/√2` keeps the two decisions
/// consistent.
const MEET_COS: f64 = 1.0 - 1e-10;
const JOIN_DROP: f64 = 1e-5;

/// An element `p` with `p = p* = p²` (within tolerance at construction).
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    el: Element,
}

impl serde::Serialize for Projection {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.el.serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for Projection {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let el = Element::deserialize(deserializer)?;
        Projection::try_new(el, 1e-8).map_err(serde::de::Error::custom)
    }
}

impl Projection {
    /// Validate the projection identities before wrapping.
    pub fn try_new(el: Element, tol: f64) -> Result<Self> {
        let adj_residual = el.sub(&el.adjoint())?.norm_op();
        let idem_residual = el.mul(&el)?.sub(&el)?.norm_op();
        if adj_residual > tol || idem_residual > tol {
            return Err(Error::InvalidArgument(format!(
                "not a projection: ‖p−p*‖={adj_residual:.3e}, ‖p²−p‖={idem_residual:.3e}, tol={tol:.3e}"
            )));
        }
        Ok(Projection { el })
    }

    /// Wrap a matrix built as `Σ v v*` over orthonormal columns; the identities
    /// hold by construction.
    pub(crate) fn from_trusted(el: Element) -> Self {
        Projection { el }
    }

    pub fn zero(shape: &Arc<AlgebraShape>) -> Self {
        Projection {
            el: Element::zeros(shape),
        }
    }

    pub fn identity(shape: &Arc<AlgebraShape>) -> Self {
        Projection {
            el: Element::identity(shape),
        }
    }

    pub fn element(&self) -> &Element {
        &self.el
    }

    pub fn into_element(self) -> Element {
        self.el
    }

    pub fn shape(&self) -> &Arc<AlgebraShape> {
        self.el.shape()
    }

    /// `τ(p)`, real by selfadjointness.
    pub fn trace(&self) -> f64 {
        self.el.trace().re
    }

    /// `1 − p`.
    pub fn complement(&self) -> Projection {
        let one = Element::identity(self.el.shape());
        Projection {
            el: one.sub(&self.el).expect("same shape"),
        }
    }

    /// Closure of the projection. In finite dimensions every projection is
    /// both open and closed, so this is the identity map; it exists so code
    /// tracking open/closed bookkeeping reads literally.
    pub fn closure(&self) -> Projection {
        self.clone()
    }

    /// `‖pq‖_∞ ≤ tol` (equivalently `qp = 0` for selfadjoint idempotents).
    pub fn is_orthogonal_to(&self, other: &Projection, tol: f64) -> bool {
        match self.el.mul(&other.el) {
            Ok(prod) => prod.norm_op() <= tol,
            Err(_) => false,
        }
    }

    /// `p ≤ q` within tolerance: `‖p − qp‖_∞ ≤ tol`.
    pub fn is_below(&self, other: &Projection, tol: f64) -> bool {
        match other.el.mul(&self.el) {
            Ok(qp) => match self.el.sub(&qp) {
                Ok(d) => d.norm_op() <= tol,
                Err(_) => false,
            },
            Err(_) => false,
        }
    }

    /// Lattice meet `p ∧ q`: projection onto `range(p) ∩ range(q)`, computed
    /// blockwise from the principal angles between orthonormal range bases.
    pub fn meet(&self, other: &Projection) -> Result<Projection> {
        super::shape::check_same_shape(self.el.shape(), other.el.shape())?;
        match (&self.el.data, &other.el.data) {
            (BlockData::Diag(a), BlockData::Diag(b)) => {
                let diag = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| {
                        if x.re > 0.5 && y.re > 0.5 {
                            Complex64::ONE
                        } else {
                            Complex64::ZERO
                        }
                    })
                    .collect();
                Ok(Projection::from_trusted(Element::from_diagonal(
                    self.el.shape(),
                    diag,
                )?))
            }
            _ => {
                let pa = self.el.blocks_dense();
                let pb = other.el.blocks_dense();
                let mut blocks = Vec::with_capacity(pa.len());
                for (j, (a, b)) in pa.iter().zip(&pb).enumerate() {
                    blocks.push(meet_block(j, a, b)?);
                }
                Ok(Projection::from_trusted(Element::from_blocks(
                    self.el.shape(),
                    blocks,
                )?))
            }
        }
    }

    /// Lattice join `p ∨ q`: projection onto `range(p) + range(q)`, via a
    /// rank-revealing QR of the stacked range bases.
    pub fn join(&self, other: &Projection) -> Result<Projection> {
        super::shape::check_same_shape(self.el.shape(), other.el.shape())?;
        match (&self.el.data, &other.el.data) {
            (BlockData::Diag(a), BlockData::Diag(b)) => {
                let diag = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| {
                        if x.re > 0.5 || y.re > 0.5 {
                            Complex64::ONE
                        } else {
                            Complex64::ZERO
                        }
                    })
                    .collect();
                Ok(Projection::from_trusted(Element::from_diagonal(
                    self.el.shape(),
                    diag,
                )?))
            }
            _ => {
                let pa = self.el.blocks_dense();
                let pb = other.el.blocks_dense();
                let mut blocks = Vec::with_capacity(pa.len());
                for (a, b) in pa.iter().zip(&pb) {
                    blocks.push(join_block(a, b));
                }
                Ok(Projection::from_trusted(Element::from_blocks(
                    self.el.shape(),
                    blocks,
                )?))
            }
        }
    }

    /// `⋁_k p_k`.
    pub fn join_all(shape: &Arc<AlgebraShape>, ps: &[Projection]) -> Result<Projection> {
        let mut acc = Projection::zero(shape);
        for p in ps {
            acc = acc.join(p)?;
        }
        Ok(acc)
    }
}

/// Orthonormal basis of the range of a (numerical) projection matrix. The
/// rank of a validated projection is its trace, so the basis is the first
/// `rank` pivoted columns of a column-pivoted QR.
fn range_basis(p: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = p.nrows();
    if n == 0 {
        return p.clone();
    }
    let rank = p.trace().re.round().max(0.0) as usize;
    let rank = rank.min(n);
    let qr = p.clone().col_piv_qr();
    let q = qr.q();
    q.columns(0, rank.min(q.ncols())).into_owned()
}

fn meet_block(
    j: usize,
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    let n = a.nrows();
    let ua = range_basis(a);
    let ub = range_basis(b);
    if ua.ncols() == 0 || ub.ncols() == 0 {
        return Ok(DMatrix::zeros(n, n));
    }
    let m = ua.adjoint() * &ub;
    let svd = m
        .try_svd(true, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric {
            block: j,
            message: "principal-angle SVD did not converge".into(),
        })?;
    let u = svd.u.as_ref().expect("u requested");
    let mut meet = DMatrix::zeros(n, n);
    for i in 0..svd.singular_values.len() {
        if svd.singular_values[i] >= MEET_COS {
            let w = &ua * u.column(i);
            meet += &w * w.adjoint();
        }
    }
    Ok(meet)
}

fn join_block(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    let ua = range_basis(a);
    let ub = range_basis(b);
    let cols = ua.ncols() + ub.ncols();
    if cols == 0 {
        return DMatrix::zeros(n, n);
    }
    let mut stacked = DMatrix::zeros(n, cols);
    stacked.columns_mut(0, ua.ncols()).copy_from(&ua);
    stacked.columns_mut(ua.ncols(), ub.ncols()).copy_from(&ub);
    let qr = stacked.col_piv_qr();
    let r = qr.r();
    let rank = (0..r.nrows().min(r.ncols()))
        .take_while(|&i| r[(i, i)].norm() > JOIN_DROP)
        .count();
    let q = qr.q();
    let basis = q.columns(0, rank);
    basis * basis.adjoint()
}

/// Orthogonality of elements: `ab* = 0 = a*b` within a relative tolerance.
pub fn is_orthogonal_elements(a: &Element, b: &Element, tol: f64) -> Result<bool> {
    let scale = a.norm_op() * b.norm_op();
    let ab = a.mul(&b.adjoint())?;
    if ab.norm_op() > tol * scale.max(1e-300) {
        return Ok(false);
    }
    let ab2 = a.adjoint().mul(b)?;
    Ok(ab2.norm_op() <= tol * scale.max(1e-300))
}
