//! Spectral operations: singular values, Schatten norms, polar decomposition,
//! spectral projections, sign decompositions.
//!
//! Dense blocks go through nalgebra's SVD / Hermitian eigendecomposition;
//! diagonal storage short-circuits to scalar arithmetic.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::element::{BlockData, Element};
use super::projection::Projection;
use crate::error::{Error, Result};
use crate::tol;

/// Tie-breaking mode for spectral thresholds. The strict mode realizes
/// `χ_{]ε,∞[}`, the inclusive one `χ_{[ε,∞[}`; both shift the cut by
/// `±1e-12 · ‖x‖_∞` so that eigenvalues numerically *at* the threshold land on
/// the documented side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    StrictAbove,
    AtOrAbove,
}

/// Polar data of an element: `x = u·|x|` with `u` the partial isometry
/// vanishing on `ker|x|`, so `u*u` is the support of `|x|` and `uu*` the
/// support of `|x*|`.
#[derive(Debug, Clone)]
pub struct Polar {
    pub partial_isometry: Element,
    pub abs: Element,
    pub right_support: Projection,
    pub left_support: Projection,
}

fn block_svd(
    j: usize,
    m: &DMatrix<Complex64>,
) -> Result<(DMatrix<Complex64>, DVector<f64>, DMatrix<Complex64>)> {
    let svd = m
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric {
            block: j,
            message: "SVD did not converge".into(),
        })?;
    Ok((svd.u.unwrap(), svd.singular_values, svd.v_t.unwrap()))
}

fn block_singular_values(j: usize, m: &DMatrix<Complex64>) -> Result<DVector<f64>> {
    let svd = m
        .clone()
        .try_svd(false, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric {
            block: j,
            message: "SVD did not converge".into(),
        })?;
    Ok(svd.singular_values)
}

impl Element {
    /// All singular values together with the trace weight of their block.
    pub fn weighted_singular_values(&self) -> Result<Vec<(f64, f64)>> {
        match &self.data {
            BlockData::Diag(d) => Ok(d
                .iter()
                .zip(self.shape().trace_weights())
                .map(|(z, &w)| (z.norm(), w))
                .collect()),
            BlockData::Dense(bs) => {
                let mut out = Vec::with_capacity(self.shape().total_dim());
                for (j, (b, &w)) in bs.iter().zip(self.shape().trace_weights()).enumerate() {
                    for &s in block_singular_values(j, b)?.iter() {
                        out.push((s, w));
                    }
                }
                Ok(out)
            }
        }
    }

    /// Weighted Schatten norm `τ(|x|^p)^{1/p}`; `p = ∞` is the operator norm.
    pub fn schatten_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "schatten norm requires p >= 1 or p = inf, got {p}"
            )));
        }
        let sv = self.weighted_singular_values()?;
        if p.is_infinite() {
            return Ok(sv.into_iter().map(|(s, _)| s).fold(0.0, f64::max));
        }
        if p == 1.0 {
            return Ok(sv.into_iter().map(|(s, w)| s * w).sum());
        }
        Ok(sv
            .into_iter()
            .map(|(s, w)| w * s.powf(p))
            .sum::<f64>()
            .powf(1.0 / p))
    }

    /// Trace norm `τ(|x|)`.
    pub fn norm_l1(&self) -> f64 {
        match &self.data {
            BlockData::Diag(d) => d
                .iter()
                .zip(self.shape().trace_weights())
                .map(|(z, &w)| z.norm() * w)
                .sum(),
            BlockData::Dense(_) => self
                .schatten_norm(1.0)
                .expect("trace norm of a conforming element"),
        }
    }

    /// Operator norm.
    pub fn norm_op(&self) -> f64 {
        match &self.data {
            BlockData::Diag(d) => d.iter().map(|z| z.norm()).fold(0.0, f64::max),
            BlockData::Dense(_) => self
                .schatten_norm(f64::INFINITY)
                .expect("operator norm of a conforming element"),
        }
    }

    /// Polar decomposition `x = u|x|` with the partial-isometry convention.
    pub fn abs_polar(&self) -> Result<Polar> {
        match &self.data {
            BlockData::Diag(d) => {
                let max = d.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let cutoff = max * tol::RANK_CUTOFF;
                let mut u = Vec::with_capacity(d.len());
                let mut abs = Vec::with_capacity(d.len());
                let mut supp = Vec::with_capacity(d.len());
                for &z in d {
                    let r = z.norm();
                    if r > cutoff {
                        u.push(z / r);
                        supp.push(Complex64::ONE);
                    } else {
                        u.push(Complex64::ZERO);
                        supp.push(Complex64::ZERO);
                    }
                    abs.push(Complex64::new(r, 0.0));
                }
                let shape = self.shape();
                let support = Projection::from_trusted(Element::from_diagonal(shape, supp)?);
                Ok(Polar {
                    partial_isometry: Element::from_diagonal(shape, u)?,
                    abs: Element::from_diagonal(shape, abs)?,
                    right_support: support.clone(),
                    left_support: support,
                })
            }
            BlockData::Dense(bs) => {
                let mut svds = Vec::with_capacity(bs.len());
                let mut max_sigma: f64 = 0.0;
                for (j, b) in bs.iter().enumerate() {
                    let svd = block_svd(j, b)?;
                    max_sigma = max_sigma.max(svd.1.max());
                    svds.push(svd);
                }
                let max_dim = self.shape().block_dims().iter().copied().max().unwrap_or(1);
                let cutoff = max_sigma * tol::RANK_CUTOFF * max_dim as f64;
                let mut u_blocks = Vec::with_capacity(bs.len());
                let mut abs_blocks = Vec::with_capacity(bs.len());
                let mut right_blocks = Vec::with_capacity(bs.len());
                let mut left_blocks = Vec::with_capacity(bs.len());
                for (u, sigma, v_t) in &svds {
                    let n = u.nrows();
                    let v = v_t.adjoint();
                    // |x| = V Σ V*
                    let mut abs_b = DMatrix::zeros(n, n);
                    let mut u_b = DMatrix::zeros(n, n);
                    let mut right_b = DMatrix::zeros(n, n);
                    let mut left_b = DMatrix::zeros(n, n);
                    for i in 0..sigma.len() {
                        let vi = v.column(i);
                        let scaled = vi * Complex64::new(sigma[i], 0.0);
                        abs_b += scaled * vi.adjoint();
                        if sigma[i] > cutoff {
                            let ui = u.column(i);
                            u_b += ui * vi.adjoint();
                            right_b += vi * vi.adjoint();
                            left_b += ui * ui.adjoint();
                        }
                    }
                    u_blocks.push(u_b);
                    abs_blocks.push(abs_b);
                    right_blocks.push(right_b);
                    left_blocks.push(left_b);
                }
                let shape = self.shape();
                Ok(Polar {
                    partial_isometry: Element::from_blocks(shape, u_blocks)?,
                    abs: Element::from_blocks(shape, abs_blocks)?,
                    right_support: Projection::from_trusted(Element::from_blocks(
                        shape,
                        right_blocks,
                    )?),
                    left_support: Projection::from_trusted(Element::from_blocks(
                        shape,
                        left_blocks,
                    )?),
                })
            }
        }
    }

    /// Eigenvalues of a selfadjoint element with their block weights.
    pub fn weighted_eigenvalues(&self) -> Result<Vec<(f64, f64)>> {
        self.require_selfadjoint()?;
        match &self.data {
            BlockData::Diag(d) => Ok(d
                .iter()
                .zip(self.shape().trace_weights())
                .map(|(z, &w)| (z.re, w))
                .collect()),
            BlockData::Dense(bs) => {
                let mut out = Vec::with_capacity(self.shape().total_dim());
                for (j, (b, &w)) in bs.iter().zip(self.shape().trace_weights()).enumerate() {
                    let h = symmetrize(b);
                    let eig =
                        nalgebra::SymmetricEigen::try_new(h, f64::EPSILON, 0).ok_or_else(|| {
                            Error::Numeric {
                                block: j,
                                message: "Hermitian eigensolver did not converge".into(),
                            }
                        })?;
                    for &l in eig.eigenvalues.iter() {
                        out.push((l, w));
                    }
                }
                Ok(out)
            }
        }
    }

    fn require_selfadjoint(&self) -> Result<()> {
        let residual = self.selfadjoint_residual();
        let bound = tol::scaled(self.norm_op(), self.shape().total_dim()) * 10.0;
        if residual > bound {
            return Err(Error::NotSelfadjoint {
                residual,
                tol: bound,
            });
        }
        Ok(())
    }

    /// Spectral projection of a selfadjoint element onto eigenvalues above the
    /// threshold; commutes with the element by construction.
    pub fn spectral_projection(&self, threshold: f64, mode: ThresholdMode) -> Result<Projection> {
        self.require_selfadjoint()?;
        let shift = tol::SPECTRAL_TIE * self.norm_op();
        let keep = |l: f64| match mode {
            ThresholdMode::StrictAbove => l > threshold + shift,
            ThresholdMode::AtOrAbove => l >= threshold - shift,
        };
        match &self.data {
            BlockData::Diag(d) => {
                let diag = d
                    .iter()
                    .map(|z| {
                        if keep(z.re) {
                            Complex64::ONE
                        } else {
                            Complex64::ZERO
                        }
                    })
                    .collect();
                Ok(Projection::from_trusted(Element::from_diagonal(
                    self.shape(),
                    diag,
                )?))
            }
            BlockData::Dense(bs) => {
                let mut blocks = Vec::with_capacity(bs.len());
                for (j, b) in bs.iter().enumerate() {
                    let n = b.nrows();
                    let h = symmetrize(b);
                    let eig =
                        nalgebra::SymmetricEigen::try_new(h, f64::EPSILON, 0).ok_or_else(|| {
                            Error::Numeric {
                                block: j,
                                message: "Hermitian eigensolver did not converge".into(),
                            }
                        })?;
                    let mut p = DMatrix::zeros(n, n);
                    for i in 0..n {
                        if keep(eig.eigenvalues[i]) {
                            let vi = eig.eigenvectors.column(i);
                            p += vi * vi.adjoint();
                        }
                    }
                    blocks.push(p);
                }
                Ok(Projection::from_trusted(Element::from_blocks(
                    self.shape(),
                    blocks,
                )?))
            }
        }
    }

    /// Decompose a selfadjoint element as `x = pos − neg` with both parts
    /// positive and with orthogonal supports.
    pub fn selfadjoint_parts(&self) -> Result<(Element, Element)> {
        self.require_selfadjoint()?;
        match &self.data {
            BlockData::Diag(d) => {
                let pos = d
                    .iter()
                    .map(|z| Complex64::new(z.re.max(0.0), 0.0))
                    .collect();
                let neg = d
                    .iter()
                    .map(|z| Complex64::new((-z.re).max(0.0), 0.0))
                    .collect();
                Ok((
                    Element::from_diagonal(self.shape(), pos)?,
                    Element::from_diagonal(self.shape(), neg)?,
                ))
            }
            BlockData::Dense(bs) => {
                let mut pos_blocks = Vec::with_capacity(bs.len());
                let mut neg_blocks = Vec::with_capacity(bs.len());
                for (j, b) in bs.iter().enumerate() {
                    let n = b.nrows();
                    let h = symmetrize(b);
                    let eig =
                        nalgebra::SymmetricEigen::try_new(h, f64::EPSILON, 0).ok_or_else(|| {
                            Error::Numeric {
                                block: j,
                                message: "Hermitian eigensolver did not converge".into(),
                            }
                        })?;
                    let mut pos = DMatrix::zeros(n, n);
                    let mut neg = DMatrix::zeros(n, n);
                    for i in 0..n {
                        let l = eig.eigenvalues[i];
                        let vi = eig.eigenvectors.column(i);
                        if l > 0.0 {
                            pos += vi * vi.adjoint() * Complex64::new(l, 0.0);
                        } else if l < 0.0 {
                            neg += vi * vi.adjoint() * Complex64::new(-l, 0.0);
                        }
                    }
                    pos_blocks.push(pos);
                    neg_blocks.push(neg);
                }
                Ok((
                    Element::from_blocks(self.shape(), pos_blocks)?,
                    Element::from_blocks(self.shape(), neg_blocks)?,
                ))
            }
        }
    }

    /// Sign function of a selfadjoint element (zero on the kernel). For a
    /// selfadjoint density `d` this is the norming contraction with
    /// `τ(d · sign d) = ‖d‖₁`.
    pub fn sign_unitary(&self) -> Result<Element> {
        self.require_selfadjoint()?;
        let cutoff = self.norm_op() * tol::RANK_CUTOFF;
        match &self.data {
            BlockData::Diag(d) => {
                let s = d
                    .iter()
                    .map(|z| {
                        if z.re > cutoff {
                            Complex64::ONE
                        } else if z.re < -cutoff {
                            -Complex64::ONE
                        } else {
                            Complex64::ZERO
                        }
                    })
                    .collect();
                Element::from_diagonal(self.shape(), s)
            }
            BlockData::Dense(bs) => {
                let mut blocks = Vec::with_capacity(bs.len());
                for (j, b) in bs.iter().enumerate() {
                    let n = b.nrows();
                    let h = symmetrize(b);
                    let eig =
                        nalgebra::SymmetricEigen::try_new(h, f64::EPSILON, 0).ok_or_else(|| {
                            Error::Numeric {
                                block: j,
                                message: "Hermitian eigensolver did not converge".into(),
                            }
                        })?;
                    let mut s = DMatrix::zeros(n, n);
                    for i in 0..n {
                        let l = eig.eigenvalues[i];
                        if l.abs() > cutoff {
                            let vi = eig.eigenvectors.column(i);
                            s += vi * vi.adjoint() * Complex64::new(l.signum(), 0.0);
                        }
                    }
                    blocks.push(s);
                }
                Element::from_blocks(self.shape(), blocks)
            }
        }
    }

    /// Contraction `y` with `τ(xy) = ‖x‖₁` (from the singular vectors).
    pub fn norming_contraction(&self) -> Result<Element> {
        match &self.data {
            BlockData::Diag(d) => {
                let y = d
                    .iter()
                    .map(|z| {
                        let r = z.norm();
                        if r > 0.0 {
                            (z / r).conj()
                        } else {
                            Complex64::ZERO
                        }
                    })
                    .collect();
                Element::from_diagonal(self.shape(), y)
            }
            BlockData::Dense(bs) => {
                let mut blocks = Vec::with_capacity(bs.len());
                for (j, b) in bs.iter().enumerate() {
                    // x = UΣV*, so τ(x · VU*) = Σ singular values.
                    let (u, _, v_t) = block_svd(j, b)?;
                    blocks.push(v_t.adjoint() * u.adjoint());
                }
                Element::from_blocks(self.shape(), blocks)
            }
        }
    }

    /// Minimum eigenvalue of a selfadjoint element.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self
            .weighted_eigenvalues()?
            .into_iter()
            .map(|(l, _)| l)
            .fold(f64::INFINITY, f64::min))
    }

    /// Positive within tolerance: selfadjoint and `λ_min ≥ −tol·max(1,‖x‖)`.
    pub fn is_positive(&self, tol: f64) -> bool {
        if !self.is_selfadjoint(tol) {
            return false;
        }
        match self.min_eigenvalue() {
            Ok(l) => l >= -tol * self.norm_op().max(1.0),
            Err(_) => false,
        }
    }
}

pub(crate) fn symmetrize(b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (b + b.adjoint()).map(|z| z * 0.5)
}
