//! Normal functionals represented by their densities: `φ_D(y) = τ(Dy)`.
//!
//! The map `D ↦ φ_D` is an isometry from the trace-norm ideal onto the
//! predual, so `‖φ‖ = ‖D‖₁`. Polar data and both support projections are
//! computed eagerly at construction; every procedure downstream consults them
//! repeatedly.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::sync::Arc;

use crate::algebra::{is_orthogonal_elements, AlgebraShape, Element, Polar, Projection};
use crate::error::{Error, Result};

/// Which module action to apply: `aφ: x ↦ φ(xa)` (density `a·D`) or
/// `φa: x ↦ φ(ax)` (density `D·a`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Left and right support projections of a functional: the range projections
/// of `|D*|` and `|D|` respectively, so `left·D = D = D·right`.
#[derive(Debug, Clone)]
pub struct SupportPair {
    pub left: Projection,
    pub right: Projection,
}

/// A normal functional with eagerly cached polar data.
#[derive(Debug, Clone)]
pub struct Functional {
    density: Element,
    norm: f64,
    polar: Polar,
}

impl Functional {
    /// Wrap a density; computes `‖D‖₁`, the polar decomposition and both
    /// supports once.
    pub fn from_density(density: Element) -> Result<Functional> {
        let polar = density.abs_polar()?;
        let norm = polar.abs.trace().re;
        Ok(Functional {
            density,
            norm,
            polar,
        })
    }

    pub fn zero(shape: &Arc<AlgebraShape>) -> Functional {
        Functional::from_density(Element::zeros(shape)).expect("zero density")
    }

    pub fn density(&self) -> &Element {
        &self.density
    }

    pub fn shape(&self) -> &Arc<AlgebraShape> {
        self.density.shape()
    }

    /// `‖φ‖ = ‖D‖₁`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// The phase `u` of the polar decomposition `D = u|D|`.
    pub fn phase(&self) -> &Element {
        &self.polar.partial_isometry
    }

    /// Density of `|φ|`.
    pub fn abs_density(&self) -> &Element {
        &self.polar.abs
    }

    /// `φ(y) = τ(Dy)`.
    pub fn evaluate(&self, y: &Element) -> Result<Complex64> {
        Ok(self.density.mul(y)?.trace())
    }

    /// `|φ|(p)` for a projection, real and in `[0, ‖φ‖]` up to numerics.
    pub fn abs_mass(&self, p: &Projection) -> Result<f64> {
        Ok(self.polar.abs.mul(p.element())?.trace().re)
    }

    /// Module action `aφ` (left) or `φa` (right).
    pub fn act(&self, a: &Element, side: Side) -> Result<Functional> {
        let density = match side {
            Side::Left => a.mul(&self.density)?,
            Side::Right => self.density.mul(a)?,
        };
        Functional::from_density(density)
    }

    /// Two-sided compression `l φ r` with density `l·D·r`.
    pub fn compress(&self, l: &Projection, r: &Projection) -> Result<Functional> {
        Functional::from_density(l.element().mul(&self.density)?.mul(r.element())?)
    }

    /// `|φ|` as a functional (density `|D|`).
    pub fn abs(&self) -> Result<Functional> {
        Functional::from_density(self.polar.abs.clone())
    }

    /// `φ*` (density `D*`).
    pub fn adjoint(&self) -> Result<Functional> {
        Functional::from_density(self.density.adjoint())
    }

    /// `|φ*|` (density `|D*| = u|D|u*`).
    pub fn abs_adjoint(&self) -> Result<Functional> {
        let u = &self.polar.partial_isometry;
        Functional::from_density(u.mul(&self.polar.abs)?.mul(&u.adjoint())?)
    }

    /// `(|φ|, φ*, |φ*|)` in one call.
    pub fn abs_and_adjoint(&self) -> Result<(Functional, Functional, Functional)> {
        Ok((self.abs()?, self.adjoint()?, self.abs_adjoint()?))
    }

    /// Right support = support of `|φ|`, left support = support of `|φ*|`.
    pub fn supports(&self) -> SupportPair {
        SupportPair {
            left: self.polar.left_support.clone(),
            right: self.polar.right_support.clone(),
        }
    }

    pub fn right_support(&self) -> &Projection {
        &self.polar.right_support
    }

    pub fn left_support(&self) -> &Projection {
        &self.polar.left_support
    }

    /// `φ/‖φ‖`; near-zero functionals are rejected rather than normalized.
    pub fn normalized(&self) -> Result<Functional> {
        let cutoff = 1e-12 * self.shape().tau_unit();
        if self.norm < cutoff {
            return Err(Error::NearZero {
                norm: self.norm,
                cutoff,
            });
        }
        Functional::from_density(self.density.scale(1.0 / self.norm))
    }

    pub fn scale(&self, s: f64) -> Result<Functional> {
        Functional::from_density(self.density.scale(s))
    }

    pub fn scale_complex(&self, s: Complex64) -> Result<Functional> {
        Functional::from_density(self.density.scale_complex(s))
    }

    pub fn add(&self, other: &Functional) -> Result<Functional> {
        Functional::from_density(self.density.add(&other.density)?)
    }

    pub fn sub(&self, other: &Functional) -> Result<Functional> {
        Functional::from_density(self.density.sub(&other.density)?)
    }

    /// `‖φ − ψ‖`.
    pub fn distance(&self, other: &Functional) -> Result<f64> {
        Ok(self.density.sub(&other.density)?.norm_l1())
    }

    /// Positive within tolerance: the density is selfadjoint PSD.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.density.is_positive(tol)
    }

    /// Orthogonality of functionals: orthogonal right supports *and*
    /// orthogonal left supports. The density-product test is equivalent and
    /// exposed as [`Functional::densities_orthogonal`] for cross-checks.
    pub fn are_orthogonal(&self, other: &Functional, tol: f64) -> bool {
        self.polar
            .right_support
            .is_orthogonal_to(&other.polar.right_support, tol)
            && self
                .polar
                .left_support
                .is_orthogonal_to(&other.polar.left_support, tol)
    }

    /// Density-product orthogonality test on the raw densities.
    pub fn densities_orthogonal(&self, other: &Functional, tol: f64) -> Result<bool> {
        is_orthogonal_elements(&self.density, &other.density, tol)
    }
}

// Serialization: the density JSON extended with a "norm" field:
// {"dims": [...], "weights": [...], "blocks": [...], "norm": float}

impl Serialize for Functional {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            #[serde(flatten)]
            density: &'a Element,
            norm: f64,
        }
        Repr {
            density: &self.density,
            norm: self.norm,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Functional {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            #[serde(flatten)]
            density: Element,
            #[serde(rename = "norm")]
            _norm: f64,
        }
        let repr = Repr::deserialize(deserializer)?;
        Functional::from_density(repr.density).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random_suite, ElementKind};
    use nalgebra::DMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn m2() -> Arc<AlgebraShape> {
        AlgebraShape::new(vec![2], vec![1.0]).unwrap()
    }

    #[test]
    fn trace_state_has_norm_one() {
        let shape = AlgebraShape::new(vec![2, 3], vec![1.0, 2.0]).unwrap();
        let d = Element::identity(&shape).scale(1.0 / shape.tau_unit());
        let phi = Functional::from_density(d).unwrap();
        assert!((phi.norm() - 1.0).abs() < 1e-12);
        let zero = Functional::zero(&shape);
        assert_eq!(zero.norm(), 0.0);
        assert!(zero.normalized().is_err());
    }

    #[test]
    fn evaluation_matches_trace_of_product() {
        let shape = AlgebraShape::new(vec![3], vec![0.5]).unwrap();
        let d = random_suite(&shape, ElementKind::Generic, 1);
        let y = random_suite(&shape, ElementKind::Generic, 2);
        let phi = Functional::from_density(d.clone()).unwrap();
        let direct = d.mul(&y).unwrap().trace();
        assert!((phi.evaluate(&y).unwrap() - direct).norm() < 1e-12);
    }

    #[test]
    fn module_actions() {
        let shape = AlgebraShape::new(vec![2, 2], vec![1.0, 0.5]).unwrap();
        let phi = Functional::from_density(random_suite(&shape, ElementKind::Generic, 3)).unwrap();
        let a = random_suite(&shape, ElementKind::Generic, 4);
        let y = random_suite(&shape, ElementKind::Generic, 5);

        // identity acts trivially
        let one = Element::identity(&shape);
        let same = phi.act(&one, Side::Left).unwrap();
        assert!(same.distance(&phi).unwrap() < 1e-12);

        // (aφ)(y) = φ(ya)
        let left = phi.act(&a, Side::Left).unwrap();
        let via_def = phi.evaluate(&y.mul(&a).unwrap()).unwrap();
        assert!((left.evaluate(&y).unwrap() - via_def).norm() < 1e-10);

        // (φa)(y) = φ(ay)
        let right = phi.act(&a, Side::Right).unwrap();
        let via_def = phi.evaluate(&a.mul(&y).unwrap()).unwrap();
        assert!((right.evaluate(&y).unwrap() - via_def).norm() < 1e-10);

        // module action composes: a(bφ) = (ab)φ
        let b = random_suite(&shape, ElementKind::Generic, 6);
        let lhs = phi
            .act(&b, Side::Left)
            .unwrap()
            .act(&a, Side::Left)
            .unwrap();
        let rhs = phi.act(&a.mul(&b).unwrap(), Side::Left).unwrap();
        assert!(lhs.distance(&rhs).unwrap() < 1e-10);
    }

    #[test]
    fn support_reproduces() {
        let shape = m2();
        let phi = Functional::from_density(random_suite(&shape, ElementKind::Generic, 7)).unwrap();
        let r = phi.right_support().clone();
        let reproduced = phi.act(r.element(), Side::Right).unwrap();
        assert!(reproduced.distance(&phi).unwrap() < 1e-10);
        let l = phi.left_support().clone();
        let reproduced = phi.act(l.element(), Side::Left).unwrap();
        assert!(reproduced.distance(&phi).unwrap() < 1e-10);
    }

    #[test]
    fn abs_and_adjoint_relations() {
        let shape = m2();
        // selfadjoint positive density: |φ| = φ = φ*
        let pos = random_suite(&shape, ElementKind::Positive, 8);
        let phi = Functional::from_density(pos).unwrap();
        let (a, s, sa) = phi.abs_and_adjoint().unwrap();
        assert!(a.distance(&phi).unwrap() < 1e-9);
        assert!(s.distance(&phi).unwrap() < 1e-9);
        assert!(sa.distance(&phi).unwrap() < 1e-9);

        // D = diag(1,-1)/2: |φ| has density diag(1,1)/2, norm 1
        let d = Element::from_blocks(
            &shape,
            vec![DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                c(0.5, 0.0),
                c(-0.5, 0.0),
            ]))],
        )
        .unwrap();
        let phi = Functional::from_density(d).unwrap();
        assert!((phi.norm() - 1.0).abs() < 1e-12);
        let half_one = Element::identity(&shape).scale(0.5);
        assert!(
            phi.abs()
                .unwrap()
                .density()
                .sub(&half_one)
                .unwrap()
                .norm_op()
                < 1e-12
        );

        // |φ|(1) = ‖φ‖ and reconstruction φ = u|φ|, |φ| = u*φ
        let phi = Functional::from_density(random_suite(&shape, ElementKind::Generic, 9)).unwrap();
        let one = Element::identity(&shape);
        assert!((phi.abs().unwrap().evaluate(&one).unwrap().re - phi.norm()).abs() < 1e-10);
        let u = phi.phase().clone();
        let rec = u.mul(phi.abs().unwrap().density()).unwrap();
        assert!(rec.sub(phi.density()).unwrap().norm_l1() < 1e-9);
        let abs_rec = u.adjoint().mul(phi.density()).unwrap();
        assert!(abs_rec.sub(phi.abs().unwrap().density()).unwrap().norm_l1() < 1e-9);
    }

    #[test]
    fn supports_of_matrix_unit() {
        let shape = m2();
        let e12 = Element::matrix_unit(&shape, 0, 0, 1).unwrap();
        let phi = Functional::from_density(e12).unwrap();
        let e11 = Element::matrix_unit(&shape, 0, 0, 0).unwrap();
        let e22 = Element::matrix_unit(&shape, 0, 1, 1).unwrap();
        assert!(phi.left_support().element().sub(&e11).unwrap().norm_op() < 1e-12);
        assert!(phi.right_support().element().sub(&e22).unwrap().norm_op() < 1e-12);

        // invertible density: both supports are the identity
        let invertible = random_suite(&shape, ElementKind::Positive, 10)
            .add(&Element::identity(&shape))
            .unwrap();
        let phi = Functional::from_density(invertible).unwrap();
        assert!((phi.right_support().trace() - 2.0).abs() < 1e-9);
        assert!((phi.left_support().trace() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn support_rank_matches_planted_rank() {
        let shape = AlgebraShape::new(vec![4], vec![1.0]).unwrap();
        for rank in 1..=4usize {
            // rank-k density from a sum of k matrix units rotated by a unitary
            let mut d = Element::zeros(&shape);
            for i in 0..rank {
                let unit = Element::matrix_unit(&shape, 0, i, i).unwrap();
                d = d.add(&unit.scale(1.0 + i as f64)).unwrap();
            }
            let u = random_suite(&shape, ElementKind::Unitary, rank as u64);
            let rotated = u.mul(&d).unwrap().mul(&u.adjoint()).unwrap();
            let phi = Functional::from_density(rotated).unwrap();
            assert!(
                (phi.right_support().trace() - rank as f64).abs() < 1e-9,
                "rank {rank}"
            );
        }
    }

    #[test]
    fn orthogonality_of_functionals() {
        let shape = AlgebraShape::new(vec![2, 2], vec![1.0, 1.0]).unwrap();
        // densities living in different blocks
        let mut d1 = Element::zeros(&shape);
        let mut d2 = Element::zeros(&shape);
        if let crate::algebra::element::BlockData::Dense(bs) = &mut d1.data {
            bs[0][(0, 1)] = c(1.0, 2.0);
        }
        if let crate::algebra::element::BlockData::Dense(bs) = &mut d2.data {
            bs[1][(1, 0)] = c(0.5, -1.0);
        }
        let phi = Functional::from_density(d1).unwrap();
        let psi = Functional::from_density(d2).unwrap();
        assert!(phi.are_orthogonal(&psi, 1e-10));
        assert!(phi.densities_orthogonal(&psi, 1e-10).unwrap());
        assert!(!phi.are_orthogonal(&phi, 1e-10));

        // orthogonal positive pair: ‖φ−ψ‖ = ‖φ‖+‖ψ‖
        let p1 =
            Functional::from_density(Element::matrix_unit(&shape, 0, 0, 0).unwrap().scale(0.7))
                .unwrap();
        let p2 =
            Functional::from_density(Element::matrix_unit(&shape, 1, 1, 1).unwrap().scale(1.3))
                .unwrap();
        assert!(p1.are_orthogonal(&p2, 1e-12));
        let diff = p1.distance(&p2).unwrap();
        assert!((diff - (p1.norm() + p2.norm())).abs() < 1e-9);
    }

    #[test]
    fn functional_json_round_trip() {
        let shape = m2();
        let phi = Functional::from_density(random_suite(&shape, ElementKind::Generic, 11)).unwrap();
        let json = serde_json::to_string(&phi).unwrap();
        assert!(json.contains("\"norm\""));
        let back: Functional = serde_json::from_str(&json).unwrap();
        assert_eq!(phi.density().blocks_dense(), back.density().blocks_dense());
        assert!((phi.norm() - back.norm()).abs() < 1e-12);
    }
}
