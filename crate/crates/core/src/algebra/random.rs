//! Seeded random elements for the property suites.
//!
//! Deterministic: the same seed always produces the same element, bit for bit.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::sync::Arc;

use super::element::Element;
use super::shape::AlgebraShape;

/// What to sample: generic complex Gaussian entries, symmetrized, squared,
/// a range projection of random rank, or an orthonormalized unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Generic,
    Selfadjoint,
    Positive,
    Projection,
    Unitary,
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

fn generic_block(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |_, _| gaussian(rng))
}

/// Deterministic random element of the requested kind.
pub fn random_suite(shape: &Arc<AlgebraShape>, kind: ElementKind, seed: u64) -> Element {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if shape.is_diagonal() {
        let diag = shape
            .block_dims()
            .iter()
            .map(|_| match kind {
                ElementKind::Generic => gaussian(&mut rng),
                ElementKind::Selfadjoint => {
                    Complex64::new(rng.sample::<f64, _>(StandardNormal), 0.0)
                }
                ElementKind::Positive => {
                    Complex64::new(rng.sample::<f64, _>(StandardNormal).abs(), 0.0)
                }
                ElementKind::Projection => {
                    if rng.random::<bool>() {
                        Complex64::ONE
                    } else {
                        Complex64::ZERO
                    }
                }
                ElementKind::Unitary => {
                    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    Complex64::new(theta.cos(), theta.sin())
                }
            })
            .collect();
        return Element::from_diagonal(shape, diag).expect("diagonal shape");
    }
    let blocks = shape
        .block_dims()
        .iter()
        .map(|&n| {
            let g = generic_block(&mut rng, n);
            match kind {
                ElementKind::Generic => g,
                ElementKind::Selfadjoint => (&g + g.adjoint()).map(|z| z * 0.5),
                ElementKind::Positive => {
                    let p = &g * g.adjoint();
                    p.map(|z| z / n as f64)
                }
                ElementKind::Projection => {
                    let rank = rng.random_range(1..=n);
                    let tall = DMatrix::from_fn(n, rank, |_, _| gaussian(&mut rng));
                    let qr = tall.col_piv_qr();
                    let q = qr.q();
                    let basis = q.columns(0, rank.min(q.ncols()));
                    basis * basis.adjoint()
                }
                ElementKind::Unitary => {
                    let qr = g.col_piv_qr();
                    let r = qr.r();
                    let q = qr.q();
                    // fix column phases so R has positive diagonal
                    let mut u = q.clone_owned();
                    for i in 0..u.ncols().min(r.nrows()) {
                        let d = r[(i, i)];
                        if d.norm() > 0.0 {
                            let phase = d / d.norm();
                            for k in 0..u.nrows() {
                                u[(k, i)] *= phase;
                            }
                        }
                    }
                    u
                }
            }
        })
        .collect();
    let el = Element::from_blocks(shape, blocks).expect("dims match shape");
    debug_assert!(kind_invariant_holds(&el, kind), "kind invariant violated");
    el
}

fn kind_invariant_holds(el: &Element, kind: ElementKind) -> bool {
    let tol = 1e-8;
    match kind {
        ElementKind::Generic => true,
        ElementKind::Selfadjoint => el.is_selfadjoint(tol),
        ElementKind::Positive => el.is_positive(tol),
        ElementKind::Projection => {
            el.is_selfadjoint(tol)
                && el
                    .mul(el)
                    .map(|sq| sq.sub(el).map(|d| d.norm_op() < tol).unwrap_or(false))
                    .unwrap_or(false)
        }
        ElementKind::Unitary => el
            .adjoint()
            .mul(el)
            .map(|utu| {
                utu.sub(&Element::identity(el.shape()))
                    .map(|d| d.norm_op() < tol)
                    .unwrap_or(false)
            })
            .unwrap_or(false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Projection;

    #[test]
    fn fixed_seed_is_bit_identical() {
        let shape = AlgebraShape::new(vec![2, 3], vec![1.0, 2.0]).unwrap();
        let a = random_suite(&shape, ElementKind::Generic, 99);
        let b = random_suite(&shape, ElementKind::Generic, 99);
        assert_eq!(a, b);
        let c = random_suite(&shape, ElementKind::Generic, 100);
        assert_ne!(a, c);
    }

    #[test]
    fn kinds_satisfy_their_invariants() {
        let shape = AlgebraShape::new(vec![3, 2], vec![0.5, 1.5]).unwrap();
        for seed in 0..5 {
            let p = random_suite(&shape, ElementKind::Projection, seed);
            assert!(Projection::try_new(p, 1e-8).is_ok());
            let pos = random_suite(&shape, ElementKind::Positive, seed);
            assert!(pos.min_eigenvalue().unwrap() >= -1e-10);
            let sa = random_suite(&shape, ElementKind::Selfadjoint, seed);
            assert!(sa.is_selfadjoint(1e-10));
            let u = random_suite(&shape, ElementKind::Unitary, seed);
            let utu = u.adjoint().mul(&u).unwrap();
            assert!(utu.sub(&Element::identity(&shape)).unwrap().norm_op() < 1e-10);
        }
    }

    #[test]
    fn diagonal_shape_kinds() {
        let shape = AlgebraShape::discretized_interval(32).unwrap();
        let p = random_suite(&shape, ElementKind::Projection, 1);
        assert!(Projection::try_new(p, 1e-12).is_ok());
        let pos = random_suite(&shape, ElementKind::Positive, 2);
        assert!(pos.min_eigenvalue().unwrap() >= 0.0);
    }
}
