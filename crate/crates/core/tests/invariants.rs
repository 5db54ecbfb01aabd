//! Property suites over seeded random inputs: the algebraic identities the
//! trace, the norms and the polar data must satisfy on every conforming input.

use ncl1_core::algebra::{is_orthogonal_elements, random_suite, AlgebraShape, ElementKind};
use ncl1_core::functional::Functional;
use ncl1_core::measure;
use ncl1_core::Element;
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::Arc;

fn shape_pool(idx: usize) -> Arc<AlgebraShape> {
    match idx % 5 {
        0 => AlgebraShape::discretized_interval(16).unwrap(),
        1 => AlgebraShape::new(vec![2], vec![0.5]).unwrap(),
        2 => AlgebraShape::new(vec![2, 3], vec![1.0, 2.0]).unwrap(),
        3 => AlgebraShape::new(vec![4], vec![0.7]).unwrap(),
        _ => AlgebraShape::new(vec![2, 2, 2], vec![0.5, 1.0, 2.0]).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_is_tracial(idx in 0usize..5, seed in any::<u64>()) {
        let shape = shape_pool(idx);
        let x = random_suite(&shape, ElementKind::Generic, seed);
        let y = random_suite(&shape, ElementKind::Generic, seed.wrapping_add(1));
        let xy = x.mul(&y).unwrap().trace();
        let yx = y.mul(&x).unwrap().trace();
        prop_assert!((xy - yx).norm() < 1e-9 * (1.0 + xy.norm()));
    }

    #[test]
    fn hoelder_inequality(idx in 0usize..5, seed in any::<u64>()) {
        let shape = shape_pool(idx);
        let x = random_suite(&shape, ElementKind::Generic, seed);
        let y = random_suite(&shape, ElementKind::Generic, seed.wrapping_add(2));
        let lhs = x.mul(&y).unwrap().trace().norm();
        let rhs = x.norm_l1() * y.norm_op();
        prop_assert!(lhs <= rhs + 1e-9 * rhs.max(1.0));
    }

    #[test]
    fn unitary_invariance_of_trace_norm(idx in 0usize..5, seed in any::<u64>()) {
        let shape = shape_pool(idx);
        let x = random_suite(&shape, ElementKind::Generic, seed);
        let u = random_suite(&shape, ElementKind::Unitary, seed.wrapping_add(3));
        let v = random_suite(&shape, ElementKind::Unitary, seed.wrapping_add(4));
        let rotated = u.mul(&x).unwrap().mul(&v).unwrap();
        prop_assert!((rotated.norm_l1() - x.norm_l1()).abs() < 1e-9 * x.norm_l1().max(1.0));
    }

    #[test]
    fn polar_reconstruction(idx in 0usize..5, seed in any::<u64>()) {
        let shape = shape_pool(idx);
        let x = random_suite(&shape, ElementKind::Generic, seed);
        let polar = x.abs_polar().unwrap();
        let rec = polar.partial_isometry.mul(&polar.abs).unwrap();
        prop_assert!(rec.sub(&x).unwrap().norm_op() <= 1e-9 * x.norm_op().max(1.0));
        // u*u is the strict-above-zero spectral projection of |x|
        let utu = polar.partial_isometry.adjoint().mul(&polar.partial_isometry).unwrap();
        let supp = polar.abs
            .spectral_projection(0.0, ncl1_core::ThresholdMode::StrictAbove)
            .unwrap();
        prop_assert!(utu.sub(supp.element()).unwrap().norm_op() < 1e-7);
    }

    #[test]
    fn triangle_inequality_for_schatten_norms(idx in 0usize..5, seed in any::<u64>(), p_choice in 0usize..3) {
        let shape = shape_pool(idx);
        let p = [1.0, 2.0, f64::INFINITY][p_choice];
        let x = random_suite(&shape, ElementKind::Generic, seed);
        let y = random_suite(&shape, ElementKind::Generic, seed.wrapping_add(5));
        let sum = x.add(&y).unwrap();
        let lhs = sum.schatten_norm(p).unwrap();
        let rhs = x.schatten_norm(p).unwrap() + y.schatten_norm(p).unwrap();
        prop_assert!(lhs <= rhs + 1e-9 * rhs.max(1.0));
    }

    #[test]
    fn gauge_dominated_by_norm(idx in 0usize..5, seed in any::<u64>()) {
        let shape = shape_pool(idx);
        let x = random_suite(&shape, ElementKind::Generic, seed);
        let n1 = x.norm_l1();
        let g = measure::gauge(&x).unwrap();
        prop_assert!(g <= n1.max(n1.sqrt()) + 1e-12);
    }

    #[test]
    fn element_json_round_trip(idx in 0usize..5, seed in any::<u64>()) {
        let shape = shape_pool(idx);
        let x = random_suite(&shape, ElementKind::Generic, seed);
        let json = serde_json::to_string(&x).unwrap();
        let back: Element = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(x.blocks_dense(), back.blocks_dense());
    }
}

#[test]
fn faithfulness_of_the_trace() {
    // 1000 random nonzero elements across the shape pool: τ(x*x) > 0
    for seed in 0..1000u64 {
        let shape = shape_pool(seed as usize);
        let x = random_suite(&shape, ElementKind::Generic, seed);
        let v = x.adjoint().mul(&x).unwrap().trace().re;
        assert!(v > 0.0, "seed {seed}: τ(x*x) = {v}");
    }
}

#[test]
fn l1_additivity_on_orthogonal_elements() {
    // disjoint blocks give exactly orthogonal pairs
    let shape = AlgebraShape::new(vec![2, 2], vec![1.0, 1.5]).unwrap();
    for seed in 0..100 {
        let a_full = random_suite(&shape, ElementKind::Generic, seed);
        let b_full = random_suite(&shape, ElementKind::Generic, seed + 5000);
        let mask_a = {
            let mut blocks = a_full.blocks_dense();
            blocks[1].fill(Complex64::ZERO);
            Element::from_blocks(&shape, blocks).unwrap()
        };
        let mask_b = {
            let mut blocks = b_full.blocks_dense();
            blocks[0].fill(Complex64::ZERO);
            Element::from_blocks(&shape, blocks).unwrap()
        };
        assert!(is_orthogonal_elements(&mask_a, &mask_b, 1e-12).unwrap());
        let sum = mask_a.add(&mask_b).unwrap();
        let lhs = sum.norm_l1();
        let rhs = mask_a.norm_l1() + mask_b.norm_l1();
        assert!((lhs - rhs).abs() < 1e-9, "seed {seed}");
    }
}

#[test]
fn span_isometry_for_orthogonal_functionals() {
    // pairwise orthogonal normalized functionals: ‖Σ α_k φ_k‖ = Σ|α_k|
    let shape = AlgebraShape::new(vec![2, 2, 2], vec![1.0, 1.0, 1.0]).unwrap();
    let phis: Vec<Functional> = (0..3)
        .map(|b| {
            let full = random_suite(&shape, ElementKind::Generic, 300 + b as u64);
            let mut blocks: Vec<nalgebra::DMatrix<Complex64>> = shape
                .block_dims()
                .iter()
                .map(|&n| nalgebra::DMatrix::zeros(n, n))
                .collect();
            blocks[b] = full.blocks_dense()[b].clone();
            let d = Element::from_blocks(&shape, blocks).unwrap();
            Functional::from_density(d.scale(1.0 / d.norm_l1())).unwrap()
        })
        .collect();
    for i in 0..3 {
        for j in (i + 1)..3 {
            assert!(phis[i].are_orthogonal(&phis[j], 1e-10));
        }
    }
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let alphas: Vec<Complex64> = (0..3)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let mut acc = Element::zeros(&shape);
        for (phi, a) in phis.iter().zip(&alphas) {
            acc = acc.add(&phi.density().scale_complex(*a)).unwrap();
        }
        let lhs = acc.norm_l1();
        let rhs: f64 = alphas.iter().map(|a| a.norm()).sum();
        assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
    }
}

#[test]
fn absolute_value_is_qualitatively_norm_continuous() {
    // ‖|φ| − |ψ|‖ decays monotonically as ‖φ − ψ‖ does, on random smooth
    // paths; no rate is asserted
    let shape = AlgebraShape::new(vec![3], vec![1.0]).unwrap();
    for seed in 0..10 {
        let d = random_suite(&shape, ElementKind::Generic, seed);
        let d = d.scale(1.0 / d.norm_l1());
        let g = random_suite(&shape, ElementKind::Generic, seed + 900);
        let g = g.scale(1.0 / g.norm_l1());
        let phi = Functional::from_density(d.clone()).unwrap();
        let mut last = f64::INFINITY;
        for h in [1e-2, 1e-3, 1e-4] {
            let psi = Functional::from_density(d.add(&g.scale(h)).unwrap()).unwrap();
            let abs_gap = phi.abs().unwrap().distance(&psi.abs().unwrap()).unwrap();
            assert!(
                abs_gap <= last + 1e-12,
                "seed {seed}: |abs gap| {abs_gap} did not decay (prev {last})"
            );
            last = abs_gap;
        }
    }
}

#[test]
fn exceedance_right_continuous_and_monotone() {
    let shape = AlgebraShape::new(vec![3, 2], vec![1.0, 0.5]).unwrap();
    for seed in 0..10 {
        let x = random_suite(&shape, ElementKind::Generic, seed);
        let grid: Vec<f64> = (1..=40).map(|k| 0.05 * k as f64).collect();
        let profile = measure::exceedance_profile(&x, &grid).unwrap();
        for w in profile.masses.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
        // right continuity on the staircase: nudging ε upward within a gap
        // does not change the mass
        for &(s, _) in x.weighted_singular_values().unwrap().iter() {
            if s > 1e-6 {
                let m1 = measure::exceedance(&x, s + 1e-9).unwrap();
                let m2 = measure::exceedance(&x, s + 1e-7).unwrap();
                assert!((m1 - m2).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn gauge_vanishes_along_orthogonal_families() {
    // pairwise orthogonal y_l with bounded trace norms on a finite-trace
    // algebra: supports must shrink, so the gauge dies along the prefix
    let atoms = 1 << 10;
    let shape = AlgebraShape::discretized_interval(atoms).unwrap();
    let mut start = 0usize;
    let mut ys = Vec::new();
    let mut width = atoms / 2;
    while width >= 1 && start + width <= atoms {
        let mut diag = vec![Complex64::ZERO; atoms];
        let value = atoms as f64 / width as f64; // normalized to trace norm 1
        for d in diag.iter_mut().skip(start).take(width) {
            *d = Complex64::new(value, 0.0);
        }
        ys.push(Element::from_diagonal(&shape, diag).unwrap());
        start += width;
        width /= 2;
    }
    for i in 0..ys.len() {
        for j in (i + 1)..ys.len() {
            assert!(is_orthogonal_elements(&ys[i], &ys[j], 1e-12).unwrap());
        }
    }
    let gauges: Vec<f64> = ys.iter().map(|y| measure::gauge(y).unwrap()).collect();
    for w in gauges.windows(2) {
        assert!(w[1] <= w[0] + 1e-15);
    }
    assert!(*gauges.last().unwrap() < 0.01 * gauges[0]);
}

#[test]
fn real_coefficient_mode_finds_sign_cancellations() {
    use ncl1_core::span::{l1_lower_constant, SearchBudget};
    // selfadjoint plus/minus lump family with true constant 1/2
    let atoms = 6usize;
    let shape = AlgebraShape::discretized_interval(atoms).unwrap();
    let atom = |i: usize| {
        let mut diag = vec![Complex64::ZERO; atoms];
        diag[i] = Complex64::new(atoms as f64, 0.0);
        Element::from_diagonal(&shape, diag).unwrap()
    };
    let lump = atom(atoms - 1);
    let members: Vec<Element> = (0..3)
        .map(|k| atom(k).sub(&lump).unwrap().scale(0.5))
        .collect();
    let budget = SearchBudget::real_mode();
    let cert = l1_lower_constant(&members, &budget).unwrap();
    assert!(
        (cert.r_estimate - 0.5).abs() < 1e-4,
        "real-mode constant {}",
        cert.r_estimate
    );
    // all witness coefficients are real up to numerics
    for a in &cert.witness_alpha {
        assert!(a.im.abs() < 1e-9);
    }
}
