//! Independent reference implementations used by the validation suites.
//!
//! Everything here deliberately avoids the code paths of the main modules:
//! multiplication is a naive triple loop, singular values come from a
//! hand-rolled one-sided Jacobi iteration, ranks from Gaussian elimination,
//! and ℓ¹-constant minima from a raw dense grid with no refinement. Production
//! code never calls into this module; tests compare against it.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::Element;

/// Naive triple-loop complex matrix product.
pub fn naive_matmul(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (n, m) = (a.nrows(), b.ncols());
    let k = a.ncols();
    assert_eq!(k, b.nrows(), "inner dimensions must agree");
    let mut out = DMatrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            let mut acc = Complex64::ZERO;
            for l in 0..k {
                acc += a[(i, l)] * b[(l, j)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Singular values by one-sided Jacobi: rotate column pairs until all columns
/// are mutually orthogonal, then read off the column norms. Descending order.
pub fn jacobi_singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut a = m.clone();
    let n = a.ncols();
    let tol = 1e-14;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let col_p = a.column(p).into_owned();
                let col_q = a.column(q).into_owned();
                let app: f64 = col_p.iter().map(|z| z.norm_sqr()).sum();
                let aqq: f64 = col_q.iter().map(|z| z.norm_sqr()).sum();
                let apq: Complex64 = col_p
                    .iter()
                    .zip(col_q.iter())
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let scale = (app * aqq).sqrt();
                if apq.norm() <= tol * scale.max(1e-300) {
                    continue;
                }
                off = off.max(apq.norm() / scale.max(1e-300));
                // complex Jacobi rotation annihilating the (p,q) Gram entry
                let phase = apq / apq.norm();
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..a.nrows() {
                    let vp = a[(i, p)];
                    let vq = a[(i, q)];
                    a[(i, p)] = vp * c - vq * phase.conj() * s;
                    a[(i, q)] = vp * phase * s + vq * c;
                }
            }
        }
        if off <= tol {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n)
        .map(|j| a.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.partial_cmp(x).expect("finite singular values"));
    sv
}

/// Weighted singular values of an element via the Jacobi route.
pub fn weighted_singular_values(x: &Element) -> Vec<(f64, f64)> {
    let blocks = x.blocks_dense();
    let mut out = Vec::new();
    for (b, &w) in blocks.iter().zip(x.shape().trace_weights()) {
        for s in jacobi_singular_values(b) {
            out.push((s, w));
        }
    }
    out
}

/// Trace norm via the Jacobi singular values.
pub fn trace_norm(x: &Element) -> f64 {
    weighted_singular_values(x)
        .into_iter()
        .map(|(s, w)| s * w)
        .sum()
}

/// Count of weighted singular values strictly above a threshold.
pub fn exceedance_mass(x: &Element, eps: f64) -> f64 {
    weighted_singular_values(x)
        .into_iter()
        .filter(|&(s, _)| s > eps)
        .map(|(_, w)| w)
        .sum()
}

/// Matrix rank by Gaussian elimination with partial pivoting.
pub fn rank_by_elimination(m: &DMatrix<Complex64>, tol: f64) -> usize {
    let mut a = m.clone();
    let (rows, cols) = (a.nrows(), a.ncols());
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        // pivot search
        let (mut pivot_row, mut pivot_val) = (row, a[(row, col)].norm());
        for r in (row + 1)..rows {
            let v = a[(r, col)].norm();
            if v > pivot_val {
                pivot_row = r;
                pivot_val = v;
            }
        }
        if pivot_val <= tol {
            continue;
        }
        a.swap_rows(row, pivot_row);
        let pivot = a[(row, col)];
        for r in (row + 1)..rows {
            let factor = a[(r, col)] / pivot;
            for c in col..cols {
                let above = a[(row, c)];
                a[(r, c)] -= factor * above;
            }
        }
        rank += 1;
        row += 1;
    }
    rank
}

/// Intersection dimension of two projection ranges via the rank identity
/// `dim(ran P ∩ ran Q) = rank P + rank Q − rank [P | Q]`.
pub fn intersection_dim(p: &DMatrix<Complex64>, q: &DMatrix<Complex64>, tol: f64) -> usize {
    let rp = rank_by_elimination(p, tol);
    let rq = rank_by_elimination(q, tol);
    let n = p.nrows();
    let mut stacked = DMatrix::zeros(n, 2 * n);
    stacked.columns_mut(0, n).copy_from(p);
    stacked.columns_mut(n, n).copy_from(q);
    let r_join = rank_by_elimination(&stacked, tol);
    (rp + rq).saturating_sub(r_join)
}

/// Nuclear norm of a 2×2 complex matrix in closed form:
/// `σ₁ + σ₂ = √(‖M‖_F² + 2|det M|)`.
pub fn nuclear_norm_2x2(m: &DMatrix<Complex64>) -> f64 {
    debug_assert_eq!((m.nrows(), m.ncols()), (2, 2));
    let frob2: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    (frob2 + 2.0 * det.norm()).max(0.0).sqrt()
}

/// Weighted trace norm with the closed 2×2 form where available and the
/// Jacobi route elsewhere; used by the grid oracles only.
fn oracle_trace_norm_blocks(blocks: &[DMatrix<Complex64>], weights: &[f64]) -> f64 {
    blocks
        .iter()
        .zip(weights)
        .map(|(b, &w)| {
            let s = match b.nrows() {
                1 => b[(0, 0)].norm(),
                2 => nuclear_norm_2x2(b),
                _ => jacobi_singular_values(b).iter().sum(),
            };
            w * s
        })
        .sum()
}

/// Dense-grid minimum of `‖Σ α_k x̂_k‖₁` over the complex ℓ¹-sphere with
/// nested refinement: a uniform grid over the free coordinates (simplex
/// magnitudes and phases), re-gridded around the best cell for the given
/// number of rounds. Pure enumeration, no descent.
pub fn zooming_grid_l1_min(members: &[Element], coarse_per_dim: usize, rounds: usize) -> f64 {
    let n = members.len();
    assert!(n >= 1);
    let weights = members[0].shape().trace_weights().to_vec();
    let normalized: Vec<Vec<DMatrix<Complex64>>> = members
        .iter()
        .map(|m| {
            let scale = 1.0 / m.norm_l1();
            m.blocks_dense()
                .into_iter()
                .map(|b| b.map(|z| z * scale))
                .collect()
        })
        .collect();
    let nblocks = normalized[0].len();
    // free coordinates: t_1..t_{n-1} in [0,1] (t_n = 1 - sum), θ_2..θ_n
    let dim = 2 * (n - 1);
    let eval = |coords: &[f64]| -> f64 {
        let mut mags = Vec::with_capacity(n);
        let mut rest = 1.0;
        for &t in &coords[..n - 1] {
            mags.push(t);
            rest -= t;
        }
        if rest < -1e-12 {
            return f64::INFINITY;
        }
        mags.push(rest.max(0.0));
        let mut alpha = vec![Complex64::ZERO; n];
        alpha[0] = Complex64::new(mags[0], 0.0);
        for k in 1..n {
            let theta = coords[n - 1 + k - 1];
            alpha[k] = Complex64::new(theta.cos(), theta.sin()) * mags[k];
        }
        let mut acc: Vec<DMatrix<Complex64>> = (0..nblocks)
            .map(|j| normalized[0][j].map(|z| z * alpha[0]))
            .collect();
        for k in 1..n {
            for (j, blk) in acc.iter_mut().enumerate() {
                *blk += normalized[k][j].map(|z| z * alpha[k]);
            }
        }
        oracle_trace_norm_blocks(&acc, &weights)
    };
    if n == 1 {
        return eval(&[]);
    }
    let mut lo: Vec<f64> = vec![0.0; dim];
    let mut hi: Vec<f64> = (0..dim)
        .map(|d| {
            if d < n - 1 {
                1.0
            } else {
                std::f64::consts::TAU
            }
        })
        .collect();
    let mut best = f64::INFINITY;
    let mut best_coords = vec![0.0; dim];
    let mut per_dim = coarse_per_dim.max(4);
    for _round in 0..rounds.max(1) {
        let steps: Vec<f64> = (0..dim).map(|d| (hi[d] - lo[d]) / per_dim as f64).collect();
        let mut idx = vec![0usize; dim];
        let mut coords = vec![0.0; dim];
        'outer: loop {
            for d in 0..dim {
                coords[d] = lo[d] + idx[d] as f64 * steps[d];
            }
            let v = eval(&coords);
            if v < best {
                best = v;
                best_coords.copy_from_slice(&coords);
            }
            // odometer
            for slot in idx.iter_mut() {
                *slot += 1;
                if *slot <= per_dim {
                    continue 'outer;
                }
                *slot = 0;
            }
            break;
        }
        // zoom: ±2 cells around the best point, regridded 16 per dim, so the
        // resolution improves fourfold per round
        for d in 0..dim {
            let w = 2.0 * steps[d];
            lo[d] = (best_coords[d] - w).max(if d < n - 1 { 0.0 } else { f64::NEG_INFINITY });
            hi[d] = best_coords[d] + w;
            if d < n - 1 {
                hi[d] = hi[d].min(1.0);
            }
        }
        per_dim = 16;
    }
    best
}

/// Raw dense-grid minimum of `‖Σ α_k x̂_k‖₁` over the complex ℓ¹-sphere:
/// magnitudes on a simplex grid of the given resolution, phases on a uniform
/// grid, no refinement. Members are normalized internally.
pub fn dense_grid_l1_min(
    members: &[Element],
    simplex_resolution: usize,
    phase_points: usize,
) -> f64 {
    let n = members.len();
    assert!(n >= 1);
    let normalized: Vec<Element> = members.iter().map(|m| m.scale(1.0 / m.norm_l1())).collect();
    let eval = |alpha: &[Complex64]| -> f64 {
        let mut acc = Element::zeros(normalized[0].shape());
        for (m, &a) in normalized.iter().zip(alpha) {
            acc = acc.add(&m.scale_complex(a)).expect("same shape");
        }
        trace_norm(&acc)
    };
    if n == 1 {
        return eval(&[Complex64::ONE]);
    }
    let res = simplex_resolution;
    let phases: Vec<Complex64> = (0..phase_points)
        .map(|p| {
            let t = std::f64::consts::TAU * p as f64 / phase_points as f64;
            Complex64::new(t.cos(), t.sin())
        })
        .collect();
    let mut best = f64::INFINITY;
    let mut comp = vec![0usize; n];
    comp[0] = res;
    let mut alpha = vec![Complex64::ZERO; n];
    loop {
        let mut digits = vec![0usize; n - 1];
        'ph: loop {
            let mut skip = false;
            for (k, &d) in digits.iter().enumerate() {
                if comp[k + 1] == 0 && d != 0 {
                    skip = true;
                    break;
                }
            }
            if !skip {
                alpha[0] = Complex64::new(comp[0] as f64 / res as f64, 0.0);
                for k in 1..n {
                    alpha[k] = phases[digits[k - 1]] * (comp[k] as f64 / res as f64);
                }
                let v = eval(&alpha);
                if v < best {
                    best = v;
                }
            }
            for d in digits.iter_mut() {
                *d += 1;
                if *d < phase_points {
                    continue 'ph;
                }
                *d = 0;
            }
            break;
        }
        // lexicographic composition walk
        let len = comp.len();
        if comp[len - 1] == res {
            break;
        }
        let i = comp.iter().position(|&v| v > 0).expect("positive sum");
        if i == len - 1 {
            break;
        }
        let t = comp[i];
        comp[i] = 0;
        comp[0] = t - 1;
        comp[i + 1] += 1;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random_suite, AlgebraShape, ElementKind};

    #[test]
    fn jacobi_agrees_with_diagonal_case() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(3.0, 0.0),
            Complex64::new(-4.0, 0.0),
        ]));
        let sv = jacobi_singular_values(&m);
        assert!((sv[0] - 4.0).abs() < 1e-12);
        assert!((sv[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rank_of_projection_matches_trace() {
        let shape = AlgebraShape::new(vec![5], vec![1.0]).unwrap();
        for seed in 0..10 {
            let p = random_suite(&shape, ElementKind::Projection, seed);
            let blocks = p.blocks_dense();
            let rank = rank_by_elimination(&blocks[0], 1e-8);
            assert!((p.trace().re - rank as f64).abs() < 1e-8, "seed {seed}");
        }
    }
}
