//! Convergence in measure for the finite trace.
//!
//! The exceedance function `ε ↦ τ(χ_{]ε,∞[}(|x|))` obeys Chebyshev's
//! inequality `τ(χ_{]ε,∞[}(|x|)) ≤ ‖x‖₁/ε`, and a sequence is τ-null exactly
//! when all its exceedance masses vanish. The scalar [`gauge`] is the fixed
//! point `inf{ε > 0 : exceedance(x, ε) ≤ ε}`, computed exactly from the
//! eigenvalue staircase; it metrizes measure convergence on these finite
//! algebras (the underlying topology only comes with a neighborhood base, so
//! any single number is a choice).

use serde::Serialize;

use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::tol;

/// Exceedance masses along an ascending threshold grid.
#[derive(Debug, Clone, Serialize)]
pub struct ExceedanceProfile {
    pub thresholds: Vec<f64>,
    pub masses: Vec<f64>,
}

/// `τ(χ_{]ε,∞[}(|x|))` for `ε > 0`.
pub fn exceedance(x: &Element, eps: f64) -> Result<f64> {
    if eps <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "exceedance threshold must be positive, got {eps}"
        )));
    }
    let shift = tol::SPECTRAL_TIE * x.norm_op();
    Ok(x.weighted_singular_values()?
        .into_iter()
        .filter(|&(s, _)| s > eps + shift)
        .map(|(_, w)| w)
        .sum())
}

/// Masses along a grid of thresholds (ascending order enforced).
pub fn exceedance_profile(x: &Element, thresholds: &[f64]) -> Result<ExceedanceProfile> {
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "thresholds must be strictly ascending".into(),
        ));
    }
    let sv = x.weighted_singular_values()?;
    let shift = tol::SPECTRAL_TIE * x.norm_op();
    let masses = thresholds
        .iter()
        .map(|&eps| {
            if eps <= 0.0 {
                return Err(Error::InvalidArgument("threshold must be positive".into()));
            }
            Ok(sv
                .iter()
                .filter(|&&(s, _)| s > eps + shift)
                .map(|&(_, w)| w)
                .sum())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ExceedanceProfile {
        thresholds: thresholds.to_vec(),
        masses,
    })
}

/// The geometric default grid `2^{-k}`, `k = 0..=20`, ascending.
pub fn default_grid() -> Vec<f64> {
    (0..=20).rev().map(|k| (2.0f64).powi(-k)).collect()
}

/// `inf{ε > 0 : exceedance(x, ε) ≤ ε}`, exact on the singular-value staircase.
///
/// Zero exactly for `x = 0`; by Chebyshev it is bounded by `√‖x‖₁` and by
/// `max(‖x‖₁, √‖x‖₁)` in general, so norm convergence dominates it.
pub fn gauge(x: &Element) -> Result<f64> {
    let mut sv: Vec<(f64, f64)> = x
        .weighted_singular_values()?
        .into_iter()
        .filter(|&(s, _)| s > 0.0)
        .collect();
    if sv.is_empty() {
        return Ok(0.0);
    }
    sv.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("no NaN singular values"));
    // distinct levels s_1 < ... < s_k with the mass strictly above each
    let mut levels: Vec<f64> = Vec::with_capacity(sv.len());
    for &(s, _) in &sv {
        if levels.last().is_none_or(|&l| s > l) {
            levels.push(s);
        }
    }
    let total: f64 = sv.iter().map(|&(_, w)| w).sum();
    // mass(ε) is constant on [s_i, s_{i+1}) and equals Σ{w : s > s_i}
    let mut mass_above = Vec::with_capacity(levels.len() + 1);
    mass_above.push(total); // ε in (0, s_1)
    let mut idx = 0;
    let mut remaining = total;
    for &level in &levels {
        while idx < sv.len() && sv[idx].0 <= level {
            remaining -= sv[idx].1;
            idx += 1;
        }
        mass_above.push(remaining.max(0.0)); // ε in [level, next)
    }
    // scan intervals [lo, hi) for the first fixed point
    let mut lo = 0.0;
    for i in 0..=levels.len() {
        let hi = if i < levels.len() {
            levels[i]
        } else {
            f64::INFINITY
        };
        let mass = mass_above[i];
        if mass <= lo {
            return Ok(lo);
        }
        if mass < hi {
            return Ok(mass);
        }
        lo = hi;
    }
    Ok(*levels.last().expect("nonempty levels"))
}

/// One row of the τ-null evidence table.
#[derive(Debug, Clone, Serialize)]
pub struct EvidenceRow {
    pub n: usize,
    pub epsilon: f64,
    pub mass: f64,
    pub norm1: f64,
    pub gauge: f64,
}

/// Descriptive evidence that a finite prefix behaves like a τ-null sequence:
/// per-threshold mass tables plus trend flags. No asymptotic claim.
#[derive(Debug, Clone, Serialize)]
pub struct EvidenceReport {
    pub rows: Vec<EvidenceRow>,
    /// Per grid threshold: masses non-increasing along the prefix (within a
    /// 1e-12 slack).
    pub monotone_trend: Vec<(f64, bool)>,
    /// Per grid threshold: final mass ≤ the threshold itself.
    pub final_mass_below: Vec<(f64, bool)>,
}

impl EvidenceReport {
    /// CSV with the fixed column order `n,epsilon,mass,norm1,gauge`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,epsilon,mass,norm1,gauge\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.n, r.epsilon, r.mass, r.norm1, r.gauge
            ));
        }
        out
    }
}

/// Evidence table for a sequence prefix over a threshold grid.
pub fn tau_null_evidence(xs: &[Element], grid: &[f64]) -> Result<EvidenceReport> {
    if xs.is_empty() {
        return Err(Error::InvalidArgument("empty sequence prefix".into()));
    }
    let mut rows = Vec::with_capacity(xs.len() * grid.len());
    let mut per_eps: Vec<Vec<f64>> = vec![Vec::with_capacity(xs.len()); grid.len()];
    for (n, x) in xs.iter().enumerate() {
        let norm1 = x.norm_l1();
        let g = gauge(x)?;
        let profile = exceedance_profile(x, grid)?;
        for (i, (&eps, &mass)) in grid.iter().zip(&profile.masses).enumerate() {
            per_eps[i].push(mass);
            rows.push(EvidenceRow {
                n: n + 1,
                epsilon: eps,
                mass,
                norm1,
                gauge: g,
            });
        }
    }
    let monotone_trend = grid
        .iter()
        .zip(&per_eps)
        .map(|(&eps, ms)| (eps, ms.windows(2).all(|w| w[1] <= w[0] + 1e-12)))
        .collect();
    let final_mass_below = grid
        .iter()
        .zip(&per_eps)
        .map(|(&eps, ms)| (eps, *ms.last().expect("nonempty") <= eps))
        .collect();
    Ok(EvidenceReport {
        rows,
        monotone_trend,
        final_mass_below,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random_suite, AlgebraShape, ElementKind};
    use num_complex::Complex64;

    /// Discretized `x_n = n·1_{[0,1/n]}` on `atoms` atoms of weight `1/atoms`.
    fn remark1_element(atoms: usize, n: usize) -> Element {
        let shape = AlgebraShape::discretized_interval(atoms).unwrap();
        let full = atoms / n;
        let mut diag = vec![Complex64::ZERO; atoms];
        for d in diag.iter_mut().take(full) {
            *d = Complex64::new(n as f64, 0.0);
        }
        let remainder = 1.0 - (n * full) as f64 / atoms as f64;
        if remainder > 0.0 && full < atoms {
            diag[full] = Complex64::new(remainder * atoms as f64, 0.0);
        }
        Element::from_diagonal(&shape, diag).unwrap()
    }

    #[test]
    fn exceedance_basic_cases() {
        let shape = AlgebraShape::new(vec![2], vec![1.0]).unwrap();
        let x = random_suite(&shape, ElementKind::Generic, 1);
        // threshold above the operator norm: mass 0
        assert_eq!(exceedance(&x, x.norm_op() * 2.0 + 1.0).unwrap(), 0.0);
        assert!(exceedance(&x, 0.0).is_err());
        assert!(exceedance(&x, -1.0).is_err());
    }

    #[test]
    fn remark1_mass_is_one_over_n() {
        let x = remark1_element(1 << 12, 16);
        assert!((x.norm_l1() - 1.0).abs() < 1e-12);
        assert!((exceedance(&x, 1.0).unwrap() - 1.0 / 16.0).abs() < 1e-12);
        // any ε below n sees the same support
        assert!((exceedance(&x, 7.0).unwrap() - 1.0 / 16.0).abs() < 1e-12);
        assert_eq!(exceedance(&x, 16.5).unwrap(), 0.0);
    }

    #[test]
    fn chebyshev_bound_holds() {
        let shape = AlgebraShape::new(vec![3, 2], vec![0.5, 2.0]).unwrap();
        for seed in 0..20 {
            let x = random_suite(&shape, ElementKind::Generic, seed);
            let n1 = x.norm_l1();
            for k in 1..=20 {
                let eps = 0.1 * k as f64;
                let mass = exceedance(&x, eps).unwrap();
                assert!(mass <= n1 / eps + 1e-12, "seed {seed} eps {eps}");
            }
        }
    }

    #[test]
    fn gauge_fixed_point() {
        let shape = AlgebraShape::discretized_interval(64).unwrap();
        let zero = Element::zeros(&shape);
        assert_eq!(gauge(&zero).unwrap(), 0.0);

        // remark-1 element: gauge = 1/n exactly for dyadic n
        let x = remark1_element(1 << 12, 16);
        assert!((gauge(&x).unwrap() - 1.0 / 16.0).abs() < 1e-14);

        // Chebyshev corollary: gauge(x) ≤ sqrt(‖x‖₁)
        let dense = AlgebraShape::new(vec![3, 2], vec![1.0, 0.25]).unwrap();
        for seed in 0..30 {
            let x = random_suite(&dense, ElementKind::Generic, seed);
            let g = gauge(&x).unwrap();
            assert!(g <= x.norm_l1().sqrt() + 1e-12, "seed {seed}");
            // defining property verified on a fine grid around g
            let mass_at = |eps: f64| exceedance(&x, eps).unwrap();
            assert!(mass_at(g + 1e-9) <= g + 1e-9 + 1e-12);
            if g > 1e-9 {
                assert!(mass_at(g - 1e-9) > g - 1e-9 - 1e-6 || g <= 1e-9);
            }
        }
    }

    #[test]
    fn gauge_dominated_by_norm() {
        let shape = AlgebraShape::new(vec![4], vec![0.7]).unwrap();
        for seed in 0..30 {
            let x = random_suite(&shape, ElementKind::Generic, seed);
            let n1 = x.norm_l1();
            assert!(gauge(&x).unwrap() <= n1.max(n1.sqrt()) + 1e-12);
        }
    }

    #[test]
    fn exceedance_profile_is_monotone() {
        let shape = AlgebraShape::new(vec![4, 2], vec![1.0, 3.0]).unwrap();
        let x = random_suite(&shape, ElementKind::Generic, 5);
        let grid = default_grid();
        let profile = exceedance_profile(&x, &grid).unwrap();
        for w in profile.masses.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
        // Chebyshev per threshold
        for (eps, mass) in profile.thresholds.iter().zip(&profile.masses) {
            assert!(*mass <= x.norm_l1() / eps + 1e-12);
        }
    }

    #[test]
    fn evidence_for_norm_null_and_remark1() {
        let shape = AlgebraShape::discretized_interval(256).unwrap();
        // x_n = (1/n)·1: masses hit 0 once 1/n < ε
        let xs: Vec<Element> = (1..=8)
            .map(|n| Element::identity(&shape).scale(1.0 / n as f64))
            .collect();
        let grid = vec![0.25, 0.5, 1.0];
        let report = tau_null_evidence(&xs, &grid).unwrap();
        for (_, flag) in &report.monotone_trend {
            assert!(*flag);
        }
        let last_mass = report
            .rows
            .iter()
            .filter(|r| r.n == 8 && r.epsilon == 0.25)
            .map(|r| r.mass)
            .next()
            .unwrap();
        assert_eq!(last_mass, 0.0);

        // remark-1: mass 1/n decreasing while ‖x‖₁ stays 1
        let xs: Vec<Element> = [1usize, 2, 4, 8, 16]
            .iter()
            .map(|&n| remark1_element(256, n))
            .collect();
        let report = tau_null_evidence(&xs, &[0.5]).unwrap();
        let masses: Vec<f64> = report.rows.iter().map(|r| r.mass).collect();
        for (i, &n) in [1usize, 2, 4, 8, 16].iter().enumerate() {
            assert!((masses[i] - 1.0 / n as f64).abs() < 1e-12);
            assert!((report.rows[i].norm1 - 1.0).abs() < 1e-12);
        }
        assert!(tau_null_evidence(&[], &[0.5]).is_err());
        let csv = report.to_csv();
        assert!(csv.starts_with("n,epsilon,mass,norm1,gauge\n"));
        assert_eq!(csv.lines().count(), 6);
    }
}
