//! ℓ¹-span diagnostics: lower basis constants, tail δ-schedules, James
//! blocking, and perturbation-stability certificates.
//!
//! A family `(x_k)` spans ℓ¹ r-isomorphically when
//! `r·Σ|α_k| ≤ ‖Σ α_k x_k/‖x_k‖‖₁` for all coefficients. The true `r` is the
//! global minimum of a norm over the complex ℓ¹-sphere — a nonconvex (phase)
//! domain — so searches report the best value found under an explicit budget:
//! a phase × simplex grid followed by deterministic pattern-search refinement.
//! Every reported estimate is an upper bound on the true constant (any
//! feasible point is), and emitted block certificates are re-measured before
//! being returned.

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::functional::Functional;

/// Search effort knobs. Families longer than `exact_search_max` are estimated
/// by the minimum over sliding windows of that size (documented upper
/// estimate); grids larger than `max_grid_evals` are coarsened first in phase
/// resolution, then in simplex resolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchBudget {
    pub phase_points: usize,
    pub simplex_resolution: usize,
    pub refine_steps: usize,
    pub max_grid_evals: usize,
    pub exact_search_max: usize,
    /// Restrict coefficients to real signs (selfadjoint families).
    pub real_coefficients: bool,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            phase_points: 24,
            simplex_resolution: 32,
            refine_steps: 200,
            max_grid_evals: 200_000,
            exact_search_max: 4,
            real_coefficients: false,
        }
    }
}

impl SearchBudget {
    pub fn real_mode() -> Self {
        SearchBudget {
            real_coefficients: true,
            ..SearchBudget::default()
        }
    }
}

fn serialize_alpha<S: Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
    pairs.serialize(s)
}

/// Outcome of a span search: best lower-constant found, optional tail
/// δ-schedule, the witness coefficients attaining the minimum, and the budget
/// that produced them. Serializes as `{"r": .., "delta": [..],
/// "witness_alpha": [[re,im],..], "budget": {..}}`.
#[derive(Debug, Clone, Serialize)]
pub struct L1Certificate {
    #[serde(rename = "r")]
    pub r_estimate: f64,
    #[serde(rename = "delta")]
    pub delta_schedule: Vec<f64>,
    #[serde(serialize_with = "serialize_alpha")]
    pub witness_alpha: Vec<Complex64>,
    pub budget: SearchBudget,
    #[serde(skip)]
    pub grid_evals: usize,
    /// True when the value came from sliding windows rather than a full search.
    #[serde(skip)]
    pub window_estimated: bool,
    /// For tail schedules: does the measured δ-trend support "almost
    /// isometric" at this prefix (non-increasing tail deficits, final ≤ first)?
    #[serde(skip)]
    pub trend_supports_almost_isometric: Option<bool>,
    /// Filled by perturbation certificates: re-measured tail constants.
    #[serde(skip)]
    pub measured_tails: Vec<f64>,
}

/// Normalized members with storage-specialized combination evaluation.
struct MemberSet {
    diag: Option<Vec<Vec<Complex64>>>,
    dense: Option<Vec<Vec<nalgebra::DMatrix<Complex64>>>>,
    weights: Vec<f64>,
    len: usize,
}

impl MemberSet {
    fn new(members: &[Element]) -> Result<MemberSet> {
        if members.is_empty() {
            return Err(Error::InvalidArgument("empty family".into()));
        }
        let shape = members[0].shape().clone();
        let mut normalized = Vec::with_capacity(members.len());
        for (k, m) in members.iter().enumerate() {
            crate::algebra::same_shape(&shape, m.shape())
                .then_some(())
                .ok_or_else(|| Error::ShapeMismatch(format!("member {k}")))?;
            let n1 = m.norm_l1();
            if n1 < 1e-13 * shape.tau_unit().max(1.0) {
                return Err(Error::NearZero {
                    norm: n1,
                    cutoff: 1e-13 * shape.tau_unit().max(1.0),
                });
            }
            normalized.push(m.scale(1.0 / n1));
        }
        let weights = shape.trace_weights().to_vec();
        if shape.is_diagonal() {
            let diag = normalized
                .iter()
                .map(|m| m.diagonal().expect("diagonal storage").to_vec())
                .collect();
            Ok(MemberSet {
                diag: Some(diag),
                dense: None,
                weights,
                len: members.len(),
            })
        } else {
            let dense = normalized.iter().map(|m| m.blocks_dense()).collect();
            Ok(MemberSet {
                diag: None,
                dense: Some(dense),
                weights,
                len: members.len(),
            })
        }
    }

    /// `‖Σ α_k x̂_k‖₁`.
    fn eval(&self, alpha: &[Complex64]) -> f64 {
        if let Some(diag) = &self.diag {
            let atoms = diag[0].len();
            let mut total = 0.0;
            for i in 0..atoms {
                let mut acc = Complex64::ZERO;
                for (k, d) in diag.iter().enumerate() {
                    acc += alpha[k] * d[i];
                }
                total += acc.norm() * self.weights[i];
            }
            return total;
        }
        let dense = self.dense.as_ref().expect("dense storage");
        let nblocks = dense[0].len();
        let mut total = 0.0;
        for j in 0..nblocks {
            let mut acc = dense[0][j].map(|z| z * alpha[0]);
            for (k, member) in dense.iter().enumerate().skip(1) {
                acc += member[j].map(|z| z * alpha[k]);
            }
            let sv = acc
                .try_svd(false, false, f64::EPSILON, 0)
                .expect("SVD of a finite combination");
            total += self.weights[j] * sv.singular_values.iter().sum::<f64>();
        }
        total
    }
}

fn binomial_estimate(s: usize, parts: usize) -> f64 {
    // C(s + parts - 1, parts - 1)
    let mut v = 1.0f64;
    for i in 0..parts.saturating_sub(1) {
        v *= (s + i + 1) as f64 / (i + 1) as f64;
    }
    v
}

fn effective_grid(n: usize, budget: &SearchBudget) -> (usize, usize) {
    let mut phases = if budget.real_coefficients {
        2
    } else {
        budget.phase_points.max(2)
    };
    let mut res = budget.simplex_resolution.max(2);
    loop {
        let est = binomial_estimate(res, n) * (phases as f64).powi(n as i32 - 1);
        if est <= budget.max_grid_evals as f64 {
            break;
        }
        if !budget.real_coefficients && phases > 8 {
            phases /= 2;
        } else if res > 8 {
            res /= 2;
        } else {
            break;
        }
    }
    (phases, res)
}

/// Lexicographic walk over the compositions of `s` into `n` parts.
fn next_composition(c: &mut [usize]) -> bool {
    let n = c.len();
    if n <= 1 {
        return false;
    }
    if c[n - 1] == c.iter().sum::<usize>() {
        return false;
    }
    let i = c.iter().position(|&v| v > 0).expect("sum is positive");
    if i == n - 1 {
        return false;
    }
    let t = c[i];
    c[i] = 0;
    c[0] = t - 1;
    c[i + 1] += 1;
    true
}

struct SearchOutcome {
    minimum: f64,
    alpha: Vec<Complex64>,
    evals: usize,
}

/// Grid scan + deterministic pattern-search refinement of
/// `α ↦ ‖Σ α_k x̂_k‖₁ / Σ|α_k|`.
fn search_min(set: &MemberSet, budget: &SearchBudget) -> SearchOutcome {
    let n = set.len;
    if n == 1 {
        return SearchOutcome {
            minimum: set.eval(&[Complex64::ONE]),
            alpha: vec![Complex64::ONE],
            evals: 1,
        };
    }
    let (phases, res) = effective_grid(n, budget);
    let phase_angles: Vec<Complex64> = (0..phases)
        .map(|p| {
            let theta = std::f64::consts::TAU * p as f64 / phases as f64;
            Complex64::new(theta.cos(), theta.sin())
        })
        .collect();

    // grid scan keeping several well-separated seeds for the refinement
    let max_seeds = (1 + budget.refine_steps / 150).clamp(1, 6);
    let dedup_radius = 2.0 / res as f64;
    let mut seeds: Vec<(f64, Vec<Complex64>)> = Vec::new();
    let mut evals = 0usize;

    let mut comp = vec![0usize; n];
    comp[0] = res;
    let mut alpha = vec![Complex64::ZERO; n];
    loop {
        // phase odometer over members 1..n; members with zero magnitude keep
        // phase index 0 so each grid point is evaluated once
        let mut digits = vec![0usize; n - 1];
        'phases: loop {
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
                    alpha[k] = phase_angles[digits[k - 1]] * (comp[k] as f64 / res as f64);
                }
                let v = set.eval(&alpha);
                evals += 1;
                offer_seed(&mut seeds, max_seeds, dedup_radius, v, &alpha);
            }
            // advance odometer
            for d in digits.iter_mut() {
                *d += 1;
                if *d < phases {
                    continue 'phases;
                }
                *d = 0;
            }
            break;
        }
        if !next_composition(&mut comp) {
            break;
        }
    }

    // pattern-search refinement from each seed, budget split evenly
    let per_seed = (budget.refine_steps / seeds.len().max(1)).max(1);
    let mut best = seeds.first().map(|s| s.0).unwrap_or(f64::INFINITY);
    let mut best_alpha = seeds
        .first()
        .map(|s| s.1.clone())
        .unwrap_or_else(|| vec![Complex64::ZERO; n]);
    for (v0, alpha0) in &seeds {
        let (v, a, used) = pattern_refine(set, alpha0, *v0, budget, per_seed, res, phases);
        evals += used;
        if v < best {
            best = v;
            best_alpha = a;
        }
    }
    SearchOutcome {
        minimum: best,
        alpha: best_alpha,
        evals,
    }
}

/// Keep up to `cap` seeds, best-first, merging grid points within the dedup
/// radius so the refinement starts from distinct basins.
fn offer_seed(
    seeds: &mut Vec<(f64, Vec<Complex64>)>,
    cap: usize,
    radius: f64,
    v: f64,
    alpha: &[Complex64],
) {
    for s in seeds.iter_mut() {
        let dist: f64 = s.1.iter().zip(alpha).map(|(a, b)| (a - b).norm()).sum();
        if dist < radius {
            if v < s.0 {
                s.0 = v;
                s.1 = alpha.to_vec();
                seeds.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("no NaN"));
            }
            return;
        }
    }
    if seeds.len() < cap {
        seeds.push((v, alpha.to_vec()));
        seeds.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("no NaN"));
        return;
    }
    if let Some(worst) = seeds.last_mut() {
        if v < worst.0 {
            worst.0 = v;
            worst.1 = alpha.to_vec();
            seeds.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("no NaN"));
        }
    }
}

/// Local refinement of the scale-free objective `‖Σαx̂‖/Σ|α|` by a
/// deterministic Nelder–Mead simplex over the free coordinates: signed
/// magnitudes `m_k` (a sign change is a phase flip, so no clamping) and, in
/// complex mode, phases `θ_2..θ_n`. The adaptive simplex follows the kinked
/// grooves of trace-norm minima where axis-aligned polling stalls.
fn pattern_refine(
    set: &MemberSet,
    alpha0: &[Complex64],
    v0: f64,
    budget: &SearchBudget,
    max_evals: usize,
    res: usize,
    phases: usize,
) -> (f64, Vec<Complex64>, usize) {
    let n = alpha0.len();
    let real = budget.real_coefficients;
    let dim = if real { n } else { 2 * n - 1 };

    // coordinates: m_1..m_n (signed), then θ_2..θ_n in complex mode.
    // In real mode the seed's phase (0 or π) is folded into the sign.
    let mut x0 = vec![0.0f64; dim];
    for k in 0..n {
        let m = alpha0[k].norm();
        x0[k] = if real && alpha0[k].re < 0.0 { -m } else { m };
    }
    if !real {
        for k in 1..n {
            x0[n + k - 1] = if alpha0[k].norm() > 0.0 {
                alpha0[k].arg()
            } else {
                0.0
            };
        }
    }
    let rebuild = |x: &[f64]| -> Vec<Complex64> {
        (0..n)
            .map(|k| {
                let theta = if real || k == 0 { 0.0 } else { x[n + k - 1] };
                Complex64::new(theta.cos(), theta.sin()) * x[k]
            })
            .collect()
    };
    let objective = |x: &[f64]| -> f64 {
        let s: f64 = x[..n].iter().map(|m| m.abs()).sum();
        if s < 1e-14 {
            return f64::INFINITY;
        }
        set.eval(&rebuild(x)) / s
    };

    let mag_h = 0.5 / res as f64;
    let theta_h = std::f64::consts::PI / phases as f64;
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(dim + 1);
    simplex.push((v0, x0.clone()));
    let mut evals = 0usize;
    for d in 0..dim {
        let mut x = x0.clone();
        x[d] += if d < n { mag_h } else { theta_h };
        let v = objective(&x);
        evals += 1;
        simplex.push((v, x));
    }
    let sort = |s: &mut Vec<(f64, Vec<f64>)>| {
        s.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("no NaN objective"));
    };
    sort(&mut simplex);

    while evals < max_evals {
        // convergence: simplex collapsed
        let spread = simplex.last().expect("nonempty").0 - simplex[0].0;
        let diameter: f64 = (1..simplex.len())
            .map(|i| {
                simplex[i]
                    .1
                    .iter()
                    .zip(&simplex[0].1)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread < 1e-14 && diameter < 1e-12 {
            break;
        }
        let worst = simplex.len() - 1;
        let centroid: Vec<f64> = (0..dim)
            .map(|d| simplex[..worst].iter().map(|(_, x)| x[d]).sum::<f64>() / worst as f64)
            .collect();
        let reflect: Vec<f64> = (0..dim)
            .map(|d| centroid[d] + (centroid[d] - simplex[worst].1[d]))
            .collect();
        let v_r = objective(&reflect);
        evals += 1;
        if v_r < simplex[0].0 {
            // try expansion
            let expand: Vec<f64> = (0..dim)
                .map(|d| centroid[d] + 2.0 * (centroid[d] - simplex[worst].1[d]))
                .collect();
            let v_e = objective(&expand);
            evals += 1;
            simplex[worst] = if v_e < v_r {
                (v_e, expand)
            } else {
                (v_r, reflect)
            };
        } else if v_r < simplex[worst - 1].0 {
            simplex[worst] = (v_r, reflect);
        } else {
            // contraction (outside if the reflection helped at all)
            let towards = if v_r < simplex[worst].0 {
                &reflect
            } else {
                &simplex[worst].1
            };
            let contract: Vec<f64> = (0..dim)
                .map(|d| centroid[d] + 0.5 * (towards[d] - centroid[d]))
                .collect();
            let v_c = objective(&contract);
            evals += 1;
            if v_c < simplex[worst].0.min(v_r) {
                simplex[worst] = (v_c, contract);
            } else {
                // shrink towards the best vertex
                let best = simplex[0].1.clone();
                for item in simplex.iter_mut().skip(1) {
                    for (coord, b) in item.1.iter_mut().zip(&best) {
                        *coord = b + 0.5 * (*coord - b);
                    }
                    item.0 = objective(&item.1);
                    evals += 1;
                }
            }
        }
        sort(&mut simplex);
    }
    let (v, x) = &simplex[0];
    if *v >= v0 {
        return (v0, alpha0.to_vec(), evals);
    }
    let s: f64 = x[..n].iter().map(|m| m.abs()).sum();
    let alpha: Vec<Complex64> = rebuild(x).iter().map(|z| z / s).collect();
    (*v, alpha, evals)
}

/// Best-found lower ℓ¹ constant of the family (normalized internally).
///
/// For families longer than `budget.exact_search_max` the value is the
/// minimum over all sliding windows of that size — an upper estimate of the
/// true constant, flagged via `window_estimated`.
pub fn l1_lower_constant(members: &[Element], budget: &SearchBudget) -> Result<L1Certificate> {
    let n = members.len();
    if n <= budget.exact_search_max {
        let set = MemberSet::new(members)?;
        let out = search_min(&set, budget);
        return Ok(L1Certificate {
            r_estimate: out.minimum,
            delta_schedule: Vec::new(),
            witness_alpha: out.alpha,
            budget: budget.clone(),
            grid_evals: out.evals,
            window_estimated: false,
            trend_supports_almost_isometric: None,
            measured_tails: Vec::new(),
        });
    }
    let w = budget.exact_search_max.max(2);
    let mut best = f64::INFINITY;
    let mut best_alpha = Vec::new();
    let mut best_start = 0;
    let mut evals = 0;
    for start in 0..=(n - w) {
        let set = MemberSet::new(&members[start..start + w])?;
        let out = search_min(&set, budget);
        evals += out.evals;
        if out.minimum < best {
            best = out.minimum;
            best_alpha = out.alpha;
            best_start = start;
        }
    }
    let mut alpha = vec![Complex64::ZERO; n];
    alpha[best_start..best_start + w].copy_from_slice(&best_alpha);
    Ok(L1Certificate {
        r_estimate: best,
        delta_schedule: Vec::new(),
        witness_alpha: alpha,
        budget: budget.clone(),
        grid_evals: evals,
        window_estimated: true,
        trend_supports_almost_isometric: None,
        measured_tails: Vec::new(),
    })
}

/// Convenience wrapper over functional families (densities carry the norm).
pub fn l1_lower_constant_functionals(
    phis: &[Functional],
    budget: &SearchBudget,
) -> Result<L1Certificate> {
    let densities: Vec<Element> = phis.iter().map(|p| p.density().clone()).collect();
    l1_lower_constant(&densities, budget)
}

/// Tail deficits `δ_m = 1 − r(tail from m)` for every suffix of the prefix
/// (1-indexed in the schedule; the singleton tail has deficit 0 by
/// normalization).
pub fn tail_delta_schedule(members: &[Element], budget: &SearchBudget) -> Result<L1Certificate> {
    if members.len() < 2 {
        return Err(Error::InvalidArgument(
            "tail schedule needs a prefix of length >= 2".into(),
        ));
    }
    let mut deltas = Vec::with_capacity(members.len());
    let mut evals = 0;
    let mut first_witness = Vec::new();
    let mut head_r = 0.0;
    let mut windowed = false;
    for m in 0..members.len() {
        let tail = &members[m..];
        let cert = if tail.len() == 1 {
            L1Certificate {
                r_estimate: 1.0,
                delta_schedule: Vec::new(),
                witness_alpha: vec![Complex64::ONE],
                budget: budget.clone(),
                grid_evals: 0,
                window_estimated: false,
                trend_supports_almost_isometric: None,
                measured_tails: Vec::new(),
            }
        } else {
            l1_lower_constant(tail, budget)?
        };
        evals += cert.grid_evals;
        windowed |= cert.window_estimated;
        if m == 0 {
            head_r = cert.r_estimate;
            first_witness = cert.witness_alpha.clone();
        }
        deltas.push((1.0 - cert.r_estimate).max(0.0));
    }
    let trend = deltas.windows(2).all(|w| w[1] <= w[0] + 1e-9)
        && deltas.last().expect("nonempty") <= &(deltas[0] + 1e-12);
    Ok(L1Certificate {
        r_estimate: head_r,
        delta_schedule: deltas,
        witness_alpha: first_witness,
        budget: budget.clone(),
        grid_evals: evals,
        window_estimated: windowed,
        trend_supports_almost_isometric: Some(trend),
        measured_tails: Vec::new(),
    })
}

pub fn tail_delta_schedule_functionals(
    phis: &[Functional],
    budget: &SearchBudget,
) -> Result<L1Certificate> {
    let densities: Vec<Element> = phis.iter().map(|p| p.density().clone()).collect();
    tail_delta_schedule(&densities, budget)
}

/// One emitted James block: `y = Σ_{i∈F} λ_i x̂_i` with the indices, the
/// rescaled coefficients, and `‖y‖₁ = 1`.
#[derive(Debug, Clone, Serialize)]
pub struct JamesBlock {
    pub indices: Vec<usize>,
    #[serde(serialize_with = "serialize_alpha")]
    pub coefficients: Vec<Complex64>,
}

/// Disjoint blocks upgrading an r-isomorphic ℓ¹ family towards an almost
/// isometric one; self-validating via re-measured tail constants.
#[derive(Debug, Clone, Serialize)]
pub struct BlockSpec {
    pub blocks: Vec<JamesBlock>,
    #[serde(skip)]
    pub block_elements: Vec<Element>,
    /// `Σ|λ_i|` per block (bounded by `1/r` up to tolerance).
    pub coefficient_l1: Vec<f64>,
    pub measured_tail_constants: Vec<f64>,
    pub requested_deltas: Vec<f64>,
    pub certified: bool,
    pub diagnostic: Option<String>,
}

/// Greedy James blocking: repeatedly take the shortest prefix of unused
/// indices whose optimal combination attains (within the step's δ) the
/// supremum of achievable span constants, then rescale the minimizer so the
/// block has unit norm.
pub fn james_blocks(
    members: &[Element],
    r: f64,
    target_deltas: &[f64],
    budget: &SearchBudget,
) -> Result<BlockSpec> {
    if target_deltas.is_empty() {
        return Err(Error::InvalidArgument("no target deltas".into()));
    }
    let full = l1_lower_constant(members, budget)?;
    if full.r_estimate < r - 1e-6 {
        return Err(Error::InsufficientSpan {
            measured: full.r_estimate,
            required: r,
        });
    }
    // normalized copies
    let normalized: Vec<Element> = members.iter().map(|m| m.scale(1.0 / m.norm_l1())).collect();
    // supremum of achievable constants over sliding windows
    let w = budget.exact_search_max.max(2).min(normalized.len());
    let mut sup_constant: f64 = 0.0;
    for start in 0..=(normalized.len() - w) {
        let set = MemberSet::new(&normalized[start..start + w])?;
        let out = search_min(&set, budget);
        sup_constant = sup_constant.max(out.minimum);
    }
    // single members always achieve 1
    sup_constant = sup_constant.max(if normalized.len() < 2 { 1.0 } else { 0.0 });

    let mut blocks = Vec::new();
    let mut block_elements = Vec::new();
    let mut coefficient_l1 = Vec::new();
    let mut cursor = 0usize;
    let mut diagnostic = None;
    for (step, &delta) in target_deltas.iter().enumerate() {
        if cursor >= normalized.len() {
            diagnostic = Some(format!(
                "ran out of indices after {} of {} blocks",
                step,
                target_deltas.len()
            ));
            break;
        }
        let slack = (delta * sup_constant).max(1e-9);
        let mut chosen: Option<(Vec<usize>, Vec<Complex64>, f64)> = None;
        let max_len = budget.exact_search_max.max(2);
        for len in 1..=max_len.min(normalized.len() - cursor) {
            let prefix = &normalized[cursor..cursor + len];
            let (value, alpha) = if len == 1 {
                (1.0, vec![Complex64::ONE])
            } else {
                let set = MemberSet::new(prefix)?;
                let out = search_min(&set, budget);
                (out.minimum, out.alpha)
            };
            if value <= sup_constant + slack {
                let indices: Vec<usize> = (cursor..cursor + len).collect();
                chosen = Some((indices, alpha, value));
                break;
            }
        }
        match chosen {
            Some((indices, alpha, value)) => {
                if value < 1e-9 {
                    diagnostic = Some(format!(
                        "block {step} collapsed: optimal combination has norm {value:.3e}"
                    ));
                    break;
                }
                let lambda: Vec<Complex64> = alpha.iter().map(|a| a / value).collect();
                let mut y = Element::zeros(normalized[0].shape());
                for (&i, l) in indices.iter().zip(&lambda) {
                    y = y.add(&normalized[i].scale_complex(*l))?;
                }
                cursor = indices.last().expect("nonempty block") + 1;
                coefficient_l1.push(lambda.iter().map(|l| l.norm()).sum());
                blocks.push(JamesBlock {
                    indices,
                    coefficients: lambda,
                });
                block_elements.push(y);
            }
            None => {
                diagnostic = Some(format!(
                    "no prefix of length <= {max_len} attains the supremum within {slack:.3e} at block {step}"
                ));
                break;
            }
        }
    }

    // self-validation: re-measure the emitted blocks' tail constants
    let measured_tail_constants = if block_elements.len() >= 2 {
        tail_delta_schedule(&block_elements, budget)?
            .delta_schedule
            .iter()
            .map(|d| 1.0 - d)
            .collect()
    } else if block_elements.len() == 1 {
        vec![1.0]
    } else {
        Vec::new()
    };
    let complete = blocks.len() == target_deltas.len();
    let tails_ok = measured_tail_constants
        .iter()
        .zip(target_deltas)
        .all(|(&c, &d)| c >= 1.0 - d - 1e-9);
    Ok(BlockSpec {
        certified: complete && tails_ok,
        blocks,
        block_elements,
        coefficient_l1,
        measured_tail_constants,
        requested_deltas: target_deltas.to_vec(),
        diagnostic,
    })
}

/// Perturbation stability: from a δ-schedule for `(x_n)` and a perturbation
/// `(y_n)`, the sequence `(x_n + y_n)` carries the explicit schedule
/// `δ'_m = δ_m + sup_{n≥m}|1 − ‖x_n‖/‖x_n+y_n‖| + sup_{n≥m}‖y_n‖/‖x_n+y_n‖`,
/// re-validated against measured tail constants of the perturbed family.
pub fn perturbation_certificate(
    base: &L1Certificate,
    xs: &[Element],
    ys: &[Element],
    budget: &SearchBudget,
) -> Result<L1Certificate> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::InvalidArgument(
            "perturbation needs matching nonempty sequences".into(),
        ));
    }
    if base.delta_schedule.len() < xs.len() {
        return Err(Error::InvalidArgument(format!(
            "base schedule has {} entries for {} members",
            base.delta_schedule.len(),
            xs.len()
        )));
    }
    let n = xs.len();
    let mut x_norms = Vec::with_capacity(n);
    let mut sums = Vec::with_capacity(n);
    for (x, y) in xs.iter().zip(ys) {
        let nx = x.norm_l1();
        if nx < 1e-12 {
            return Err(Error::Precondition(format!(
                "inf ‖x_n‖ must be positive, found {nx:.3e}"
            )));
        }
        let s = x.add(y)?;
        let ns = s.norm_l1();
        if ns < 1e-12 {
            return Err(Error::Precondition("x_n + y_n vanishes for some n".into()));
        }
        x_norms.push(nx);
        sums.push((s, ns));
    }
    let y_norms: Vec<f64> = ys.iter().map(|y| y.norm_l1()).collect();
    let mut deltas = Vec::with_capacity(n);
    for m in 0..n {
        let ratio_sup = (m..n)
            .map(|k| (1.0 - x_norms[k] / sums[k].1).abs())
            .fold(0.0f64, f64::max);
        let noise_sup = (m..n)
            .map(|k| y_norms[k] / sums[k].1)
            .fold(0.0f64, f64::max);
        deltas.push(base.delta_schedule[m] + ratio_sup + noise_sup);
    }
    let perturbed: Vec<Element> = sums.iter().map(|(s, _)| s.clone()).collect();
    let measured = tail_delta_schedule(&perturbed, budget)?;
    let measured_tails: Vec<f64> = measured.delta_schedule.iter().map(|d| 1.0 - d).collect();
    Ok(L1Certificate {
        r_estimate: (1.0 - deltas[0]).max(0.0),
        delta_schedule: deltas,
        witness_alpha: measured.witness_alpha,
        budget: budget.clone(),
        grid_evals: measured.grid_evals,
        window_estimated: measured.window_estimated,
        trend_supports_almost_isometric: measured.trend_supports_almost_isometric,
        measured_tails,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random_suite, AlgebraShape, ElementKind};

    fn atom(shape: &std::sync::Arc<AlgebraShape>, i: usize) -> Element {
        // normalized atom indicator on a diagonal shape
        let n = shape.num_blocks();
        let mut diag = vec![Complex64::ZERO; n];
        diag[i] = Complex64::new(n as f64, 0.0);
        Element::from_diagonal(shape, diag).unwrap()
    }

    #[test]
    fn orthogonal_family_has_constant_one() {
        let shape = AlgebraShape::discretized_interval(8).unwrap();
        let members: Vec<Element> = (0..3).map(|i| atom(&shape, i)).collect();
        let cert = l1_lower_constant(&members, &SearchBudget::default()).unwrap();
        assert!(
            (cert.r_estimate - 1.0).abs() < 1e-6,
            "r = {}",
            cert.r_estimate
        );
    }

    #[test]
    fn duplicated_member_kills_the_constant() {
        let shape = AlgebraShape::discretized_interval(8).unwrap();
        let x = atom(&shape, 0);
        let cert = l1_lower_constant(&[x.clone(), x], &SearchBudget::default()).unwrap();
        assert!(cert.r_estimate < 1e-6, "r = {}", cert.r_estimate);
        // witness is the difference combination
        let a = cert.witness_alpha;
        assert!((a[0] + a[1]).norm() < 1e-6);
    }

    #[test]
    fn common_lump_family_has_constant_half() {
        // x_k = (e_k + g)/2 with a shared lump g: the true constant is 1/2
        let shape = AlgebraShape::discretized_interval(8).unwrap();
        let g = atom(&shape, 7);
        let members: Vec<Element> = (0..3)
            .map(|i| atom(&shape, i).add(&g).unwrap().scale(0.5))
            .collect();
        let cert = l1_lower_constant(&members, &SearchBudget::default()).unwrap();
        assert!(
            (cert.r_estimate - 0.5).abs() < 1e-4,
            "r = {}",
            cert.r_estimate
        );
    }

    #[test]
    fn zero_member_is_rejected() {
        let shape = AlgebraShape::discretized_interval(4).unwrap();
        let z = Element::zeros(&shape);
        assert!(matches!(
            l1_lower_constant(&[z], &SearchBudget::default()),
            Err(Error::NearZero { .. })
        ));
    }

    #[test]
    fn tail_schedule_of_orthogonal_family() {
        let shape = AlgebraShape::discretized_interval(8).unwrap();
        let members: Vec<Element> = (0..4).map(|i| atom(&shape, i)).collect();
        let cert = tail_delta_schedule(&members, &SearchBudget::default()).unwrap();
        assert_eq!(cert.delta_schedule.len(), 4);
        for d in &cert.delta_schedule {
            assert!(*d < 1e-6);
        }
        assert_eq!(cert.trend_supports_almost_isometric, Some(true));
    }

    #[test]
    fn repeated_head_only_hurts_the_head() {
        let shape = AlgebraShape::discretized_interval(8).unwrap();
        let members = vec![
            atom(&shape, 0),
            atom(&shape, 0),
            atom(&shape, 1),
            atom(&shape, 2),
        ];
        let cert = tail_delta_schedule(&members, &SearchBudget::default()).unwrap();
        assert!(cert.delta_schedule[0] > 1.0 - 1e-6);
        for d in &cert.delta_schedule[2..] {
            assert!(*d < 1e-6);
        }
    }

    #[test]
    fn unimodular_scaling_and_permutation_invariance() {
        let shape = AlgebraShape::new(vec![2], vec![1.0]).unwrap();
        let members: Vec<Element> = (0..2)
            .map(|s| random_suite(&shape, ElementKind::Generic, 21 + s))
            .collect();
        let budget = SearchBudget::default();
        let base = l1_lower_constant(&members, &budget).unwrap().r_estimate;
        let phase = Complex64::new(0.2f64.cos(), 0.2f64.sin());
        let scaled: Vec<Element> = members.iter().map(|m| m.scale_complex(phase)).collect();
        let r_scaled = l1_lower_constant(&scaled, &budget).unwrap().r_estimate;
        assert!((base - r_scaled).abs() < 1e-3, "{base} vs {r_scaled}");
        let swapped = vec![members[1].clone(), members[0].clone()];
        let r_swapped = l1_lower_constant(&swapped, &budget).unwrap().r_estimate;
        assert!((base - r_swapped).abs() < 1e-3, "{base} vs {r_swapped}");
    }

    #[test]
    fn appending_members_does_not_raise_the_constant() {
        let shape = AlgebraShape::new(vec![2], vec![1.0]).unwrap();
        let budget = SearchBudget {
            phase_points: 12,
            simplex_resolution: 16,
            ..SearchBudget::default()
        };
        for seed in 0..5 {
            let members: Vec<Element> = (0..3)
                .map(|s| random_suite(&shape, ElementKind::Generic, seed * 10 + s))
                .collect();
            let r2 = l1_lower_constant(&members[..2], &budget)
                .unwrap()
                .r_estimate;
            let r3 = l1_lower_constant(&members, &budget).unwrap().r_estimate;
            assert!(r3 <= r2 + 1e-9, "seed {seed}: {r3} > {r2}");
        }
    }

    #[test]
    fn james_blocks_on_orthogonal_input_are_singletons() {
        let shape = AlgebraShape::discretized_interval(8).unwrap();
        let members: Vec<Element> = (0..4).map(|i| atom(&shape, i)).collect();
        let spec =
            james_blocks(&members, 1.0, &[0.01, 0.01, 0.01], &SearchBudget::default()).unwrap();
        assert!(spec.certified, "diagnostic: {:?}", spec.diagnostic);
        assert_eq!(spec.blocks.len(), 3);
        for (b, s) in spec.blocks.iter().zip(&spec.coefficient_l1) {
            assert_eq!(b.indices.len(), 1);
            assert!((s - 1.0).abs() < 1e-9);
        }
        for c in &spec.measured_tail_constants {
            assert!(*c >= 1.0 - 0.01 - 1e-9);
        }
    }

    #[test]
    fn james_blocks_recover_isometry_from_common_lump() {
        let shape = AlgebraShape::discretized_interval(16).unwrap();
        let g = atom(&shape, 15);
        let members: Vec<Element> = (0..8)
            .map(|i| atom(&shape, i).add(&g).unwrap().scale(0.5))
            .collect();
        let spec =
            james_blocks(&members, 0.5, &[0.05, 0.05, 0.05], &SearchBudget::default()).unwrap();
        assert!(spec.certified, "diagnostic: {:?}", spec.diagnostic);
        for s in &spec.coefficient_l1 {
            assert!(*s <= 2.0 + 1e-9, "sum of |lambda| = {s}");
        }
        for c in &spec.measured_tail_constants {
            assert!(*c >= 0.95 - 1e-9, "tail constant {c}");
        }
    }

    #[test]
    fn james_blocks_partial_when_indices_run_out() {
        let shape = AlgebraShape::discretized_interval(8).unwrap();
        let members: Vec<Element> = (0..2).map(|i| atom(&shape, i)).collect();
        let spec = james_blocks(
            &members,
            1.0,
            &[0.01, 0.01, 0.01, 0.01],
            &SearchBudget::default(),
        )
        .unwrap();
        assert!(!spec.certified);
        assert!(spec.diagnostic.is_some());
        assert!(spec.blocks.len() < 4);
    }

    #[test]
    fn perturbation_certificate_formula() {
        let shape = AlgebraShape::discretized_interval(12).unwrap();
        let xs: Vec<Element> = (0..4).map(|i| atom(&shape, i)).collect();
        let base = tail_delta_schedule(&xs, &SearchBudget::default()).unwrap();

        // y = 0: schedule unchanged
        let zeros: Vec<Element> = (0..4).map(|_| Element::zeros(&shape)).collect();
        let cert = perturbation_certificate(&base, &xs, &zeros, &SearchBudget::default()).unwrap();
        for (d, b) in cert.delta_schedule.iter().zip(&base.delta_schedule) {
            assert!((d - b).abs() < 1e-12);
        }

        // constant-norm perturbation on fresh atoms: δ' ≤ δ + 2η/(1-η)
        let eta = 0.05;
        let ys: Vec<Element> = (0..4).map(|i| atom(&shape, i + 4).scale(eta)).collect();
        let cert = perturbation_certificate(&base, &xs, &ys, &SearchBudget::default()).unwrap();
        for (m, d) in cert.delta_schedule.iter().enumerate() {
            let bound = base.delta_schedule[m] + 2.0 * eta / (1.0 - eta) + 1e-9;
            assert!(*d <= bound, "m={m}: {d} > {bound}");
        }
        // measured tails honor the certificate
        for (c, d) in cert.measured_tails.iter().zip(&cert.delta_schedule) {
            assert!(*c >= 1.0 - d - 1e-9);
        }

        // vanishing perturbation: δ'_m → δ_m as m grows
        let ys: Vec<Element> = (0..4)
            .map(|i| atom(&shape, i + 4).scale(0.5f64.powi(i as i32 + 1)))
            .collect();
        let cert = perturbation_certificate(&base, &xs, &ys, &SearchBudget::default()).unwrap();
        let last = *cert.delta_schedule.last().unwrap();
        assert!(last < cert.delta_schedule[0] + 1e-12);
        assert!(last <= base.delta_schedule[3] + 2.0 * 0.0625 / (1.0 - 0.0625) + 1e-9);

        // zero x is rejected
        let bad = vec![Element::zeros(&shape); 4];
        assert!(perturbation_certificate(&base, &bad, &zeros, &SearchBudget::default()).is_err());
    }
}
