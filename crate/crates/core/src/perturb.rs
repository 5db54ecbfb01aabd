//! Quantitative perturbation machinery: compression bounds for functionals,
//! the two-sided renormalization estimate, dyadic δ-schedules, finite
//! orthogonal extraction, and positive witnesses for ℓ¹-spanning families.
//!
//! Every constructive routine here is post-verified: orthogonality,
//! normalization and distances of outputs are recomputed from scratch with the
//! algebra primitives before a result is certified. The inequality routines
//! return [`BoundReport`]s whose slack must be nonnegative for in-contract
//! inputs — a violation would disprove a theorem, so the audit suites treat
//! any negative slack as a bug.

use serde::Serialize;

use crate::algebra::{Element, Projection, ThresholdMode};
use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::span::{self, SearchBudget};

/// One verified inequality: `lhs ≤ rhs` with `slack = rhs − lhs`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub context: String,
}

impl BoundReport {
    fn new(label: &str, lhs: f64, rhs: f64, context: String) -> BoundReport {
        BoundReport {
            label: label.to_string(),
            lhs,
            rhs,
            slack: rhs - lhs,
            context,
        }
    }
}

fn check_contraction(a: &Element, tol: f64) -> Result<()> {
    let norm = a.norm_op();
    if norm > 1.0 + tol {
        return Err(Error::OutsideUnitBall { norm });
    }
    Ok(())
}

/// Compression bounds for a positive functional `ω` and contractions `a`, `b`:
///
/// * `‖aω − ω‖ ≤ √(2‖ω‖)·|‖ω‖ − ω(a)|^{1/2}`
/// * `‖ωa − ω‖ ≤ √(2‖ω‖)·|‖ω‖ − ω(a)|^{1/2}`
/// * `‖bωa − ω‖ ≤ √(2‖ω‖)·(|‖ω‖ − ω(a)|^{1/2} + |‖ω‖ − ω(b)|^{1/2})`
pub fn positive_compression_bounds(
    omega: &Functional,
    a: &Element,
    b: &Element,
    tol: f64,
) -> Result<[BoundReport; 3]> {
    if !omega.is_positive(tol) {
        return Err(Error::NotPositive(format!(
            "density has selfadjoint residual {:.3e} or negative spectrum",
            omega.density().selfadjoint_residual()
        )));
    }
    check_contraction(a, tol)?;
    check_contraction(b, tol)?;
    let norm = omega.norm();
    let d = omega.density();
    let omega_a = omega.evaluate(a)?;
    let omega_b = omega.evaluate(b)?;
    let root = (2.0 * norm).sqrt();
    let gap_a = (norm - omega_a).norm().sqrt();
    let gap_b = (norm - omega_b).norm().sqrt();
    let ctx = format!("‖ω‖={norm:.6}");

    let lhs1 = a.mul(d)?.sub(d)?.norm_l1();
    let lhs2 = d.mul(a)?.sub(d)?.norm_l1();
    let lhs3 = b.mul(d)?.mul(a)?.sub(d)?.norm_l1();
    Ok([
        BoundReport::new("|a.omega - omega|", lhs1, root * gap_a, ctx.clone()),
        BoundReport::new("|omega.a - omega|", lhs2, root * gap_a, ctx.clone()),
        BoundReport::new("|b.omega.a - omega|", lhs3, root * (gap_a + gap_b), ctx),
    ])
}

/// Polar compression bounds for an arbitrary functional `φ` and contractions:
///
/// * `‖φ − a|φ|‖ ≤ √(2‖φ‖)·|‖φ‖ − φ*(a)|^{1/2}`
/// * `‖|φ| − aφ‖ ≤ √(2‖φ‖)·|‖φ‖ − φ(a)|^{1/2}`
/// * `‖bφa − φ‖ ≤ √(2‖φ‖)·(|‖φ‖ − |φ|(a)| + |‖φ‖ − |φ*|(b)|)^{1/2}`
pub fn polar_compression_bounds(
    phi: &Functional,
    a: &Element,
    b: &Element,
    tol: f64,
) -> Result<[BoundReport; 3]> {
    check_contraction(a, tol)?;
    check_contraction(b, tol)?;
    let norm = phi.norm();
    let d = phi.density();
    let abs = phi.abs_density();
    let abs_adj = phi.abs_adjoint()?;
    let root = (2.0 * norm).sqrt();
    let ctx = format!("‖φ‖={norm:.6}");

    // φ*(a) = τ(D* a)
    let phi_star_a = d.adjoint().mul(a)?.trace();
    let lhs1 = d.sub(&a.mul(abs)?)?.norm_l1();
    let rhs1 = root * (norm - phi_star_a).norm().sqrt();

    let phi_a = phi.evaluate(a)?;
    let lhs2 = abs.sub(&a.mul(d)?)?.norm_l1();
    let rhs2 = root * (norm - phi_a).norm().sqrt();

    let abs_a = abs.mul(a)?.trace();
    let absadj_b = abs_adj.density().mul(b)?.trace();
    let lhs3 = b.mul(d)?.mul(a)?.sub(d)?.norm_l1();
    let rhs3 = root * ((norm - abs_a).norm() + (norm - absadj_b).norm()).sqrt();

    Ok([
        BoundReport::new("|phi - a.abs(phi)|", lhs1, rhs1, ctx.clone()),
        BoundReport::new("|abs(phi) - a.phi|", lhs2, rhs2, ctx.clone()),
        BoundReport::new("|b.phi.a - phi|", lhs3, rhs3, ctx),
    ])
}

/// Two-sided compression and renormalization: when the projections carry all
/// but `β` of the mass of `|σ|` and `|σ*|`, the normalized compression
/// `lσr/‖lσr‖` stays within `5√β` of `σ`.
pub fn compress_normalize(
    sigma: &Functional,
    l: &Projection,
    r: &Projection,
    beta: f64,
    tol: f64,
) -> Result<(Functional, BoundReport)> {
    if !(0.0 < beta && beta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "beta must lie in (0,1), got {beta}"
        )));
    }
    if sigma.norm() > 1.0 + tol {
        return Err(Error::OutsideUnitBall { norm: sigma.norm() });
    }
    let right_mass = sigma.abs_mass(r)?;
    let left_mass = sigma.abs_adjoint()?.abs_mass(l)?;
    let required = 1.0 - beta;
    if right_mass < required - tol || left_mass < required - tol {
        return Err(Error::SupportMass {
            right_mass,
            left_mass,
            required,
        });
    }
    let compressed = sigma.compress(l, r)?;
    let cutoff = 1e-12 * sigma.shape().tau_unit().max(1.0);
    if compressed.norm() <= cutoff {
        return Err(Error::DegenerateCompression {
            norm: compressed.norm(),
            cutoff,
        });
    }
    let tau_out = compressed.normalized()?;
    let distance = sigma.distance(&tau_out)?;
    let report = BoundReport::new(
        "|sigma - l.sigma.r/norm| < 5 sqrt(beta)",
        distance,
        5.0 * beta.sqrt(),
        format!("beta={beta:.3e}, right mass {right_mass:.9}, left mass {left_mass:.9}"),
    );
    Ok((tau_out, report))
}

/// The dyadic δ-schedule: `δ_1 = ε` and `δ_{k+1}` the largest dyadic `2^{-j}`
/// with `δ_{k+1} + √(32·k·δ_{k+1}) < δ_k`. Errors once the recursion leaves
/// the range of f64 (around n = 8 for ε = 0.1).
pub fn delta_schedule(n: usize, eps: f64) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::InvalidArgument(
            "schedule length must be >= 1".into(),
        ));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in (0,1), got {eps}"
        )));
    }
    let mut out = Vec::with_capacity(n);
    out.push(eps);
    for k in 1..n {
        let prev = out[k - 1];
        let mut d = 1.0f64;
        let found = loop {
            if d == 0.0 {
                break None;
            }
            if d + (32.0 * k as f64 * d).sqrt() < prev {
                break Some(d);
            }
            d *= 0.5;
        };
        match found {
            Some(d) => out.push(d),
            None => {
                return Err(Error::ScheduleUnderflow { step: k + 1, n });
            }
        }
    }
    Ok(out)
}

/// One audit entry of the extraction: which stage ran at which level, the δ in
/// force, the measured masses against their pigeonhole gate.
#[derive(Debug, Clone, Serialize)]
pub struct SearchStep {
    pub stage: String,
    pub family_size: usize,
    pub delta: f64,
    pub gate: f64,
    pub measured: Vec<f64>,
    pub passed: bool,
}

/// Result of the finite orthogonal extraction: pairwise orthogonal projection
/// families on both sides, the normalized compressions `ψ_k = q_kφ_kp_k/‖·‖`,
/// and re-verified distances `‖φ_k − ψ_k‖`. `certified` is set only after all
/// post-conditions have been recomputed from scratch.
#[derive(Debug, Serialize)]
pub struct ExtractionResult {
    pub indices: Vec<usize>,
    pub right_projections: Vec<Projection>,
    pub left_projections: Vec<Projection>,
    pub outputs: Vec<Functional>,
    pub distances: Vec<f64>,
    pub epsilon: f64,
    pub measured_span: f64,
    pub certified: bool,
    pub search_log: Vec<SearchStep>,
    pub diagnostic: Option<String>,
}

/// Forward δ-chain: the measured top-level deficit degrades by `√(32·m·δ)`
/// per split; `chain[m]` is the δ in force when `m` members remain.
fn forward_delta_chain(n: usize, delta_top: f64) -> Vec<f64> {
    let mut chain = vec![0.0; n + 1];
    if n >= 1 {
        chain[n] = delta_top;
    }
    for m in (1..n).rev() {
        let next = chain[m + 1];
        chain[m] = next + (32.0 * m as f64 * next).sqrt();
    }
    chain
}

/// Positive-case recursion: for positive functionals in the unit ball with
/// supports under `context`, produce pairwise orthogonal projections under
/// `context` capturing each functional's mass. The last functional is split
/// off via the positive/negative spectral projections of
/// `avg(first n−1) − last`; the sign projection norms the difference exactly,
/// which is what the finite dimensions buy us.
fn positive_family_projections(
    omegas: &[Functional],
    chain: &[f64],
    stage: &str,
    log: &mut Vec<SearchStep>,
) -> Result<Vec<Projection>> {
    let n = omegas.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        // the support projection norms a positive functional completely
        return Ok(vec![omegas[0].right_support().clone()]);
    }
    let inv = 1.0 / (n - 1) as f64;
    let mut sigma = Element::zeros(omegas[0].shape());
    for w in &omegas[..n - 1] {
        sigma = sigma.add(w.density())?;
    }
    sigma = sigma.scale(inv);
    let diff = sigma.sub(omegas[n - 1].density())?;
    let p_plus = diff.spectral_projection(0.0, ThresholdMode::StrictAbove)?;
    let p_minus = diff
        .neg()
        .spectral_projection(0.0, ThresholdMode::StrictAbove)?;

    let delta = chain.get(n).copied().unwrap_or(0.0);
    let gate_head = 1.0 - 4.0 * (n - 1) as f64 * delta;
    let gate_last = 1.0 - 4.0 * delta;
    let mut measured = Vec::with_capacity(n);
    for w in &omegas[..n - 1] {
        measured.push(w.evaluate(p_plus.element())?.re);
    }
    let last_mass = omegas[n - 1].evaluate(p_minus.element())?.re;
    measured.push(last_mass);
    let passed = measured[..n - 1].iter().all(|&m| m > gate_head) && last_mass > gate_last;
    log.push(SearchStep {
        stage: stage.to_string(),
        family_size: n,
        delta,
        gate: gate_head,
        measured: measured.clone(),
        passed,
    });

    // compress the leading family into the positive part and recurse
    let mut compressed = Vec::with_capacity(n - 1);
    for w in &omegas[..n - 1] {
        compressed.push(w.compress(&p_plus, &p_plus)?);
    }
    let mut out = positive_family_projections(&compressed, chain, stage, log)?;
    out.push(p_minus);
    Ok(out)
}

/// Finite orthogonal extraction: given functionals in the unit ball whose
/// compressions `tφ_k s` span ℓ¹ well enough for the requested accuracy,
/// produce pairwise orthogonal `p_k ≤ s`, `q_k ≤ t`, and normalized pairwise
/// orthogonal `ψ_k = q_kφ_kp_k/‖q_kφ_kp_k‖` with `‖φ_k − ψ_k‖ < ε`. The
/// general case reduces to two runs of the positive recursion, on `|tφ_k s|`
/// (right side) and `|sφ_k*t|` (left side).
pub fn finite_orthogonal_extraction(
    phis: &[Functional],
    s: &Projection,
    t: &Projection,
    eps: f64,
    budget: &SearchBudget,
) -> Result<ExtractionResult> {
    if phis.is_empty() {
        return Err(Error::InvalidArgument("empty family".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in (0,1), got {eps}"
        )));
    }
    let tol = 1e-9;
    for (k, phi) in phis.iter().enumerate() {
        if phi.norm() > 1.0 + tol {
            return Err(Error::Precondition(format!(
                "functional {k} outside the unit ball: norm {:.9}",
                phi.norm()
            )));
        }
    }
    // compress and measure the compressed family
    let mut compressed = Vec::with_capacity(phis.len());
    for phi in phis {
        compressed.push(phi.compress(t, s)?);
    }
    let allowed_delta = (4.0 * (eps / 5.0) * (eps / 5.0)).clamp(1e-9, 0.45);
    for (k, c) in compressed.iter().enumerate() {
        if c.norm() < 1.0 - allowed_delta - tol {
            return Err(Error::Precondition(format!(
                "compressed norm of functional {k} is {:.9}, below 1-delta = {:.9}",
                c.norm(),
                1.0 - allowed_delta
            )));
        }
    }
    let span_cert = span::l1_lower_constant_functionals(&compressed, budget)?;
    let measured_span = span_cert.r_estimate;
    let delta_measured = (1.0 - measured_span).max(0.0);
    if delta_measured > allowed_delta {
        return Err(Error::InsufficientSpan {
            measured: measured_span,
            required: 1.0 - allowed_delta,
        });
    }

    let n = phis.len();
    let chain = forward_delta_chain(n, delta_measured.max(1e-15));
    let mut log = Vec::new();

    // right side: positive recursion on |tφs|
    let mut right_abs = Vec::with_capacity(n);
    for c in &compressed {
        right_abs.push(c.abs()?);
    }
    let right_projections = positive_family_projections(&right_abs, &chain, "right", &mut log)?;

    // left side: positive recursion on |sφ*t| = |(tφs)*|
    let mut left_abs = Vec::with_capacity(n);
    for c in &compressed {
        left_abs.push(c.abs_adjoint()?);
    }
    let left_projections = positive_family_projections(&left_abs, &chain, "left", &mut log)?;

    // build and post-verify the outputs
    let mut outputs = Vec::with_capacity(n);
    let mut distances = Vec::with_capacity(n);
    let mut diagnostic = None;
    let mut certified = true;
    for k in 0..n {
        let raw = phis[k].compress(&left_projections[k], &right_projections[k])?;
        let cutoff = 1e-12 * phis[k].shape().tau_unit().max(1.0);
        if raw.norm() <= cutoff {
            certified = false;
            diagnostic = Some(format!(
                "compression of functional {k} is degenerate (norm {:.3e})",
                raw.norm()
            ));
            outputs.push(Functional::zero(phis[k].shape()));
            distances.push(phis[k].norm());
            continue;
        }
        let psi = raw.normalized()?;
        let d = phis[k].distance(&psi)?;
        if d >= eps {
            certified = false;
            diagnostic = Some(format!(
                "distance |phi_{k} - psi_{k}| = {d:.6} exceeds eps {eps}"
            ));
        }
        outputs.push(psi);
        distances.push(d);
    }
    // orthogonality, normalization and context containment, from scratch
    for i in 0..n {
        if outputs[i].norm() > 0.0 && (outputs[i].norm() - 1.0).abs() > 1e-9 {
            certified = false;
            diagnostic = Some(format!("output {i} is not normalized"));
        }
        for j in (i + 1)..n {
            if !outputs[i].are_orthogonal(&outputs[j], 1e-8) {
                certified = false;
                diagnostic = Some(format!("outputs {i} and {j} are not orthogonal"));
            }
        }
    }
    for p in &right_projections {
        if !p.is_below(s, 1e-8) {
            certified = false;
            diagnostic = Some("a right projection escapes s".into());
        }
    }
    for q in &left_projections {
        if !q.is_below(t, 1e-8) {
            certified = false;
            diagnostic = Some("a left projection escapes t".into());
        }
    }
    Ok(ExtractionResult {
        indices: (0..n).collect(),
        right_projections,
        left_projections,
        outputs,
        distances,
        epsilon: eps,
        measured_span,
        certified,
        search_log: log,
        diagnostic,
    })
}

/// Positive witnesses for an r-isomorphic normalized family: pairwise
/// orthogonal positive normalized `a_n`, `b_n` and indices `m_n` with
/// `|φ_{m_n}|(a_n)` and `|φ*_{m_n}|(b_n)` above `(1−ε)r²` — above `(1−ε)r` in
/// selfadjoint mode, where a single `a_n = b_n = |x_n|` comes from the sign
/// element of the compressed block.
#[derive(Debug, Serialize)]
pub struct WitnessResult {
    pub indices: Vec<usize>,
    pub right_witnesses: Vec<Element>,
    pub left_witnesses: Vec<Element>,
    pub attained_right: Vec<f64>,
    pub attained_left: Vec<f64>,
    pub threshold: f64,
    pub certified: bool,
    pub diagnostic: Option<String>,
}

/// James blocking → one extraction pass over the blocks → in-block pigeonhole.
pub fn positive_witnesses(
    phis: &[Functional],
    r: f64,
    eps: f64,
    selfadjoint_mode: bool,
    witnesses: usize,
    budget: &SearchBudget,
) -> Result<WitnessResult> {
    if !(r > 0.0 && r <= 1.0) || !(eps > 0.0 && eps < 1.0) || witnesses == 0 {
        return Err(Error::InvalidArgument(
            "need r in (0,1], eps in (0,1), witnesses >= 1".into(),
        ));
    }
    for (k, phi) in phis.iter().enumerate() {
        if (phi.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::Precondition(format!(
                "functional {k} is not normalized: norm {:.9}",
                phi.norm()
            )));
        }
    }
    let densities: Vec<Element> = phis.iter().map(|p| p.density().clone()).collect();
    let mut budget = budget.clone();
    if selfadjoint_mode {
        budget.real_coefficients = true;
    }
    let span_cert = span::l1_lower_constant(&densities, &budget)?;
    if span_cert.r_estimate < r - 1e-6 {
        return Err(Error::InsufficientSpan {
            measured: span_cert.r_estimate,
            required: r,
        });
    }

    let threshold = if selfadjoint_mode {
        (1.0 - eps) * r
    } else {
        (1.0 - eps) * r * r
    };

    // James blocking towards near-isometric blocks, then one extraction pass
    let deltas = vec![(eps / 8.0).min(0.05); witnesses];
    let blocking = span::james_blocks(&densities, r, &deltas, &budget)?;
    if blocking.blocks.len() < witnesses {
        return Ok(WitnessResult {
            indices: Vec::new(),
            right_witnesses: Vec::new(),
            left_witnesses: Vec::new(),
            attained_right: Vec::new(),
            attained_left: Vec::new(),
            threshold,
            certified: false,
            diagnostic: Some(format!(
                "blocking produced {} of {} blocks: {:?}",
                blocking.blocks.len(),
                witnesses,
                blocking.diagnostic
            )),
        });
    }
    let mut block_fns = Vec::with_capacity(witnesses);
    for y in blocking.block_elements.iter().take(witnesses) {
        block_fns.push(Functional::from_density(y.clone())?);
    }
    let shape = phis[0].shape().clone();
    let one = Projection::identity(&shape);
    let eps_inner = (eps / 3.0).min(0.4);
    let extraction = finite_orthogonal_extraction(&block_fns, &one, &one, eps_inner, &budget)?;

    let mut indices = Vec::with_capacity(witnesses);
    let mut right_witnesses = Vec::with_capacity(witnesses);
    let mut left_witnesses = Vec::with_capacity(witnesses);
    let mut attained_right = Vec::with_capacity(witnesses);
    let mut attained_left = Vec::with_capacity(witnesses);
    let mut diagnostic = extraction.diagnostic.clone();

    for (k, block) in blocking.blocks.iter().take(witnesses).enumerate() {
        if selfadjoint_mode {
            // sign element of the compressed block; |x| is its support
            let p = &extraction.right_projections[k];
            let z = p.element().mul(block_fns[k].density())?.mul(p.element())?;
            let x = z.sign_unitary()?;
            let a = x.mul(&x)?;
            let mut best = (block.indices[0], f64::NEG_INFINITY);
            for &i in &block.indices {
                let v = phis[i].abs()?.evaluate(&a)?.re;
                if v > best.1 {
                    best = (i, v);
                }
            }
            indices.push(best.0);
            attained_right.push(best.1);
            let v_left = phis[best.0].abs_adjoint()?.evaluate(&a)?.re;
            attained_left.push(v_left);
            right_witnesses.push(a.clone());
            left_witnesses.push(a);
        } else {
            let p = extraction.right_projections[k].clone();
            let q = extraction.left_projections[k].clone();
            let mut best = (block.indices[0], f64::NEG_INFINITY, 0.0, 0.0);
            for &i in &block.indices {
                let vr = phis[i].abs_mass(&p)?;
                let vl = phis[i].abs_adjoint()?.abs_mass(&q)?;
                let score = vr.min(vl);
                if score > best.1 {
                    best = (i, score, vr, vl);
                }
            }
            indices.push(best.0);
            attained_right.push(best.2);
            attained_left.push(best.3);
            right_witnesses.push(p.into_element());
            left_witnesses.push(q.into_element());
        }
    }

    let mut certified = true;
    for k in 0..witnesses {
        if attained_right[k] <= threshold - 1e-9 || attained_left[k] <= threshold - 1e-9 {
            certified = false;
            diagnostic = Some(format!(
                "witness {k} attains ({:.6}, {:.6}) below threshold {threshold:.6}",
                attained_right[k], attained_left[k]
            ));
        }
        let wr = &right_witnesses[k];
        if !wr.is_positive(1e-8) || (wr.norm_op() - 1.0).abs() > 1e-8 {
            certified = false;
            diagnostic = Some(format!("right witness {k} is not positive normalized"));
        }
        let wl = &left_witnesses[k];
        if !wl.is_positive(1e-8) || (wl.norm_op() - 1.0).abs() > 1e-8 {
            certified = false;
            diagnostic = Some(format!("left witness {k} is not positive normalized"));
        }
        for j in (k + 1)..witnesses {
            let ortho_r = crate::algebra::is_orthogonal_elements(
                &right_witnesses[k],
                &right_witnesses[j],
                1e-8,
            )?;
            let ortho_l = crate::algebra::is_orthogonal_elements(
                &left_witnesses[k],
                &left_witnesses[j],
                1e-8,
            )?;
            if !ortho_r || !ortho_l {
                certified = false;
                diagnostic = Some(format!("witnesses {k} and {j} are not orthogonal"));
            }
        }
    }
    Ok(WitnessResult {
        indices,
        right_witnesses,
        left_witnesses,
        attained_right,
        attained_left,
        threshold,
        certified,
        diagnostic,
    })
}
