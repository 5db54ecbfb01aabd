//! Pipeline execution: generates the configured sequence, runs each requested
//! operation, and writes JSON + CSV artifacts. Deterministic for a fixed
//! master seed; an experiment is certified when every executed check passed.

use anyhow::{bail, Context};
use serde_json::json;
use std::path::{Path, PathBuf};

use ncl1_core::algebra::{random_suite, AlgebraShape, ElementKind};
use ncl1_core::functional::Functional;
use ncl1_core::ortho::{
    almost_isometric_orthogonalize, tau_null_orthogonalize, trichotomy_probe, ProbeThresholds,
};
use ncl1_core::perturb::{
    finite_orthogonal_extraction, polar_compression_bounds, positive_compression_bounds,
};
use ncl1_core::span::{l1_lower_constant, tail_delta_schedule, SearchBudget};
use ncl1_core::{measure, Element, Projection};

use crate::config::ExperimentConfig;
use crate::generators::{generate_sequence, GeneratedSequence};
use crate::report;

/// Outcome of one experiment run.
pub struct RunOutcome {
    pub certified: bool,
    pub artifacts: Vec<PathBuf>,
}

fn audit_shapes(cfg: &ExperimentConfig) -> anyhow::Result<Vec<std::sync::Arc<AlgebraShape>>> {
    if let Some(a) = &cfg.algebra {
        return Ok(vec![AlgebraShape::new(a.dims.clone(), a.weights.clone())?]);
    }
    Ok(vec![
        AlgebraShape::discretized_interval(16)?,
        AlgebraShape::new(vec![4], vec![1.0])?,
        AlgebraShape::new(vec![2, 3], vec![1.0, 2.0])?,
        AlgebraShape::new(vec![2, 2, 2], vec![0.5, 1.0, 2.0])?,
    ])
}

fn probe_budget() -> SearchBudget {
    SearchBudget {
        max_grid_evals: 3_000,
        refine_steps: 60,
        exact_search_max: 3,
        ..SearchBudget::default()
    }
}

fn needs_generator(op: &str) -> bool {
    matches!(op, "l1const" | "extract" | "orthogonalize" | "probe")
}

/// Execute every pipeline stage of the experiment, writing artifacts under
/// `out_dir`. Returns the overall certification verdict.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> anyhow::Result<RunOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    let mut artifacts = Vec::new();
    let mut certified = true;

    let sequence = if cfg.pipeline.iter().any(|op| needs_generator(op)) {
        let g = cfg
            .generator
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("pipeline needs a generator"))?;
        Some(generate_sequence(g, cfg.algebra.as_ref(), cfg.seed)?)
    } else {
        None
    };

    for op in &cfg.pipeline {
        let (ok, files) = match op.as_str() {
            "props" => run_props(cfg, out_dir)?,
            "l1const" => run_l1const(cfg, sequence.as_ref().expect("generated"), out_dir)?,
            "extract" => run_extract(cfg, sequence.as_ref().expect("generated"), out_dir)?,
            "orthogonalize" => {
                run_orthogonalize(cfg, sequence.as_ref().expect("generated"), out_dir)?
            }
            "probe" => run_probe(cfg, sequence.as_ref().expect("generated"), out_dir)?,
            other => bail!("unknown pipeline op '{other}'"),
        };
        certified &= ok;
        artifacts.extend(files);
    }
    Ok(RunOutcome {
        certified,
        artifacts,
    })
}

/// Randomized audit of the two compression-bound suites.
fn run_props(cfg: &ExperimentConfig, out_dir: &Path) -> anyhow::Result<(bool, Vec<PathBuf>)> {
    let shapes = audit_shapes(cfg)?;
    let mut rows = Vec::new();
    let mut min_slack = f64::INFINITY;
    let mut violations = 0usize;
    for trial in 0..cfg.trials {
        let shape = &shapes[trial % shapes.len()];
        let seed = cfg.trial_seed(trial);
        let omega_raw = random_suite(shape, ElementKind::Positive, seed);
        let omega = Functional::from_density(omega_raw.scale(1.0 / omega_raw.norm_l1()))?;
        let phi = Functional::from_density(random_suite(
            shape,
            ElementKind::Generic,
            seed.wrapping_add(1),
        ))?;
        let a_raw = random_suite(shape, ElementKind::Generic, seed.wrapping_add(2));
        let a = a_raw.scale(1.0 / a_raw.norm_op().max(1e-12));
        let b_raw = random_suite(shape, ElementKind::Generic, seed.wrapping_add(3));
        let b = b_raw.scale(1.0 / b_raw.norm_op().max(1e-12));

        for (lemma, reports) in [
            (
                "positive",
                positive_compression_bounds(&omega, &a, &b, cfg.tol)?,
            ),
            ("polar", polar_compression_bounds(&phi, &a, &b, cfg.tol)?),
        ] {
            for r in &reports {
                min_slack = min_slack.min(r.slack);
                if r.slack < -1e-8 {
                    violations += 1;
                }
                rows.push(vec![
                    trial.to_string(),
                    lemma.to_string(),
                    r.label.clone(),
                    format!("{}", r.lhs),
                    format!("{}", r.rhs),
                    format!("{}", r.slack),
                ]);
            }
        }
    }
    let ok = violations == 0;
    let csv = out_dir.join(format!("{}_props.csv", cfg.name));
    report::write_csv(
        &csv,
        &["trial", "lemma", "label", "lhs", "rhs", "slack"],
        &rows,
    )?;
    let json_path = out_dir.join(format!("{}_props.json", cfg.name));
    report::write_json(
        &json_path,
        &json!({
            "name": cfg.name,
            "op": "props",
            "criterion": cfg.criterion,
            "certified": ok,
            "trials": cfg.trials,
            "violations": violations,
            "min_slack": min_slack,
        }),
    )?;
    Ok((ok, vec![csv, json_path]))
}

fn run_l1const(
    cfg: &ExperimentConfig,
    seq: &GeneratedSequence,
    out_dir: &Path,
) -> anyhow::Result<(bool, Vec<PathBuf>)> {
    let members = seq.materialize();
    let budget = probe_budget();
    let cert = l1_lower_constant(&members, &budget)?;
    let tails = tail_delta_schedule(&members, &budget)?;
    let json_path = out_dir.join(format!("{}_l1const.json", cfg.name));
    report::write_json(
        &json_path,
        &json!({
            "name": cfg.name,
            "op": "l1const",
            "criterion": cfg.criterion,
            "certified": true,
            "certificate": cert,
            "tail_deltas": tails.delta_schedule,
            "trend_supports_almost_isometric": tails.trend_supports_almost_isometric,
        }),
    )?;
    let rows: Vec<Vec<String>> = tails
        .delta_schedule
        .iter()
        .enumerate()
        .map(|(m, d)| vec![(m + 1).to_string(), format!("{d}")])
        .collect();
    let csv = out_dir.join(format!("{}_l1const.csv", cfg.name));
    report::write_csv(&csv, &["m", "delta"], &rows)?;
    Ok((true, vec![csv, json_path]))
}

fn run_extract(
    cfg: &ExperimentConfig,
    seq: &GeneratedSequence,
    out_dir: &Path,
) -> anyhow::Result<(bool, Vec<PathBuf>)> {
    let members = seq.materialize();
    let mut phis = Vec::with_capacity(members.len());
    for m in &members {
        phis.push(Functional::from_density(m.scale(1.0 / m.norm_l1()))?);
    }
    let shape = phis[0].shape().clone();
    let one = Projection::identity(&shape);
    let result =
        finite_orthogonal_extraction(&phis, &one, &one, cfg.eps, &SearchBudget::default())?;
    let rows: Vec<Vec<String>> = result
        .distances
        .iter()
        .enumerate()
        .map(|(k, d)| vec![k.to_string(), format!("{d}")])
        .collect();
    let csv = out_dir.join(format!("{}_extract.csv", cfg.name));
    report::write_csv(&csv, &["k", "distance"], &rows)?;
    let json_path = out_dir.join(format!("{}_extract.json", cfg.name));
    report::write_json(
        &json_path,
        &json!({
            "name": cfg.name,
            "op": "extract",
            "criterion": cfg.criterion,
            "certified": result.certified,
            "epsilon": result.epsilon,
            "measured_span": result.measured_span,
            "distances": result.distances,
            "search_log": result.search_log,
            "diagnostic": result.diagnostic,
        }),
    )?;
    Ok((result.certified, vec![csv, json_path]))
}

fn run_orthogonalize(
    cfg: &ExperimentConfig,
    seq: &GeneratedSequence,
    out_dir: &Path,
) -> anyhow::Result<(bool, Vec<PathBuf>)> {
    let functional_mode = cfg
        .generator
        .as_ref()
        .is_some_and(|g| g.name == "orthogonal_plus_noise" || g.name == "random_density");
    let csv_path = out_dir.join(format!("{}_orthogonalize.csv", cfg.name));
    let json_path = out_dir.join(format!("{}_orthogonalize.json", cfg.name));
    if functional_mode {
        let members = seq.materialize();
        let mut phis = Vec::with_capacity(members.len());
        for m in &members {
            phis.push(Functional::from_density(m.scale(1.0 / m.norm_l1()))?);
        }
        let depth = cfg.depth.min(phis.len());
        let etas: Vec<f64> = (1..=depth)
            .map(|n| cfg.eps * (2.0f64).powi(-(n as i32)))
            .collect();
        let ledger = almost_isometric_orthogonalize(&phis, &etas, depth, &SearchBudget::default())?;
        std::fs::write(&csv_path, ledger.to_csv())?;
        report::write_json(
            &json_path,
            &json!({
                "name": cfg.name,
                "op": "orthogonalize",
                "criterion": cfg.criterion,
                "certified": ledger.certified,
                "mode": "almost_isometric",
                "ledger": ledger,
            }),
        )?;
        Ok((ledger.certified, vec![csv_path, json_path]))
    } else {
        let ledger = tau_null_orthogonalize(seq.as_sequence(), cfg.depth)?;
        std::fs::write(&csv_path, ledger.to_csv())?;
        report::write_json(
            &json_path,
            &json!({
                "name": cfg.name,
                "op": "orthogonalize",
                "criterion": cfg.criterion,
                "certified": ledger.certified,
                "mode": "tau_null",
                "ledger": ledger,
            }),
        )?;
        Ok((ledger.certified, vec![csv_path, json_path]))
    }
}

fn run_probe(
    cfg: &ExperimentConfig,
    seq: &GeneratedSequence,
    out_dir: &Path,
) -> anyhow::Result<(bool, Vec<PathBuf>)> {
    let members = seq.materialize();
    let report_data = trichotomy_probe(&members, &probe_budget(), ProbeThresholds::default())?;
    let rows: Vec<Vec<String>> = members
        .iter()
        .enumerate()
        .map(|(i, _)| {
            vec![
                (i + 1).to_string(),
                format!("{}", report_data.norms[i]),
                format!("{}", report_data.gauges[i]),
            ]
        })
        .collect();
    let csv = out_dir.join(format!("{}_probe.csv", cfg.name));
    report::write_csv(&csv, &["n", "norm1", "gauge"], &rows)?;
    let json_path = out_dir.join(format!("{}_probe.json", cfg.name));
    report::write_json(
        &json_path,
        &json!({
            "name": cfg.name,
            "op": "probe",
            "criterion": cfg.criterion,
            "certified": true,
            "report": report_data,
        }),
    )?;
    Ok((true, vec![csv, json_path]))
}

/// The `gen` subcommand: a per-member summary (and raw elements when the
/// payload is small enough to be worth writing).
pub fn run_gen(cfg: &ExperimentConfig, out_dir: &Path) -> anyhow::Result<RunOutcome> {
    let g = cfg
        .generator
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("gen needs a generator"))?;
    std::fs::create_dir_all(out_dir)?;
    let seq = generate_sequence(g, cfg.algebra.as_ref(), cfg.seed)?;
    let mut rows = Vec::new();
    let mut total_entries = 0usize;
    let mut elements: Vec<Element> = Vec::new();
    for i in 0..seq.len() {
        let x = seq.get(i);
        rows.push(vec![
            seq.source_index(i).to_string(),
            format!("{}", x.norm_l1()),
            format!("{}", x.norm_op()),
            format!("{}", measure::gauge(&x)?),
        ]);
        total_entries += x.shape().total_dim();
        if total_entries <= 1 << 16 {
            elements.push(x);
        }
    }
    let csv = out_dir.join(format!("{}_gen.csv", cfg.name));
    report::write_csv(&csv, &["index", "norm1", "norm_op", "gauge"], &rows)?;
    let mut artifacts = vec![csv];
    if elements.len() == seq.len() {
        let path = out_dir.join(format!("{}_elements.json", cfg.name));
        report::write_json(&path, &serde_json::to_value(&elements)?)?;
        artifacts.push(path);
    }
    Ok(RunOutcome {
        certified: true,
        artifacts,
    })
}
