//! End-to-end harness tests: the binary's exit-code contract, byte-stable
//! artifacts under a fixed master seed, and the report aggregation.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ncl1")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ncl1_harness_{tag}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn props_audit_exits_zero_with_artifacts() {
    let dir = temp_dir("props");
    let cfg = write_config(
        &dir,
        "props.json",
        r#"{"name": "audit", "pipeline": ["props"], "trials": 200, "seed": 4, "criterion": "AC1"}"#,
    );
    let out = Command::new(bin())
        .args(["props", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.join("audit_props.csv")).unwrap();
    assert!(csv.starts_with("trial,lemma,label,lhs,rhs,slack\n"));
    // 200 trials x 2 lemmas x 3 bounds
    assert_eq!(csv.lines().count(), 1 + 200 * 6);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("audit_props.json")).unwrap())
            .unwrap();
    assert_eq!(json["certified"], true);
    assert_eq!(json["violations"], 0);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn malformed_config_exits_one_with_schema_error() {
    let dir = temp_dir("badcfg");
    let cfg = write_config(&dir, "bad.json", r#"{"pipeline": ["teleport"]}"#);
    let out = Command::new(bin())
        .args(["props", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unknown pipeline op"), "stderr: {stderr}");

    // syntactically broken JSON also exits 1
    let cfg = write_config(&dir, "broken.json", "{not json");
    let out = Command::new(bin())
        .args(["props", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir_a = temp_dir("det_a");
    let dir_b = temp_dir("det_b");
    let body = r#"{
        "name": "demo",
        "pipeline": ["orthogonalize"],
        "generator": {"name": "remark1", "params": {"atoms": 4096, "len": 13, "indices": "dyadic"}},
        "depth": 6,
        "seed": 12
    }"#;
    for dir in [&dir_a, &dir_b] {
        let cfg = write_config(dir, "cfg.json", body);
        let out = Command::new(bin())
            .args(["orthogonalize", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let a = std::fs::read(dir_a.join("demo_orthogonalize.csv")).unwrap();
    let b = std::fs::read(dir_b.join("demo_orthogonalize.csv")).unwrap();
    assert_eq!(a, b, "CSV artifacts must be byte-stable for a fixed seed");
    std::fs::remove_dir_all(&dir_a).unwrap();
    std::fs::remove_dir_all(&dir_b).unwrap();
}

#[test]
fn tau_null_demo_bounds_dominated_by_dyadic_cap() {
    let dir = temp_dir("demo");
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{
            "name": "remark1_demo",
            "pipeline": ["orthogonalize"],
            "generator": {"name": "remark1", "params": {"atoms": 16384, "len": 15, "indices": "dyadic"}},
            "depth": 8,
            "criterion": "AC3"
        }"#,
    );
    let out = Command::new(bin())
        .args(["orthogonalize", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.join("remark1_demo_orthogonalize.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "l,index,bound,measured_distance,gauge"
    );
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let l: i32 = cols[0].parse().unwrap();
        let bound: f64 = cols[2].parse().unwrap();
        let measured: f64 = cols[3].parse().unwrap();
        let cap = (2.0f64).powi(-(l - 1));
        assert!(
            bound <= cap + 1e-9,
            "bound column must be dominated by 2^-(l-1)"
        );
        assert!(measured <= bound + 1e-9);
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn report_lists_every_criterion_exactly_once() {
    let dir = temp_dir("report");
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{"name": "audit", "pipeline": ["props"], "trials": 50, "criterion": "AC1"}"#,
    );
    let out = Command::new(bin())
        .args(["props", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = Command::new(bin())
        .args(["report", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    let criteria = summary["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 10);
    let ids: Vec<&str> = criteria.iter().map(|c| c["id"].as_str().unwrap()).collect();
    let unique: std::collections::BTreeSet<&str> = ids.iter().copied().collect();
    assert_eq!(unique.len(), 10, "every criterion id appears exactly once");
    assert_eq!(
        criteria.iter().find(|c| c["id"] == "AC1").unwrap()["status"],
        "pass"
    );
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn gen_writes_summary_and_small_elements() {
    let dir = temp_dir("gen");
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{
            "name": "seq",
            "pipeline": ["probe"],
            "generator": {"name": "disjoint_supports", "params": {"n": 4}}
        }"#,
    );
    let out = Command::new(bin())
        .args(["gen", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.join("seq_gen.csv")).unwrap();
    assert!(csv.starts_with("index,norm1,norm_op,gauge\n"));
    assert_eq!(csv.lines().count(), 5);
    assert!(dir.join("seq_elements.json").exists());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn extraction_pipeline_certifies_disjoint_family() {
    let dir = temp_dir("extract");
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{
            "name": "dis",
            "pipeline": ["extract"],
            "generator": {"name": "disjoint_supports", "params": {"n": 3}},
            "eps": 0.2
        }"#,
    );
    let out = Command::new(bin())
        .args(["extract", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("dis_extract.json")).unwrap())
            .unwrap();
    assert_eq!(json["certified"], true);
    for d in json["distances"].as_array().unwrap() {
        assert!(d.as_f64().unwrap() < 1e-8);
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn uncertified_ledger_exits_two() {
    // an eta schedule far below the noise floor cannot reach the requested
    // depth: the flagged partial ledger must exit 2
    let dir = temp_dir("exit2");
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{
            "name": "too_tight",
            "pipeline": ["orthogonalize"],
            "generator": {"name": "orthogonal_plus_noise", "params": {"n": 4, "noise": 1e-2}},
            "depth": 4,
            "eps": 1e-6,
            "seed": 3
        }"#,
    );
    let out = Command::new(bin())
        .args(["orthogonalize", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(2),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.join("too_tight_orthogonalize.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(json["certified"], false);
    std::fs::remove_dir_all(&dir).unwrap();
}
