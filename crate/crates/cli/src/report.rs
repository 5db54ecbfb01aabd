//! Artifact writers and the acceptance summary.
//!
//! CSV artifacts have fixed column orders and are byte-stable for a fixed
//! seed. The summary lists every acceptance criterion id exactly once with a
//! status derived from the tagged artifacts found in the output directory.

use anyhow::Context;
use serde_json::json;
use std::path::{Path, PathBuf};

pub const CRITERIA: &[&str] = &[
    "AC1", "AC2", "AC3", "AC4", "AC5", "AC6", "AC7", "AC8", "AC9", "AC10",
];

/// Write rows with a fixed header; empty results produce a header-only file.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
    let mut wtr =
        csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    wtr.write_record(header)?;
    for row in rows {
        wtr.write_record(row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Scan the tagged artifacts in `dir` and emit `summary.json` + `summary.csv`
/// with one line per acceptance criterion: pass (every tagged artifact
/// certified), fail (some tagged artifact uncertified), or not-run.
pub fn emit_summary(dir: &Path) -> anyhow::Result<(PathBuf, PathBuf)> {
    let mut per_criterion: std::collections::BTreeMap<String, (usize, usize)> =
        std::collections::BTreeMap::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("scan {}", dir.display()))? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        if path.file_name().and_then(|n| n.to_str()) == Some("summary.json") {
            continue;
        }
        let Ok(text) = std::fs::read_to_string(&path) else {
            continue;
        };
        let Ok(value) = serde_json::from_str::<serde_json::Value>(&text) else {
            continue;
        };
        let Some(criterion) = value.get("criterion").and_then(|c| c.as_str()) else {
            continue;
        };
        // only result bundles carry a certification verdict; configs and other
        // JSON files in the directory are skipped
        let Some(certified) = value.get("certified").and_then(|c| c.as_bool()) else {
            continue;
        };
        let slot = per_criterion.entry(criterion.to_string()).or_insert((0, 0));
        slot.0 += 1;
        if certified {
            slot.1 += 1;
        }
    }
    let statuses: Vec<serde_json::Value> = CRITERIA
        .iter()
        .map(|&id| {
            let status = match per_criterion.get(id) {
                None => "not-run",
                Some((total, passed)) if passed == total => "pass",
                Some(_) => "fail",
            };
            json!({"id": id, "status": status})
        })
        .collect();
    let json_path = dir.join("summary.json");
    write_json(&json_path, &json!({ "criteria": statuses }))?;
    let rows: Vec<Vec<String>> = CRITERIA
        .iter()
        .map(|&id| {
            let status = match per_criterion.get(id) {
                None => "not-run",
                Some((total, passed)) if passed == total => "pass",
                Some(_) => "fail",
            };
            vec![id.to_string(), status.to_string()]
        })
        .collect();
    let csv_path = dir.join("summary.csv");
    write_csv(&csv_path, &["criterion", "status"], &rows)?;
    Ok((json_path, csv_path))
}
