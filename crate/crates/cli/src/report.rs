//! The `report` command: folds JSON summaries into one table per criterion.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::json;

use annspec::{Error, Result};

use crate::output::{Artifact, Cell, Check, Status, Summary, Table, SCHEMA};

/// Number of acceptance criteria a summary check can refer to.
pub const CRITERIA: u8 = 14;

pub fn load_summaries(dir: &Path) -> Result<Vec<(String, Summary)>> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        let text = fs::read_to_string(&p)?;
        // Files that are not summaries (including earlier reports) are skipped.
        let Ok(summary) = serde_json::from_str::<Summary>(&text) else { continue };
        if summary.schema != SCHEMA || summary.command == "report" {
            continue;
        }
        let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        out.push((stem, summary));
    }
    Ok(out)
}

pub fn report(dir: &Path) -> Result<Artifact> {
    if !dir.is_dir() {
        return Err(Error::Validation(format!("no summaries directory at {}", dir.display())));
    }
    let summaries = load_summaries(dir)?;
    let mut per: BTreeMap<u8, Vec<(String, Check)>> = BTreeMap::new();
    let mut table = Table::new(&["criterion", "source", "check", "status", "value", "bound"]);
    for (stem, s) in &summaries {
        for c in &s.checks {
            let label = c.criterion.map_or(String::from("-"), |k| k.to_string());
            table.push(vec![
                Cell::Text(label),
                Cell::Text(stem.clone()),
                Cell::Text(c.name.replace(',', ";")),
                c.status.as_str().into(),
                c.value.into(),
                Cell::Text(c.bound.replace(',', ";")),
            ]);
            if let Some(k) = c.criterion {
                per.entry(k).or_default().push((stem.clone(), c.clone()));
            }
        }
    }
    let mut checks = Vec::new();
    let mut criteria = BTreeMap::new();
    for k in 1..=CRITERIA {
        let entries = per.get(&k).map(Vec::as_slice).unwrap_or(&[]);
        let status = if entries.iter().any(|(_, c)| c.status == Status::Fail) {
            "fail"
        } else if entries.iter().any(|(_, c)| c.status == Status::Pass) {
            "pass"
        } else {
            "missing"
        };
        criteria.insert(k.to_string(), json!({ "status": status, "checks": entries.len() }));
        match status {
            "missing" => {}
            s => checks.push(Check::bound(format!("criterion {k}"), Some(k), entries.len() as f64, s == "pass", "all checks pass")),
        }
    }
    let results = json!({ "summaries": summaries.len(), "criteria": criteria });
    Ok(Artifact { table, results, checks })
}

pub fn print_table(artifact: &Artifact) {
    if let Some(crit) = artifact.results["criteria"].as_object() {
        let mut keys: Vec<u8> = crit.keys().filter_map(|k| k.parse().ok()).collect();
        keys.sort_unstable();
        for k in keys {
            let v = &crit[&k.to_string()];
            println!("criterion {k:>2}  {:<8} ({} checks)", v["status"].as_str().unwrap_or("?"), v["checks"]);
        }
    }
}
