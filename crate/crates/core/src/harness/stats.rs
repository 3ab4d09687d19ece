//! Corpus statistics: validate, solve and play every scenario in a directory.

use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::rules::Outcome;
use crate::scenario::{parse_scenario, validate_scenario};

use super::{policy_by_name, run_policy};

const POLICIES: [&str; 3] = ["omniscient", "informed", "naive"];

#[derive(Debug, Clone, Serialize)]
pub struct PolicyRun {
    pub policy: &'static str,
    pub outcome: String,
    pub ticks: u64,
    pub timed_out: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioStats {
    pub id: String,
    pub file: String,
    pub parse_error: Option<String>,
    pub nodes: usize,
    pub edges: usize,
    pub errors: Vec<&'static str>,
    pub warnings: Vec<&'static str>,
    /// "yes", "no" or "unknown"; absent for rejected scenarios.
    pub solvable: Option<&'static str>,
    pub runs: Vec<PolicyRun>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub scenarios: usize,
    pub accepted: usize,
    pub solvable: usize,
    pub wins: Vec<(&'static str, usize)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusReport {
    pub scenarios: Vec<ScenarioStats>,
    pub summary: Summary,
}

impl CorpusReport {
    #[must_use]
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn scenario_files(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    files.sort();
    Ok(files)
}

fn analyze(path: &Path) -> ScenarioStats {
    let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = path.file_stem().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let mut stats = ScenarioStats {
        id: stem,
        file,
        parse_error: None,
        nodes: 0,
        edges: 0,
        errors: Vec::new(),
        warnings: Vec::new(),
        solvable: None,
        runs: Vec::new(),
    };
    let spec = match std::fs::read_to_string(path).map_err(|e| e.to_string()).and_then(|t| {
        parse_scenario(&t).map_err(|e| e.to_string())
    }) {
        Ok(spec) => spec,
        Err(e) => {
            stats.parse_error = Some(e);
            return stats;
        }
    };
    stats.id = spec.id.to_string();
    stats.nodes = spec.nodes.len();
    stats.edges = spec.edges.len();
    let report = validate_scenario(&spec);
    stats.errors = report.errors.iter().map(|f| f.code).collect();
    stats.warnings = report.warnings.iter().map(|f| f.code).collect();
    if !report.is_accepted() {
        return stats;
    }
    stats.solvable = Some(if report.has_warning("UNSOLVABLE") {
        "no"
    } else if report.has_warning("SOLVABILITY_UNKNOWN") {
        "unknown"
    } else {
        "yes"
    });
    for name in POLICIES {
        let mut policy = policy_by_name(name, &spec).expect("known policy");
        if let Ok(run) = run_policy(&spec, policy.as_mut(), spec.tick_bound()) {
            stats.runs.push(PolicyRun {
                policy: name,
                outcome: run.outcome.to_string(),
                ticks: run.final_tick,
                timed_out: run.timed_out,
            });
        }
    }
    stats
}

/// Analyzes every `*.json` file in `dir`. Scenarios run in parallel; the
/// report is sorted by scenario id, so it is identical across runs.
pub fn corpus_stats(dir: &Path) -> io::Result<CorpusReport> {
    let files = scenario_files(dir)?;
    let mut scenarios: Vec<ScenarioStats> = files.par_iter().map(|p| analyze(p)).collect();
    scenarios.sort_by(|a, b| (&a.id, &a.file).cmp(&(&b.id, &b.file)));
    let win = Outcome::Win.to_string();
    let summary = Summary {
        scenarios: scenarios.len(),
        accepted: scenarios.iter().filter(|s| s.parse_error.is_none() && s.errors.is_empty()).count(),
        solvable: scenarios.iter().filter(|s| s.solvable == Some("yes")).count(),
        wins: POLICIES
            .iter()
            .map(|&p| {
                let n = scenarios
                    .iter()
                    .filter(|s| s.runs.iter().any(|r| r.policy == p && r.outcome == win))
                    .count();
                (p, n)
            })
            .collect(),
    };
    Ok(CorpusReport { scenarios, summary })
}
