//! Worked-example corpus: plan documents with committed expected outcomes.
//!
//! Each case is a pair of files in one directory: `<name>.plan.json` (a
//! [`PlanDocument`]) and `<name>.expected.json` (a [`GoldenExpectation`]).
//! Expected probabilities were produced by the dense oracle; the suite
//! recomputes them through the symbolic path and compares exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::document::{DocumentError, Fraction, PlanDocument};
use crate::protocol::{execute_plan, ExecuteOptions, ResourceLedger, Target};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenExpectation {
    pub name: String,
    /// Where the expected values come from, in words.
    pub provenance: String,
    pub final_state: Target,
    pub cumulative_probability: Fraction,
    pub cycle_probabilities: Vec<Fraction>,
    pub ledger: ResourceLedger,
    /// Qubit counts along the critical path, leaf first.
    pub critical_path: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct GoldenCase {
    pub name: String,
    pub document: PlanDocument,
    pub expected: GoldenExpectation,
}

#[derive(Debug, Error)]
pub enum GoldenError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Document { path: PathBuf, source: DocumentError },
    #[error("{path}: {source}")]
    Expectation { path: PathBuf, source: serde_json::Error },
}

fn read(path: &Path) -> Result<String, GoldenError> {
    fs::read_to_string(path).map_err(|source| GoldenError::Io { path: path.to_owned(), source })
}

/// Loads every `*.plan.json` in `dir` with its sidecar, sorted by name.
pub fn load_cases(dir: &Path) -> Result<Vec<GoldenCase>, GoldenError> {
    let entries = fs::read_dir(dir).map_err(|source| GoldenError::Io { path: dir.to_owned(), source })?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().to_str().and_then(|f| f.strip_suffix(".plan.json")).map(String::from))
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|name| {
            let plan_path = dir.join(format!("{name}.plan.json"));
            let document = PlanDocument::from_json(&read(&plan_path)?)
                .map_err(|source| GoldenError::Document { path: plan_path, source })?;
            let exp_path = dir.join(format!("{name}.expected.json"));
            let expected = serde_json::from_str(&read(&exp_path)?)
                .map_err(|source| GoldenError::Expectation { path: exp_path, source })?;
            Ok(GoldenCase { name, document, expected })
        })
        .collect()
}

fn diff<T: std::fmt::Debug + PartialEq>(what: &str, expected: &T, got: &T, out: &mut Vec<String>) {
    if expected != got {
        out.push(format!("{what}: expected {expected:?}, got {got:?}"));
    }
}

/// Executes one case and lists every mismatch.
pub fn run_case(case: &GoldenCase) -> CaseResult {
    let plan = case.document.resolve().map_err(|e| vec![e.to_string()])?;
    let options = ExecuteOptions {
        verify_with_oracle: case.document.verification.verify_with_oracle,
        ..Default::default()
    };
    let report = execute_plan(&plan, &options).map_err(|e| vec![e.to_string()])?;
    let exp = &case.expected;
    let mut out = Vec::new();
    diff(
        "final state",
        &exp.final_state,
        &Target { k: report.final_state.k, n: report.final_state.n },
        &mut out,
    );
    diff(
        "cumulative probability",
        &exp.cumulative_probability,
        &Fraction(report.cumulative_success.clone()),
        &mut out,
    );
    let cycles: Vec<Fraction> = report.cycles.iter().map(|c| Fraction(c.probability.clone())).collect();
    diff("cycle probabilities", &exp.cycle_probabilities, &cycles, &mut out);
    diff("ledger", &exp.ledger, &report.ledger, &mut out);
    let path: Vec<usize> = report.critical_path.iter().map(|s| s.n).collect();
    diff("critical path", &exp.critical_path, &path, &mut out);
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Per-case outcome: `Err` lists the mismatches.
pub type CaseResult = Result<(), Vec<String>>;

/// Runs every case in `dir`.
pub fn golden_suite(dir: &Path) -> Result<Vec<(String, CaseResult)>, GoldenError> {
    Ok(load_cases(dir)?.iter().map(|c| (c.name.clone(), run_case(c))).collect())
}
