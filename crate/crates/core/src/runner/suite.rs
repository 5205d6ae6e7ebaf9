//! The eight reference experiments and their comparison table.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::scenario::{Collection, ErrorKindSpec, Scenario};
use super::{run, write_file, write_run, RunOutput};
use crate::error::{Error, Result};
use crate::noise::BaselineNoise;

pub const SUITE_FIDELITY: f64 = 0.90;
pub const SUITE_ERROR_RATE: f64 = 0.2;

/// Published values: (experiment, quantity, value).
const PUBLISHED: &[(&str, &str, f64)] = &[
    ("baseline", "fidelity_pol", 0.90),
    ("baseline", "fidelity_spa", 0.90),
    ("bf_before", "fidelity_pol", 0.71),
    ("bf_before", "fidelity_spa", 0.72),
    ("bf_before", "chsh", 1.87),
    ("bf_after_modes01", "fidelity_pol", 0.82),
    ("bf_after_modes01", "chsh", 2.17),
    ("pf_before", "fidelity_pol", 0.72),
    ("pf_before", "fidelity_spa", 0.74),
    ("pf_before", "chsh", 1.94),
    ("pf_after_modes01", "fidelity_pol", 0.83),
    ("pf_after_modes01", "chsh", 2.19),
];

pub fn paper_suite_scenarios() -> Result<Vec<Scenario>> {
    let baseline = BaselineNoise::calibrated(SUITE_FIDELITY)?;
    let p = SUITE_ERROR_RATE;
    let mk = |name: &str, kind, collection: Option<Collection>| {
        let mut s = Scenario::new(name, kind).with_baseline(baseline);
        if kind != ErrorKindSpec::None {
            s = s.with_rates(p, p);
        }
        if let Some(c) = collection {
            s = s.with_purification(c);
        }
        s
    };
    use ErrorKindSpec::*;
    Ok(vec![
        mk("baseline", None, Option::None),
        mk("bf_before", BitFlip, Option::None),
        mk("bf_after_modes01", BitFlip, Some(Collection::Modes01)),
        mk("bf_after_modes23", BitFlip, Some(Collection::Modes23)),
        mk("bf_after_both", BitFlip, Some(Collection::Both)),
        mk("pf_before", PhaseFlip, Option::None),
        mk("pf_after_modes01", PhaseFlip, Some(Collection::Modes01)),
        mk("pf_after_both", PhaseFlip, Some(Collection::Both)),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub experiment: String,
    pub quantity: String,
    pub paper: Option<f64>,
    pub exact: f64,
    pub sampled: Option<f64>,
    pub uncertainty: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SuiteEntry {
    pub scenario: Scenario,
    pub output: RunOutput,
}

#[derive(Debug, Clone)]
pub struct Suite {
    pub entries: Vec<SuiteEntry>,
    pub table: Vec<ComparisonRow>,
}

fn published(experiment: &str, quantity: &str) -> Option<f64> {
    PUBLISHED
        .iter()
        .find(|(e, q, _)| *e == experiment && *q == quantity)
        .map(|x| x.2)
}

fn rows_for(name: &str, out: &RunOutput) -> Result<Vec<ComparisonRow>> {
    let report = &out.report;
    let exact = report
        .exact
        .as_ref()
        .ok_or_else(|| Error::Scenario(format!("{name}: no coincidence")))?;
    let sampled = report.sampled.as_ref();
    let pol = sampled.and_then(|s| s.tomography_pol.as_ref());
    let spa = sampled.and_then(|s| s.tomography_spa.as_ref());
    let chsh = sampled.and_then(|s| s.chsh);
    let row = |quantity: &str, exact: f64, sampled: Option<f64>, uncertainty: Option<f64>| {
        ComparisonRow {
            experiment: name.to_string(),
            quantity: quantity.to_string(),
            paper: published(name, quantity),
            exact,
            sampled,
            uncertainty,
        }
    };
    Ok(vec![
        row(
            "fidelity_pol",
            exact.fidelity_pol,
            pol.map(|t| t.fidelity_mle),
            pol.map(|t| t.fidelity_standard_error),
        ),
        row(
            "fidelity_spa",
            exact.fidelity_spa,
            spa.map(|t| t.fidelity_mle),
            spa.map(|t| t.fidelity_standard_error),
        ),
        row(
            "chsh",
            exact.chsh_canonical.s,
            chsh.map(|c| c.s),
            chsh.and_then(|c| c.standard_error),
        ),
        row("chsh_optimal", exact.chsh_optimal.result.s, None, None),
        row(
            "success_probability",
            report.success_probability,
            None,
            None,
        ),
    ])
}

/// Runs the eight scenarios; scenario `k` uses seed `seed + k`.
pub fn run_paper_suite(seed: u64) -> Result<Suite> {
    let scenarios = paper_suite_scenarios()?;
    let outputs: Vec<Result<RunOutput>> = std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .enumerate()
            .map(|(k, s)| scope.spawn(move || run(s, Some(seed.wrapping_add(k as u64)))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("suite worker panicked"))
            .collect()
    });
    let mut entries = Vec::new();
    let mut table = Vec::new();
    for (scenario, output) in scenarios.into_iter().zip(outputs) {
        let output = output?;
        table.extend(rows_for(&scenario.name, &output)?);
        entries.push(SuiteEntry { scenario, output });
    }
    Ok(Suite { entries, table })
}

fn fmt(x: Option<f64>) -> String {
    x.map_or_else(|| "".into(), |v| format!("{v:.4}"))
}

pub fn comparison_markdown(table: &[ComparisonRow]) -> String {
    let mut md = String::from(
        "| experiment | quantity | paper | exact | sampled | ± |\n|---|---|---|---|---|---|\n",
    );
    for r in table {
        let _ = writeln!(
            md,
            "| {} | {} | {} | {:.4} | {} | {} |",
            r.experiment,
            r.quantity,
            fmt(r.paper),
            r.exact,
            fmt(r.sampled),
            fmt(r.uncertainty)
        );
    }
    md
}

/// One directory per scenario plus `comparison.csv` and `comparison.md`.
pub fn write_suite(suite: &Suite, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for entry in &suite.entries {
        written.extend(write_run(&entry.output, &dir.join(&entry.scenario.name))?);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &suite.table {
        w.serialize(row)?;
    }
    let csv = w
        .into_inner()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let csv_path = dir.join("comparison.csv");
    write_file(&csv_path, &csv)?;
    let md_path = dir.join("comparison.md");
    write_file(&md_path, comparison_markdown(&suite.table).as_bytes())?;
    written.push(csv_path);
    written.push(md_path);
    Ok(written)
}
