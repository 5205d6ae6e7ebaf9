//! End-to-end experiment pipeline, reports and output files.
//!
//! Order of operations: initial state → baseline imperfection → channel
//! errors (Bob by default) → extra circuits → Hadamard conversion (phase
//! flips with purification only) → purification → post-selection →
//! reduced states → exact and sampled analyses.

mod hardware;
mod plot;
mod report;
mod scenario;
mod suite;

use std::fs;
use std::path::{Path, PathBuf};

pub use hardware::HardwareConstants;
pub use plot::{emit_plots, plot_report, render_svg};
pub use report::{
    Acquisition, ExactResults, OptimalChsh, RunReport, SampledResults, TomographySummary,
};
pub use scenario::{Analysis, Collection, ErrorKindSpec, Scenario};
pub use suite::{
    comparison_markdown, paper_suite_scenarios, run_paper_suite, write_suite, ComparisonRow, Suite,
    SuiteEntry,
};

use crate::bell::{self, ChshRecord, ChshSettings};
use crate::circuit::{self, CircuitConfig, CircuitName, Side};
use crate::error::{Error, Result};
use crate::hyperstate::{
    self, make_initial_state, phi_plus, post_select_pooled, reduced, Dof, HyperState, PostSelection,
};
use crate::linalg::Mat4;
use crate::noise;
use crate::tomography::{self, CountRecord};

/// State after the optical pipeline, before any measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    /// `None` when post-selection recorded no coincidence.
    pub state: Option<HyperState>,
    pub success_probability: f64,
}

pub fn propagate(scenario: &Scenario) -> Result<PipelineOutcome> {
    scenario.validate()?;
    let mut state = make_initial_state();
    if scenario.baseline_first {
        state = noise::apply_baseline(&state, &scenario.baseline)?;
    }
    if let Some(dist) = scenario.error_distribution()? {
        state = noise::apply_error_mixture_with(
            &state,
            &dist,
            scenario.error_side,
            scenario.splitting_error,
        )?;
    }
    if !scenario.baseline_first {
        state = noise::apply_baseline(&state, &scenario.baseline)?;
    }
    for step in &scenario.extra_circuits {
        state = circuit::apply_config(&state, step)?;
    }

    let both = |name| CircuitConfig {
        name,
        side: Side::Both,
        splitting_error: scenario.splitting_error,
    };
    if !scenario.purify {
        state.validate()?;
        return Ok(PipelineOutcome {
            state: Some(state),
            success_probability: 1.0,
        });
    }
    if scenario.error_kind == ErrorKindSpec::PhaseFlip {
        state = circuit::apply_config(&state, &both(CircuitName::HadamardBank))?;
    }
    state = circuit::apply_config(&state, &both(CircuitName::PurifyOn))?;

    let groups = scenario.collection.groups();
    let refs: Vec<&[hyperstate::Mode]> = groups.iter().map(Vec::as_slice).collect();
    match post_select_pooled(&state, &refs)? {
        PostSelection::Coincidence {
            state,
            success_prob,
        } => {
            state.validate()?;
            Ok(PipelineOutcome {
                state: Some(state),
                success_probability: success_prob,
            })
        }
        PostSelection::NoCoincidence { success_prob } => Ok(PipelineOutcome {
            state: None,
            success_probability: success_prob,
        }),
    }
}

/// Everything a run produces; the report plus the raw data behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: RunReport,
    pub tomography_counts: Vec<Vec<CountRecord>>,
    pub chsh_counts: Option<[ChshRecord; 4]>,
}

fn exact_results(state: &HyperState) -> Result<ExactResults> {
    let pol = reduced(state, Dof::Polarization);
    let spa = reduced(state, Dof::Spatial);
    let (settings, result) = bell::optimal_settings(&pol);
    Ok(ExactResults {
        fidelity_pol: hyperstate::fidelity(&pol, &phi_plus())?,
        fidelity_spa: hyperstate::fidelity(&spa, &phi_plus())?,
        chsh_canonical: bell::chsh_value(&pol, &ChshSettings::canonical()),
        chsh_optimal: OptimalChsh { settings, result },
        rho_pol: pol.to_json(),
        rho_spa: spa.to_json(),
    })
}

/// Standard error of `¼(1 + ⟨XX⟩ − ⟨YY⟩ + ⟨ZZ⟩)` from the three correlated settings.
fn direct_fidelity_error(records: &[CountRecord]) -> f64 {
    use tomography::Basis;
    let variance: f64 = records
        .iter()
        .filter(|r| r.setting.basis_a == r.setting.basis_b)
        .map(|r| {
            let n = r.total() as f64;
            let [pp, pm, mp, mm] = r.counts.map(|x| x as f64);
            let e = (pp + mm - pm - mp) / n;
            debug_assert!(matches!(r.setting.basis_a, Basis::X | Basis::Y | Basis::Z));
            (1.0 - e * e) / n
        })
        .sum();
    0.25 * variance.sqrt()
}

fn summarize(records: &[CountRecord], scenario: &Scenario) -> Result<TomographySummary> {
    let linear = tomography::linear_inversion(records)?;
    let mle = tomography::mle_reconstruct(records, scenario.mle_options())?;
    Ok(TomographySummary {
        total_counts: records.iter().map(CountRecord::total).sum(),
        fidelity_mle: mle.fidelity(&phi_plus())?,
        fidelity_linear: linear.fidelity(&phi_plus())?,
        fidelity_standard_error: direct_fidelity_error(records),
        linear_min_eigenvalue: linear.min_eigenvalue(),
        linear_physical: linear.is_physical(),
        log_likelihood: mle.log_likelihood.unwrap_or(f64::NEG_INFINITY),
        mle_iterations: mle.iterations,
        mle_converged: mle.converged,
        rho_hat: mle.to_json(),
    })
}

/// Runs one scenario. `seed` overrides the seed in the scenario's detection block.
pub fn run(scenario: &Scenario, seed: Option<u64>) -> Result<RunOutput> {
    let mut scenario = scenario.clone();
    if let Some(seed) = seed {
        scenario.detection.seed = seed;
    }
    let outcome = propagate(&scenario)?;
    let seed = scenario.detection.seed;

    let Some(state) = outcome.state else {
        return Ok(RunOutput {
            report: RunReport {
                scenario,
                seed,
                coincidence: false,
                success_probability: outcome.success_probability,
                exact: None,
                sampled: None,
                timestamps: Vec::new(),
            },
            tomography_counts: Vec::new(),
            chsh_counts: None,
        });
    };

    let exact = exact_results(&state)?;
    let report = |sampled, timestamps| RunReport {
        scenario: scenario.clone(),
        seed,
        coincidence: true,
        success_probability: outcome.success_probability,
        exact: Some(exact.clone()),
        sampled,
        timestamps,
    };

    // Post-selection discards the rejected coincidences.
    let rate = scenario.detection.detected_pair_rate() * outcome.success_probability;
    let detection = tomography::DetectionParams {
        pair_rate: rate,
        pair_rate_is_generated: false,
        ..scenario.detection
    };
    let t = scenario.integration_s;
    if rate * t == 0.0 && detection.dark_coincidence_rate * t == 0.0 {
        // Nothing would be recorded.
        return Ok(RunOutput {
            report: report(None, Vec::new()),
            tomography_counts: Vec::new(),
            chsh_counts: None,
        });
    }
    let mut clock = 0.0;
    let mut timestamps = Vec::new();
    let mut tomography_counts = Vec::new();
    let mut sampled = SampledResults {
        coincidence_rate_hz: rate,
        tomography_pol: None,
        tomography_spa: None,
        chsh: None,
    };
    let mut analyses = scenario.analyses.clone();
    analyses.sort();
    analyses.dedup();
    let mut chsh_counts = None;
    for analysis in analyses {
        let (label, duration) = match analysis {
            Analysis::TomographyPol | Analysis::TomographySpa => {
                let dof = if analysis == Analysis::TomographyPol {
                    Dof::Polarization
                } else {
                    Dof::Spatial
                };
                let rho2 = reduced(&state, dof);
                let records = tomography::sample_tomography(
                    &rho2,
                    dof,
                    &detection,
                    t,
                    scenario.splitting_error,
                )?;
                let summary = summarize(&records, &scenario)?;
                if dof == Dof::Polarization {
                    sampled.tomography_pol = Some(summary);
                } else {
                    sampled.tomography_spa = Some(summary);
                }
                tomography_counts.push(records);
                (format!("tomography_{}", dof.label()), 9.0 * t)
            }
            Analysis::Chsh => {
                let pol = reduced(&state, Dof::Polarization);
                let records = bell::sample_chsh(&pol, &ChshSettings::canonical(), &detection, t)?;
                sampled.chsh = Some(bell::chsh_from_counts(&records)?);
                chsh_counts = Some(records);
                ("chsh".to_string(), 4.0 * t)
            }
        };
        timestamps.push(Acquisition {
            analysis: label,
            start_s: clock,
            end_s: clock + duration,
        });
        clock += duration;
    }

    Ok(RunOutput {
        report: report(Some(sampled), timestamps),
        tomography_counts,
        chsh_counts,
    })
}

pub(crate) fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub(crate) fn to_json_pretty<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut text = serde_json::to_vec_pretty(value)?;
    text.push(b'\n');
    Ok(text)
}

#[derive(serde::Serialize)]
struct ChshCsvRow {
    pair: &'static str,
    a_x: f64,
    a_y: f64,
    a_z: f64,
    b_x: f64,
    b_y: f64,
    b_z: f64,
    n_pp: u64,
    n_pm: u64,
    n_mp: u64,
    n_mm: u64,
    integration_s: f64,
}

fn chsh_csv(records: &[ChshRecord; 4]) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for (rec, pair) in records.iter().zip(["ab", "ab'", "a'b", "a'b'"]) {
        let [a_x, a_y, a_z] = rec.a.components();
        let [b_x, b_y, b_z] = rec.b.components();
        let [n_pp, n_pm, n_mp, n_mm] = rec.counts;
        writer.serialize(ChshCsvRow {
            pair,
            a_x,
            a_y,
            a_z,
            b_x,
            b_y,
            b_z,
            n_pp,
            n_pm,
            n_mp,
            n_mm,
            integration_s: rec.integration_s,
        })?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Writes `report.json`, `counts/*.csv`, `rho/*.json` and `plots/*` under `dir`.
pub fn write_run(output: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let report_path = dir.join("report.json");
    write_file(&report_path, &to_json_pretty(&output.report)?)?;
    written.push(report_path);

    for records in &output.tomography_counts {
        let Some(first) = records.first() else {
            continue;
        };
        let path = dir
            .join("counts")
            .join(format!("tomography_{}.csv", first.setting.dof.label()));
        let mut buf = Vec::new();
        tomography::write_records_csv(records, &mut buf)?;
        write_file(&path, &buf)?;
        written.push(path);
    }
    if let Some(chsh) = &output.chsh_counts {
        let path = dir.join("counts").join("chsh.csv");
        write_file(&path, &chsh_csv(chsh)?)?;
        written.push(path);
    }

    for (name, matrix) in report_matrices(&output.report) {
        let path = dir.join("rho").join(format!("{name}.json"));
        write_file(&path, &to_json_pretty(&matrix)?)?;
        written.push(path);
    }
    written.extend(plot_report_into(&output.report, &dir.join("plots"))?);
    Ok(written)
}

/// Named two-qubit matrices carried by a report, in a fixed order.
pub fn report_matrices(report: &RunReport) -> Vec<(String, crate::linalg::MatrixJson)> {
    let mut out = Vec::new();
    if let Some(exact) = &report.exact {
        out.push(("exact_pol".to_string(), exact.rho_pol.clone()));
        out.push(("exact_spa".to_string(), exact.rho_spa.clone()));
    }
    if let Some(sampled) = &report.sampled {
        if let Some(t) = &sampled.tomography_pol {
            out.push(("mle_pol".to_string(), t.rho_hat.clone()));
        }
        if let Some(t) = &sampled.tomography_spa {
            out.push(("mle_spa".to_string(), t.rho_hat.clone()));
        }
    }
    out
}

fn plot_report_into(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (name, matrix) in report_matrices(report) {
        let rho: Mat4 = matrix.to_matrix()?;
        written.extend(emit_plots(&rho, dir, &name)?);
    }
    Ok(written)
}
