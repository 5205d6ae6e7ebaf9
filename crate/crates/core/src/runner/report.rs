use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use crate::bell::{ChshResult, ChshSettings};
use crate::linalg::MatrixJson;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub seed: u64,
    /// False when post-selection kept nothing.
    pub coincidence: bool,
    pub success_probability: f64,
    pub exact: Option<ExactResults>,
    pub sampled: Option<SampledResults>,
    /// Simulated acquisition windows; the run clock starts at zero.
    pub timestamps: Vec<Acquisition>,
}

/// Results from the density matrix itself, independent of the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactResults {
    pub fidelity_pol: f64,
    pub fidelity_spa: f64,
    pub chsh_canonical: ChshResult,
    pub chsh_optimal: OptimalChsh,
    pub rho_pol: MatrixJson,
    pub rho_spa: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalChsh {
    pub settings: ChshSettings,
    pub result: ChshResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledResults {
    /// Detected coincidence rate after post-selection, Hz.
    pub coincidence_rate_hz: f64,
    pub tomography_pol: Option<TomographySummary>,
    pub tomography_spa: Option<TomographySummary>,
    /// Canonical settings.
    pub chsh: Option<ChshResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographySummary {
    pub total_counts: u64,
    pub fidelity_mle: f64,
    pub fidelity_linear: f64,
    /// Binomial standard error of the direct `¼(1 + ⟨XX⟩ − ⟨YY⟩ + ⟨ZZ⟩)` estimate.
    pub fidelity_standard_error: f64,
    pub linear_min_eigenvalue: f64,
    pub linear_physical: bool,
    pub log_likelihood: f64,
    pub mle_iterations: usize,
    pub mle_converged: bool,
    pub rho_hat: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Acquisition {
    pub analysis: String,
    pub start_s: f64,
    pub end_s: f64,
}
