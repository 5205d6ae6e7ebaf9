use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::CircuitConfig;
use crate::error::{Error, Result};
use crate::hyperstate::{Mode, Party};
use crate::noise::{BaselineNoise, ErrorDistribution, ErrorKind, ErrorWeights};
use crate::tomography::{DetectionParams, MleOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKindSpec {
    None,
    BitFlip,
    PhaseFlip,
}

/// Which output rail pairs are recorded after purification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Collection {
    #[default]
    Modes01,
    Modes23,
    /// Both rail pairs pooled.
    Both,
}

impl Collection {
    pub fn groups(self) -> Vec<Vec<Mode>> {
        let low = vec![Mode::from_bits(0, 0), Mode::from_bits(0, 1)];
        let high = vec![Mode::from_bits(1, 0), Mode::from_bits(1, 1)];
        match self {
            Collection::Modes01 => vec![low],
            Collection::Modes23 => vec![high],
            Collection::Both => vec![low, high],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    TomographyPol,
    TomographySpa,
    Chsh,
}

fn default_name() -> String {
    "scenario".into()
}

fn default_side() -> Party {
    Party::Bob
}

fn default_true() -> bool {
    true
}

fn default_integration() -> f64 {
    60.0
}

fn default_analyses() -> Vec<Analysis> {
    vec![
        Analysis::TomographyPol,
        Analysis::TomographySpa,
        Analysis::Chsh,
    ]
}

fn default_tol() -> f64 {
    MleOptions::default().tol
}

fn default_max_iter() -> usize {
    MleOptions::default().max_iter
}

/// One simulated experiment. Deserialized from the JSON config file; unknown
/// keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    pub error_kind: ErrorKindSpec,
    /// Marginal flip probabilities; alternative to `weights`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_pol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_spa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<ErrorWeights>,
    #[serde(default = "default_side")]
    pub error_side: Party,
    #[serde(default)]
    pub purify: bool,
    #[serde(default)]
    pub collection: Collection,
    #[serde(default)]
    pub baseline: BaselineNoise,
    /// Apply baseline imperfection before (default) or after the channel errors.
    #[serde(default = "default_true")]
    pub baseline_first: bool,
    /// Coupler splitting error of every MZI in the circuits and measurement rotations.
    #[serde(default)]
    pub splitting_error: f64,
    /// Additional configurations applied after the channel errors.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_circuits: Vec<CircuitConfig>,
    #[serde(default)]
    pub detection: DetectionParams,
    /// Simulated integration time per measurement setting, seconds.
    #[serde(default = "default_integration")]
    pub integration_s: f64,
    #[serde(default = "default_analyses")]
    pub analyses: Vec<Analysis>,
    #[serde(default = "default_tol")]
    pub mle_tol: f64,
    #[serde(default = "default_max_iter")]
    pub mle_max_iter: usize,
}

impl Scenario {
    /// A scenario with defaults for everything but the error model.
    pub fn new(name: &str, error_kind: ErrorKindSpec) -> Self {
        Scenario {
            name: name.into(),
            error_kind,
            p_pol: None,
            p_spa: None,
            weights: None,
            error_side: default_side(),
            purify: false,
            collection: Collection::default(),
            baseline: BaselineNoise::ideal(),
            baseline_first: true,
            splitting_error: 0.0,
            extra_circuits: Vec::new(),
            detection: DetectionParams::default(),
            integration_s: default_integration(),
            analyses: default_analyses(),
            mle_tol: default_tol(),
            mle_max_iter: default_max_iter(),
        }
    }

    pub fn with_rates(mut self, p_pol: f64, p_spa: f64) -> Self {
        self.p_pol = Some(p_pol);
        self.p_spa = Some(p_spa);
        self
    }

    pub fn with_purification(mut self, collection: Collection) -> Self {
        self.purify = true;
        self.collection = collection;
        self
    }

    pub fn with_baseline(mut self, baseline: BaselineNoise) -> Self {
        self.baseline = baseline;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: Scenario =
            serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Scenario::from_json(&text).map_err(|e| match e {
            Error::Scenario(msg) => Error::Scenario(format!("{}: {msg}", path.display())),
            other => Error::Scenario(format!("{}: {other}", path.display())),
        })
    }

    pub fn mle_options(&self) -> MleOptions {
        MleOptions {
            tol: self.mle_tol,
            max_iter: self.mle_max_iter,
        }
    }

    /// `None` when no channel errors are applied.
    pub fn error_distribution(&self) -> Result<Option<ErrorDistribution>> {
        let kind = match self.error_kind {
            ErrorKindSpec::None => return Ok(None),
            ErrorKindSpec::BitFlip => ErrorKind::BitFlip,
            ErrorKindSpec::PhaseFlip => ErrorKind::PhaseFlip,
        };
        let weights = match (self.p_pol, self.p_spa, self.weights) {
            (None, None, Some(w)) => w,
            (p_pol, p_spa, None) if p_pol.is_some() || p_spa.is_some() => {
                ErrorWeights::independent(p_pol.unwrap_or(0.0), p_spa.unwrap_or(0.0))?
            }
            (None, None, None) => {
                return Err(Error::Scenario(
                    "error rates missing: give p_pol/p_spa or weights".into(),
                ))
            }
            _ => {
                return Err(Error::Scenario(
                    "give either p_pol/p_spa or weights, not both".into(),
                ))
            }
        };
        Ok(Some(ErrorDistribution::new(kind, weights)?))
    }

    pub fn validate(&self) -> Result<()> {
        let scenario_err = |e: Error| match e {
            Error::Scenario(m) => Error::Scenario(m),
            other => Error::Scenario(other.to_string()),
        };
        if self.error_kind == ErrorKindSpec::None
            && (self.p_pol.is_some() || self.p_spa.is_some() || self.weights.is_some())
        {
            return Err(Error::Scenario(
                "error rates given with error_kind = none".into(),
            ));
        }
        self.error_distribution().map_err(scenario_err)?;
        if self.collection == Collection::Both && !self.purify {
            return Err(Error::Scenario(
                "collection = both requires purify = true".into(),
            ));
        }
        self.baseline.validate().map_err(scenario_err)?;
        self.detection.validate().map_err(scenario_err)?;
        if !(self.integration_s.is_finite() && self.integration_s >= 0.0) {
            return Err(Error::Scenario(format!(
                "integration_s = {} must be non-negative",
                self.integration_s
            )));
        }
        if !(self.splitting_error > -0.5 && self.splitting_error < 0.5) {
            return Err(Error::Scenario(format!(
                "splitting_error = {} outside (-0.5, 0.5)",
                self.splitting_error
            )));
        }
        for step in &self.extra_circuits {
            crate::circuit::compile(step).map_err(scenario_err)?;
        }
        if !(self.mle_tol.is_finite() && self.mle_tol > 0.0) || self.mle_max_iter == 0 {
            return Err(Error::Scenario(
                "mle_tol must be positive and mle_max_iter at least 1".into(),
            ));
        }
        Ok(())
    }
}
