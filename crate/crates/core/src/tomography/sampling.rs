use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{all_settings, probabilities_from, projectors_with, CountRecord, MeasurementSetting};
use crate::error::{Error, Result};
use crate::hyperstate::{Dof, TwoQubitState};

/// Coincidence detection model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionParams {
    /// Pair rate in Hz. Detected coincidences unless `pair_rate_is_generated`.
    pub pair_rate: f64,
    /// Per-detector efficiency, applied only to a generated pair rate.
    pub efficiency: f64,
    pub pair_rate_is_generated: bool,
    /// Accidental coincidences in Hz, spread evenly over the four outcomes.
    pub dark_coincidence_rate: f64,
    pub seed: u64,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams {
            pair_rate: 40.0,
            efficiency: 0.25,
            pair_rate_is_generated: false,
            dark_coincidence_rate: 0.0,
            seed: 0,
        }
    }
}

impl DetectionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.pair_rate.is_finite() && self.pair_rate >= 0.0) {
            return Err(Error::Detection(format!(
                "pair_rate {} < 0",
                self.pair_rate
            )));
        }
        if !(self.dark_coincidence_rate.is_finite() && self.dark_coincidence_rate >= 0.0) {
            return Err(Error::Detection(format!(
                "dark_coincidence_rate {} < 0",
                self.dark_coincidence_rate
            )));
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::Detection(format!(
                "efficiency {} outside [0, 1]",
                self.efficiency
            )));
        }
        Ok(())
    }

    /// Coincidence rate at the detectors; both photons must be detected.
    pub fn detected_pair_rate(&self) -> f64 {
        if self.pair_rate_is_generated {
            self.pair_rate * self.efficiency * self.efficiency
        } else {
            self.pair_rate
        }
    }

    pub fn with_pair_rate(self, pair_rate: f64) -> Self {
        DetectionParams { pair_rate, ..self }
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent seed for one measurement stream of a run.
pub fn stream_seed(seed: u64, stream: u64) -> u64 {
    mix(seed ^ mix(stream))
}

/// Poisson counts with means `rate·T·p_k + dark·T/4` on a dedicated stream.
pub fn sample_outcomes(
    probs: &[f64; 4],
    params: &DetectionParams,
    integration_s: f64,
    stream: u64,
) -> Result<[u64; 4]> {
    if integration_s < 0.0 || integration_s.is_nan() {
        return Err(Error::NegativeTime(integration_s));
    }
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(params.seed, stream));
    let rate = params.detected_pair_rate();
    let floor = params.dark_coincidence_rate * integration_s / 4.0;
    let mut counts = [0u64; 4];
    for (n, &p) in counts.iter_mut().zip(probs) {
        let mean = rate * integration_s * p + floor;
        *n = if mean > 0.0 {
            let dist = Poisson::new(mean).map_err(|e| Error::Detection(e.to_string()))?;
            dist.sample(&mut rng) as u64
        } else {
            0
        };
    }
    Ok(counts)
}

/// Samples one tomography record; the setting selects the random stream.
pub fn sample_counts(
    probs: &[f64; 4],
    params: &DetectionParams,
    integration_s: f64,
    setting: MeasurementSetting,
) -> Result<CountRecord> {
    Ok(CountRecord {
        setting,
        counts: sample_outcomes(probs, params, integration_s, setting.index() as u64)?,
        integration_s,
    })
}

/// All nine records for a state, measured with optionally imperfect rotations.
pub fn sample_tomography(
    rho2: &TwoQubitState,
    dof: Dof,
    params: &DetectionParams,
    integration_s: f64,
    splitting_error: f64,
) -> Result<Vec<CountRecord>> {
    all_settings(dof)
        .into_iter()
        .map(|setting| {
            let probs =
                probabilities_from(rho2.matrix(), &projectors_with(&setting, splitting_error)?);
            sample_counts(&probs, params, integration_s, setting)
        })
        .collect()
}
