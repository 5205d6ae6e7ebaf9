//! Chip and source figures used only to estimate a coincidence rate.
//! None of these touch the quantum state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HardwareConstants {
    /// Per-coupler insertion loss, dB (negative).
    pub grating_coupler_db: f64,
    /// TE-mode propagation loss, dB/cm.
    pub waveguide_loss_db_per_cm: f64,
    pub pump_power_dbm: f64,
    pub repetition_rate_hz: f64,
    pub detector_efficiency: f64,
    /// Typical detected coincidence rate, Hz.
    pub coincidence_rate_hz: f64,
}

impl Default for HardwareConstants {
    fn default() -> Self {
        HardwareConstants {
            grating_coupler_db: -5.4,
            waveguide_loss_db_per_cm: 4.5,
            pump_power_dbm: 19.2,
            repetition_rate_hz: 9.95e9,
            detector_efficiency: 0.25,
            coincidence_rate_hz: 40.0,
        }
    }
}

fn db_to_transmission(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl HardwareConstants {
    pub fn pump_power_w(&self) -> f64 {
        1e-3 * db_to_transmission(self.pump_power_dbm)
    }

    /// Transmission of one photon leaving the chip after `path_cm` of waveguide.
    pub fn photon_transmission(&self, path_cm: f64) -> Result<f64> {
        if !(path_cm.is_finite() && path_cm >= 0.0) {
            return Err(Error::InvalidArgument(format!("path length {path_cm} cm")));
        }
        let db = self.grating_coupler_db - self.waveguide_loss_db_per_cm * path_cm;
        Ok(db_to_transmission(db))
    }

    /// Detected coincidences from on-chip pairs per pulse: `μ · f_rep · (T η)²`.
    pub fn detected_rate(&self, pairs_per_pulse: f64, path_cm: f64) -> Result<f64> {
        if !(pairs_per_pulse.is_finite() && pairs_per_pulse >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "pairs per pulse {pairs_per_pulse}"
            )));
        }
        let t = self.photon_transmission(path_cm)? * self.detector_efficiency;
        Ok(pairs_per_pulse * self.repetition_rate_hz * t * t)
    }

    /// Inverse of [`detected_rate`](Self::detected_rate) for a measured coincidence rate.
    pub fn pairs_per_pulse(&self, detected_hz: f64, path_cm: f64) -> Result<f64> {
        let per_pair = self.detected_rate(1.0, path_cm)?;
        if per_pair == 0.0 {
            return Err(Error::InvalidArgument("zero transmission".into()));
        }
        Ok(detected_hz / per_pair)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_conversions() {
        let hw = HardwareConstants::default();
        assert!((hw.pump_power_w() - 0.083176).abs() < 1e-6);
        let t = hw.photon_transmission(0.0).unwrap();
        assert!((10.0 * t.log10() + 5.4).abs() < 1e-12);
        let t1 = hw.photon_transmission(1.0).unwrap();
        assert!((10.0 * (t / t1).log10() - 4.5).abs() < 1e-12);
    }

    #[test]
    fn rate_round_trip() {
        let hw = HardwareConstants::default();
        let mu = hw.pairs_per_pulse(hw.coincidence_rate_hz, 0.2).unwrap();
        assert!(mu > 0.0 && mu < 1.0);
        let back = hw.detected_rate(mu, 0.2).unwrap();
        assert!((back - 40.0).abs() < 1e-9);
        assert!(hw.detected_rate(-1.0, 0.0).is_err());
    }
}
