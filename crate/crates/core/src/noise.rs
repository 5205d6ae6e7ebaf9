//! Time-distributed error channels and the baseline imperfection channel.
//!
//! Error channels are convex mixtures of the error-generation configurations,
//! weighted by how long each configuration is held. Baseline imperfection is
//! a per-dof white-noise admixture calibrated against a target fidelity.

use serde::{Deserialize, Serialize};

use crate::circuit::{self, CircuitConfig, CircuitName};
use crate::error::{Error, Result};
use crate::hyperstate::{Dof, HyperState, Party};
use crate::linalg::{self, Mat16, Mat4, Pauli};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    BitFlip,
    PhaseFlip,
}

impl ErrorKind {
    /// Configurations for the (none, pol, spa, both) branches.
    pub fn branches(self) -> [CircuitName; 4] {
        match self {
            ErrorKind::BitFlip => [
                CircuitName::EgcF,
                CircuitName::EgcG,
                CircuitName::EgcH,
                CircuitName::EgcI,
            ],
            ErrorKind::PhaseFlip => [
                CircuitName::EgcB,
                CircuitName::EgcC,
                CircuitName::EgcD,
                CircuitName::EgcE,
            ],
        }
    }
}

/// Fraction of time spent in each error branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorWeights {
    pub w_none: f64,
    pub w_pol: f64,
    pub w_spa: f64,
    pub w_both: f64,
}

impl ErrorWeights {
    pub fn new(w_none: f64, w_pol: f64, w_spa: f64, w_both: f64) -> Result<Self> {
        let w = ErrorWeights {
            w_none,
            w_pol,
            w_spa,
            w_both,
        };
        w.validate()?;
        Ok(w)
    }

    /// Independent flips with marginal probability `p_pol` and `p_spa`.
    pub fn independent(p_pol: f64, p_spa: f64) -> Result<Self> {
        check_probability("p_pol", p_pol)?;
        check_probability("p_spa", p_spa)?;
        ErrorWeights::new(
            (1.0 - p_pol) * (1.0 - p_spa),
            p_pol * (1.0 - p_spa),
            (1.0 - p_pol) * p_spa,
            p_pol * p_spa,
        )
    }

    pub fn none() -> Self {
        ErrorWeights {
            w_none: 1.0,
            w_pol: 0.0,
            w_spa: 0.0,
            w_both: 0.0,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.w_none, self.w_pol, self.w_spa, self.w_both]
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.as_array();
        let sum: f64 = w.iter().sum();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Weights(sum));
        }
        Ok(())
    }
}

/// Convenience wrapper returning the weights for independent marginals.
pub fn independent_rates(p_pol: f64, p_spa: f64) -> Result<ErrorWeights> {
    ErrorWeights::independent(p_pol, p_spa)
}

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Probability { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorDistribution {
    pub kind: ErrorKind,
    pub weights: ErrorWeights,
}

impl ErrorDistribution {
    pub fn new(kind: ErrorKind, weights: ErrorWeights) -> Result<Self> {
        weights.validate()?;
        Ok(ErrorDistribution { kind, weights })
    }
}

/// `ρ → Σ_k w_k E_k ρ E_k†` with the error configurations applied on one side.
pub fn apply_error_mixture(
    state: &HyperState,
    dist: &ErrorDistribution,
    side: Party,
) -> HyperState {
    apply_error_mixture_with(state, dist, side, 0.0).expect("ideal configurations always compile")
}

/// As [`apply_error_mixture`], with every configuration realized from MZIs
/// carrying the given coupler splitting error.
pub fn apply_error_mixture_with(
    state: &HyperState,
    dist: &ErrorDistribution,
    side: Party,
    splitting_error: f64,
) -> Result<HyperState> {
    let mut rho = Mat16::zeros();
    for (weight, name) in dist
        .weights
        .as_array()
        .into_iter()
        .zip(dist.kind.branches())
    {
        if weight == 0.0 {
            continue;
        }
        let config = CircuitConfig {
            name,
            side: side.into(),
            splitting_error,
        };
        for lu in circuit::compile(&config)? {
            rho += circuit::apply(state, &lu).matrix().scale(weight);
        }
    }
    Ok(HyperState::from_cptp(rho))
}

/// Werner-type visibilities, one per degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineNoise {
    pub visibility_pol: f64,
    pub visibility_spa: f64,
}

impl Default for BaselineNoise {
    fn default() -> Self {
        BaselineNoise::ideal()
    }
}

impl BaselineNoise {
    pub fn new(visibility_pol: f64, visibility_spa: f64) -> Result<Self> {
        let b = BaselineNoise {
            visibility_pol,
            visibility_spa,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn ideal() -> Self {
        BaselineNoise {
            visibility_pol: 1.0,
            visibility_spa: 1.0,
        }
    }

    /// Both visibilities chosen so that each reduced Bell fidelity equals `fidelity`.
    pub fn calibrated(fidelity: f64) -> Result<Self> {
        let v = calibrate_visibility(fidelity)?;
        BaselineNoise::new(v, v)
    }

    pub fn validate(&self) -> Result<()> {
        for v in [self.visibility_pol, self.visibility_spa] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Visibility(v));
            }
        }
        Ok(())
    }
}

/// Local operator on one photon that acts as `p` on the chosen dof.
fn dof_local(p: Pauli, dof: Dof) -> Mat4 {
    let id = Pauli::I.matrix();
    match dof {
        Dof::Polarization => linalg::kron(&id, &p.matrix()),
        Dof::Spatial => linalg::kron(&p.matrix(), &id),
    }
}

/// Two-qubit depolarizing on one dof of both photons:
/// `ρ → v ρ + (1 − v)/16 Σ_{P,Q} (P_A ⊗ Q_B) ρ (P_A ⊗ Q_B)†`.
pub fn depolarize_dof(state: &HyperState, dof: Dof, visibility: f64) -> Result<HyperState> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::Visibility(visibility));
    }
    if visibility == 1.0 {
        return Ok(state.clone());
    }
    let rho = state.matrix();
    let mut twirl = Mat16::zeros();
    for pa in Pauli::ALL {
        for pb in Pauli::ALL {
            let k: Mat16 = linalg::kron(&dof_local(pa, dof), &dof_local(pb, dof));
            twirl += k * rho * k.adjoint();
        }
    }
    Ok(HyperState::from_cptp(
        rho.scale(visibility) + twirl.scale((1.0 - visibility) / 16.0),
    ))
}

pub fn apply_baseline(state: &HyperState, noise: &BaselineNoise) -> Result<HyperState> {
    noise.validate()?;
    let pol = depolarize_dof(state, Dof::Polarization, noise.visibility_pol)?;
    depolarize_dof(&pol, Dof::Spatial, noise.visibility_spa)
}

/// Inverts `F = v + (1 − v)/4`.
pub fn calibrate_visibility(target_fidelity: f64) -> Result<f64> {
    if !(0.25..=1.0).contains(&target_fidelity) {
        return Err(Error::TargetFidelity(target_fidelity));
    }
    Ok((4.0 * target_fidelity - 1.0) / 3.0)
}
