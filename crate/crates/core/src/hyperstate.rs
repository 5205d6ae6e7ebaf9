//! Two-photon states over four waveguide modes per photon.
//!
//! Each photon occupies one of four modes. A mode carries two qubits, a
//! spatial (rail) bit and a polarization bit, with
//! `mode = 2·spatial + polarization`:
//!
//! | mode | spatial | polarization |
//! |------|---------|--------------|
//! | 0    | 0       | H            |
//! | 1    | 0       | V            |
//! | 2    | 1       | H            |
//! | 3    | 1       | V            |
//!
//! The two-photon basis is ordered `index = 4·m_A + m_B` (Alice first), so
//! the 16-dimensional space factors as `spa_A ⊗ pol_A ⊗ spa_B ⊗ pol_B`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat16, Mat4, MatrixJson, Vec16, Vec4, C64, ONE, ZERO};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
/// Below this post-selection probability no coincidence is recorded.
pub const NO_COINCIDENCE: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode(u8);

impl Mode {
    pub const ALL: [Mode; 4] = [Mode(0), Mode(1), Mode(2), Mode(3)];

    pub fn new(index: usize) -> Option<Mode> {
        (index < 4).then_some(Mode(index as u8))
    }

    pub fn from_bits(spatial: u8, polarization: u8) -> Mode {
        assert!(spatial < 2 && polarization < 2, "mode bits must be 0 or 1");
        Mode(2 * spatial + polarization)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn spatial(self) -> u8 {
        self.0 >> 1
    }

    /// 0 for H, 1 for V.
    pub fn polarization(self) -> u8 {
        self.0 & 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dof {
    Polarization,
    Spatial,
}

impl Dof {
    pub fn label(self) -> &'static str {
        match self {
            Dof::Polarization => "pol",
            Dof::Spatial => "spa",
        }
    }
}

/// One qubit of one photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QubitView {
    pub photon: Party,
    pub dof: Dof,
}

impl QubitView {
    /// Bit position of this qubit inside the 16-dimensional basis index.
    pub fn bit(self) -> u32 {
        let offset = match self.photon {
            Party::Alice => 2,
            Party::Bob => 0,
        };
        match self.dof {
            Dof::Spatial => offset + 1,
            Dof::Polarization => offset,
        }
    }
}

#[inline]
pub fn basis_index(a: Mode, b: Mode) -> usize {
    4 * a.index() + b.index()
}

/// Two-photon density matrix on the 16-dimensional mode space.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperState {
    rho: Mat16,
}

impl HyperState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: Mat16) -> Result<Self> {
        check_density(&rho)?;
        Ok(HyperState { rho })
    }

    /// Wraps a matrix produced by a CPTP map of a valid state.
    pub(crate) fn from_cptp(rho: Mat16) -> Self {
        debug_assert!(linalg::is_finite(&rho));
        HyperState { rho }
    }

    pub fn from_pure(psi: &Vec16) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("state vector has norm {norm}")));
        }
        HyperState::new(linalg::outer(psi))
    }

    /// Pure state from `(amplitude, mode_A, mode_B)` terms, normalized.
    pub fn from_terms(terms: &[(C64, Mode, Mode)]) -> Result<Self> {
        let mut psi = Vec16::zeros();
        for &(amp, a, b) in terms {
            psi[basis_index(a, b)] += amp;
        }
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("empty superposition".into()));
        }
        HyperState::from_pure(&psi.unscale(norm))
    }

    pub fn maximally_mixed() -> Self {
        HyperState {
            rho: Mat16::identity().scale(1.0 / 16.0),
        }
    }

    /// Convex combination `Σ wᵢ ρᵢ`; weights must be non-negative and sum to 1.
    pub fn mixture(parts: &[(f64, &HyperState)]) -> Result<Self> {
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Weights(total));
        }
        let rho = parts
            .iter()
            .fold(Mat16::zeros(), |acc, (w, s)| acc + s.rho.scale(*w));
        Ok(HyperState::from_cptp(rho))
    }

    pub fn matrix(&self) -> &Mat16 {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.rho).re
    }

    pub fn purity(&self) -> f64 {
        linalg::trace(&(self.rho * self.rho)).re
    }

    pub fn validate(&self) -> Result<()> {
        check_density(&self.rho)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.rho)[0]
    }

    pub fn trace_distance(&self, other: &HyperState) -> f64 {
        linalg::trace_distance(&self.rho, &other.rho)
    }

    /// `(U_A ⊗ U_B) ρ (U_A ⊗ U_B)†`
    pub fn evolve(&self, u: &Mat16) -> HyperState {
        HyperState::from_cptp(u * self.rho * u.adjoint())
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson::from_matrix(&self.rho)
    }
}

/// Two-qubit density matrix for one degree of freedom of both photons,
/// ordered `2·bit_A + bit_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    rho: Mat4,
}

impl TwoQubitState {
    pub fn new(rho: Mat4) -> Result<Self> {
        check_density(&rho)?;
        Ok(TwoQubitState { rho })
    }

    pub(crate) fn from_cptp(rho: Mat4) -> Self {
        TwoQubitState { rho }
    }

    pub fn from_pure(psi: &Vec4) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("state vector has norm {norm}")));
        }
        TwoQubitState::new(linalg::outer(psi))
    }

    pub fn maximally_mixed() -> Self {
        TwoQubitState {
            rho: Mat4::identity().scale(0.25),
        }
    }

    /// `v·|Φ⁺⟩⟨Φ⁺| + (1 − v)·I/4`
    pub fn werner(visibility: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::Visibility(visibility));
        }
        let bell = linalg::outer(&phi_plus());
        Ok(TwoQubitState {
            rho: bell.scale(visibility) + Mat4::identity().scale((1.0 - visibility) / 4.0),
        })
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.rho
    }

    pub fn purity(&self) -> f64 {
        linalg::trace(&(self.rho * self.rho)).re
    }

    pub fn validate(&self) -> Result<()> {
        check_density(&self.rho)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.rho)[0]
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson::from_matrix(&self.rho)
    }
}

fn check_density<const N: usize>(rho: &nalgebra::SMatrix<C64, N, N>) -> Result<()> {
    if !linalg::is_finite(rho) {
        return Err(Error::InvalidState("non-finite entry".into()));
    }
    let herm = linalg::hermiticity_error(rho);
    if herm > HERMITIAN_TOL {
        return Err(Error::InvalidState(format!(
            "not Hermitian (deviation {herm:e})"
        )));
    }
    let tr = linalg::trace(rho).re;
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidState(format!("trace {tr} != 1")));
    }
    let min = linalg::hermitian_eigenvalues(rho)[0];
    if min < -PSD_TOL {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

/// `(|00⟩ + |11⟩)/√2`, i.e. `(|HH⟩ + |VV⟩)/√2` for polarization.
pub fn phi_plus() -> Vec4 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Vec4::new(linalg::r(h), ZERO, ZERO, linalg::r(h))
}

pub fn phi_minus() -> Vec4 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Vec4::new(linalg::r(h), ZERO, ZERO, linalg::r(-h))
}

pub fn psi_plus() -> Vec4 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Vec4::new(ZERO, linalg::r(h), linalg::r(h), ZERO)
}

pub fn psi_minus() -> Vec4 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Vec4::new(ZERO, linalg::r(h), linalg::r(-h), ZERO)
}

/// `½(|00⟩ + |11⟩ + |22⟩ + |33⟩)` in mode notation.
pub fn make_initial_state() -> HyperState {
    let mut psi = Vec16::zeros();
    for m in Mode::ALL {
        psi[basis_index(m, m)] = ONE * 0.5;
    }
    HyperState::from_cptp(linalg::outer(&psi))
}

/// Partial trace over the other degree of freedom of both photons.
pub fn reduced(state: &HyperState, dof: Dof) -> TwoQubitState {
    let keep_a = QubitView {
        photon: Party::Alice,
        dof,
    }
    .bit();
    let keep_b = QubitView {
        photon: Party::Bob,
        dof,
    }
    .bit();
    let other = match dof {
        Dof::Polarization => Dof::Spatial,
        Dof::Spatial => Dof::Polarization,
    };
    let trace_a = QubitView {
        photon: Party::Alice,
        dof: other,
    }
    .bit();
    let trace_b = QubitView {
        photon: Party::Bob,
        dof: other,
    }
    .bit();
    let index = |ka: usize, kb: usize, ta: usize, tb: usize| {
        (ka << keep_a) | (kb << keep_b) | (ta << trace_a) | (tb << trace_b)
    };

    let rho = state.matrix();
    let mut out = Mat4::zeros();
    for row in 0..4 {
        for col in 0..4 {
            let mut acc = ZERO;
            for ta in 0..2 {
                for tb in 0..2 {
                    acc += rho[(
                        index(row >> 1, row & 1, ta, tb),
                        index(col >> 1, col & 1, ta, tb),
                    )];
                }
            }
            out[(row, col)] = acc;
        }
    }
    TwoQubitState::from_cptp(out)
}

/// `⟨ψ|ρ|ψ⟩` for a normalized pure target.
pub fn fidelity(rho2: &TwoQubitState, target: &Vec4) -> Result<f64> {
    fidelity_of_matrix(rho2.matrix(), target)
}

/// Same as [`fidelity`] for a raw estimate that may not be a valid state.
pub fn fidelity_of_matrix(rho: &Mat4, target: &Vec4) -> Result<f64> {
    let norm = target.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::UnnormalizedTarget(norm));
    }
    let value = (target.adjoint() * rho * target)[(0, 0)];
    debug_assert!(value.im.abs() <= 1e-10, "imaginary fidelity {}", value.im);
    Ok(value.re)
}

pub fn trace_distance(a: &TwoQubitState, b: &TwoQubitState) -> f64 {
    linalg::trace_distance(a.matrix(), b.matrix())
}

pub fn purity(state: &HyperState) -> f64 {
    state.purity()
}

/// Outcome of projecting both photons onto a subset of output modes.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum PostSelection {
    Coincidence {
        state: HyperState,
        success_prob: f64,
    },
    NoCoincidence {
        success_prob: f64,
    },
}

impl PostSelection {
    pub fn success_prob(&self) -> f64 {
        match self {
            PostSelection::Coincidence { success_prob, .. }
            | PostSelection::NoCoincidence { success_prob } => *success_prob,
        }
    }

    pub fn state(&self) -> Option<&HyperState> {
        match self {
            PostSelection::Coincidence { state, .. } => Some(state),
            PostSelection::NoCoincidence { .. } => None,
        }
    }
}

fn rail_projector(modes: &[Mode]) -> Mat16 {
    let mut p = Mat16::zeros();
    for &a in modes {
        for &b in modes {
            let k = basis_index(a, b);
            p[(k, k)] = ONE;
        }
    }
    p
}

/// Keeps coincidences where both photons exit in `modes`.
pub fn post_select(state: &HyperState, modes: &[Mode]) -> Result<PostSelection> {
    post_select_pooled(state, &[modes])
}

/// Keeps coincidences landing in any one of several disjoint mode groups,
/// pooling the branches incoherently (each group is a separate pair of
/// detectors).
pub fn post_select_pooled(state: &HyperState, groups: &[&[Mode]]) -> Result<PostSelection> {
    if groups.is_empty() || groups.iter().any(|g| g.is_empty()) {
        return Err(Error::EmptyModeSet);
    }
    let mut kept = Mat16::zeros();
    for group in groups {
        let mut modes = group.to_vec();
        modes.sort();
        modes.dedup();
        let p = rail_projector(&modes);
        kept += p * state.matrix() * p;
    }
    let success_prob = linalg::trace(&kept).re;
    if success_prob < NO_COINCIDENCE {
        return Ok(PostSelection::NoCoincidence { success_prob });
    }
    Ok(PostSelection::Coincidence {
        state: HyperState::from_cptp(kept.unscale(success_prob)),
        success_prob,
    })
}

/// Embeds a pure two-qubit state of one dof into the product with `other` on
/// the complementary dof: returns the 16-dimensional vector.
pub fn embed_product(pol: &Vec4, spa: &Vec4) -> Vec16 {
    let mut psi = Vec16::zeros();
    for a in Mode::ALL {
        for b in Mode::ALL {
            let p = 2 * a.polarization() as usize + b.polarization() as usize;
            let s = 2 * a.spatial() as usize + b.spatial() as usize;
            psi[basis_index(a, b)] = pol[p] * spa[s];
        }
    }
    psi
}
