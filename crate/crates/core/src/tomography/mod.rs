//! Two-qubit Pauli-basis state tomography.
//!
//! Nine settings `(a, b)` with `a, b ∈ {Z, X, Y}` each yield four outcome
//! counts ordered `++, +−, −+, −−`. A basis change is modelled as a rotation
//! followed by a computational-basis measurement; the X rotation is a
//! balanced MZI, so a coupler splitting error can be folded into the
//! measurement projectors.

mod mle;
mod sampling;

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use mle::{log_likelihood, mle_reconstruct, MleOptions};
pub use sampling::{
    sample_counts, sample_outcomes, sample_tomography, stream_seed, DetectionParams,
};

use crate::circuit::{mzi_unitary, MziSetting};
use crate::error::{Error, Result};
use crate::hyperstate::{fidelity_of_matrix, Dof, TwoQubitState};
use crate::linalg::{self, c, Mat2, Mat4, MatrixJson, Pauli, Vec4, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Z, Basis::X, Basis::Y];

    pub fn pauli(self) -> Pauli {
        match self {
            Basis::Z => Pauli::Z,
            Basis::X => Pauli::X,
            Basis::Y => Pauli::Y,
        }
    }

    fn index(self) -> usize {
        match self {
            Basis::Z => 0,
            Basis::X => 1,
            Basis::Y => 2,
        }
    }

    /// Rotation `R` such that measuring `R ρ R†` in Z measures this basis.
    pub fn rotation(self, splitting_error: f64) -> Result<Mat2> {
        let h = || -> Result<Mat2> {
            if splitting_error == 0.0 {
                return Ok(linalg::hadamard());
            }
            let reference = mzi_unitary(&MziSetting::hadamard(0.0)?)?;
            let actual = mzi_unitary(&MziSetting::hadamard(splitting_error)?)?;
            let overlap = linalg::trace(&(reference.adjoint() * linalg::hadamard()));
            Ok(actual * (overlap / overlap.norm()))
        };
        Ok(match self {
            Basis::Z => Mat2::identity(),
            Basis::X => h()?,
            Basis::Y => h()? * Mat2::new(ONE, ZERO, ZERO, c(0.0, -1.0)),
        })
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Basis::Z => "Z",
            Basis::X => "X",
            Basis::Y => "Y",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub basis_a: Basis,
    pub basis_b: Basis,
    pub dof: Dof,
}

impl MeasurementSetting {
    pub fn new(basis_a: Basis, basis_b: Basis, dof: Dof) -> Self {
        MeasurementSetting {
            basis_a,
            basis_b,
            dof,
        }
    }

    /// Position in the fixed enumeration over both dofs, 0..18.
    pub fn index(&self) -> usize {
        let dof = match self.dof {
            Dof::Polarization => 0,
            Dof::Spatial => 1,
        };
        9 * dof + 3 * self.basis_a.index() + self.basis_b.index()
    }
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}/{}", self.basis_a, self.basis_b, self.dof.label())
    }
}

/// The nine settings for one dof, in `(Z,Z), (Z,X), …, (Y,Y)` order.
pub fn all_settings(dof: Dof) -> [MeasurementSetting; 9] {
    let mut out = [MeasurementSetting::new(Basis::Z, Basis::Z, dof); 9];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = MeasurementSetting::new(Basis::ALL[k / 3], Basis::ALL[k % 3], dof);
    }
    out
}

/// Outcome projectors ordered `++, +−, −+, −−`.
pub fn projectors(setting: &MeasurementSetting) -> [Mat4; 4] {
    projectors_with(setting, 0.0).expect("ideal rotations are always valid")
}

/// Projectors realized with imperfect basis-rotation couplers.
pub fn projectors_with(setting: &MeasurementSetting, splitting_error: f64) -> Result<[Mat4; 4]> {
    let single = |basis: Basis| -> Result<[Mat2; 2]> {
        let rot = basis.rotation(splitting_error)?;
        let z = linalg::spin_projectors([0.0, 0.0, 1.0]);
        Ok(z.map(|p| rot.adjoint() * p * rot))
    };
    let pa = single(setting.basis_a)?;
    let pb = single(setting.basis_b)?;
    Ok([
        linalg::kron(&pa[0], &pb[0]),
        linalg::kron(&pa[0], &pb[1]),
        linalg::kron(&pa[1], &pb[0]),
        linalg::kron(&pa[1], &pb[1]),
    ])
}

/// Born-rule probabilities; tiny negatives are clipped and the result renormalized.
pub fn probabilities_from(rho: &Mat4, projectors: &[Mat4; 4]) -> [f64; 4] {
    let mut p = projectors.map(|proj| linalg::trace(&(proj * rho)).re);
    for x in p.iter_mut() {
        debug_assert!(*x >= -1e-12, "negative probability {x}");
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        p.iter_mut().for_each(|x| *x /= total);
    }
    p
}

pub fn outcome_probs(rho2: &TwoQubitState, setting: &MeasurementSetting) -> [f64; 4] {
    probabilities_from(rho2.matrix(), &projectors(setting))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub setting: MeasurementSetting,
    /// `n_pp, n_pm, n_mp, n_mm`
    pub counts: [u64; 4],
    pub integration_s: f64,
}

impl CountRecord {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Records with counts `round(p·total)`, i.e. noiseless statistics.
    pub fn exact(setting: MeasurementSetting, probs: &[f64; 4], total: f64) -> Self {
        CountRecord {
            setting,
            counts: probs.map(|p| (p * total).round() as u64),
            integration_s: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    LinearInversion,
    Mle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographyResult {
    /// Hermitian, unit trace; only the MLE estimate is guaranteed PSD.
    pub rho_hat: Mat4,
    pub method: Method,
    pub log_likelihood: Option<f64>,
    /// Log-likelihood after every accepted MLE step, starting from I/4.
    pub log_likelihood_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl TomographyResult {
    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.rho_hat)[0]
    }

    /// False when finite statistics pushed the estimate outside the state space.
    pub fn is_physical(&self) -> bool {
        self.min_eigenvalue() >= -crate::hyperstate::PSD_TOL
    }

    pub fn fidelity(&self, target: &Vec4) -> Result<f64> {
        fidelity_of_matrix(&self.rho_hat, target)
    }

    pub fn state(&self) -> Result<TwoQubitState> {
        TwoQubitState::new(self.rho_hat)
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson::from_matrix(&self.rho_hat)
    }
}

/// Orders the nine records by setting, checking that each appears exactly once.
pub(crate) fn arrange(records: &[CountRecord]) -> Result<[&CountRecord; 9]> {
    let dof = records
        .first()
        .map(|r| r.setting.dof)
        .ok_or_else(|| Error::MissingSetting("ZZ".into()))?;
    let mut slots: [Option<&CountRecord>; 9] = [None; 9];
    for rec in records {
        if rec.setting.dof != dof {
            return Err(Error::InvalidArgument(format!(
                "records mix degrees of freedom ({} and {})",
                dof.label(),
                rec.setting.dof.label()
            )));
        }
        let k = rec.setting.index() % 9;
        if slots[k].is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate setting {}",
                rec.setting
            )));
        }
        if rec.total() == 0 {
            return Err(Error::ZeroCounts(rec.setting.to_string()));
        }
        slots[k] = Some(rec);
    }
    let settings = all_settings(dof);
    let mut out = Vec::with_capacity(9);
    for (k, slot) in slots.into_iter().enumerate() {
        out.push(slot.ok_or_else(|| Error::MissingSetting(settings[k].to_string()))?);
    }
    Ok(out.try_into().expect("nine slots"))
}

/// `ρ̂ = ¼ Σ_{a,b} Ê[σ_a ⊗ σ_b] σ_a ⊗ σ_b` from count frequencies.
pub fn linear_inversion(records: &[CountRecord]) -> Result<TomographyResult> {
    let arranged = arrange(records)?;
    let freqs: Vec<(MeasurementSetting, [f64; 4])> = arranged
        .iter()
        .map(|rec| {
            let total = rec.total() as f64;
            (rec.setting, rec.counts.map(|n| n as f64 / total))
        })
        .collect();
    linear_inversion_from_frequencies(&freqs)
}

/// Linear inversion from outcome frequencies (or exact probabilities), one
/// entry per setting, outcomes ordered `++, +−, −+, −−`.
pub fn linear_inversion_from_frequencies(
    entries: &[(MeasurementSetting, [f64; 4])],
) -> Result<TomographyResult> {
    let mut seen = [false; 9];
    for (setting, freq) in entries {
        let k = setting.index() % 9;
        if seen[k] {
            return Err(Error::InvalidArgument(format!(
                "duplicate setting {setting}"
            )));
        }
        if !freq.iter().all(|f| f.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite frequency for {setting}"
            )));
        }
        seen[k] = true;
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        let dof = entries.first().map_or(Dof::Polarization, |e| e.0.dof);
        return Err(Error::MissingSetting(all_settings(dof)[k].to_string()));
    }
    let sign = [1.0, -1.0, -1.0, 1.0];
    let sign_a = [1.0, 1.0, -1.0, -1.0];
    let sign_b = [1.0, -1.0, 1.0, -1.0];

    // expectation[i][j] for Paulis in I, X, Y, Z order.
    let mut expectation = [[0.0f64; 4]; 4];
    let mut marginal_a = [[0.0f64; 2]; 4]; // (sum, n)
    let mut marginal_b = [[0.0f64; 2]; 4];
    expectation[0][0] = 1.0;
    let slot = |b: Basis| match b {
        Basis::X => 1,
        Basis::Y => 2,
        Basis::Z => 3,
    };
    for (setting, freq) in entries {
        let dot = |s: &[f64; 4]| freq.iter().zip(s).map(|(f, s)| f * s).sum::<f64>();
        let (ia, ib) = (slot(setting.basis_a), slot(setting.basis_b));
        expectation[ia][ib] = dot(&sign);
        marginal_a[ia][0] += dot(&sign_a);
        marginal_a[ia][1] += 1.0;
        marginal_b[ib][0] += dot(&sign_b);
        marginal_b[ib][1] += 1.0;
    }
    for k in 1..4 {
        expectation[k][0] = marginal_a[k][0] / marginal_a[k][1];
        expectation[0][k] = marginal_b[k][0] / marginal_b[k][1];
    }

    let mut rho = Mat4::zeros();
    for (i, pa) in Pauli::ALL.into_iter().enumerate() {
        for (j, pb) in Pauli::ALL.into_iter().enumerate() {
            let op: Mat4 = linalg::kron(&pa.matrix(), &pb.matrix());
            rho += op.scale(expectation[i][j] / 4.0);
        }
    }
    Ok(TomographyResult {
        rho_hat: linalg::hermitian_part(&rho),
        method: Method::LinearInversion,
        log_likelihood: None,
        log_likelihood_trace: Vec::new(),
        iterations: 0,
        converged: true,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    setting_a: Basis,
    setting_b: Basis,
    dof: Dof,
    n_pp: u64,
    n_pm: u64,
    n_mp: u64,
    n_mm: u64,
    integration_s: f64,
}

/// CSV with columns `setting_a, setting_b, dof, n_pp, n_pm, n_mp, n_mm, integration_s`.
pub fn write_records_csv<W: Write>(records: &[CountRecord], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for rec in records {
        let [n_pp, n_pm, n_mp, n_mm] = rec.counts;
        writer.serialize(CsvRow {
            setting_a: rec.setting.basis_a,
            setting_b: rec.setting.basis_b,
            dof: rec.setting.dof,
            n_pp,
            n_pm,
            n_mp,
            n_mm,
            integration_s: rec.integration_s,
        })?;
    }
    writer.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<CountRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    reader
        .deserialize::<CsvRow>()
        .map(|row| {
            let row = row?;
            if row.integration_s < 0.0 {
                return Err(Error::NegativeTime(row.integration_s));
            }
            Ok(CountRecord {
                setting: MeasurementSetting::new(row.setting_a, row.setting_b, row.dof),
                counts: [row.n_pp, row.n_pm, row.n_mp, row.n_mm],
                integration_s: row.integration_s,
            })
        })
        .collect()
}

/// Noiseless records for a state: counts are `round(p·total)`.
pub fn exact_records(rho2: &TwoQubitState, dof: Dof, total: f64) -> Vec<CountRecord> {
    all_settings(dof)
        .into_iter()
        .map(|s| CountRecord::exact(s, &outcome_probs(rho2, &s), total))
        .collect()
}
