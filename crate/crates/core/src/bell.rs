//! CHSH evaluation, exactly from a density matrix or from coincidence counts.
//!
//! Sign convention: `S = E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperstate::TwoQubitState;
use crate::linalg::{self, Mat4, Pauli};
use crate::tomography::{probabilities_from, sample_outcomes, DetectionParams};

/// Unit vector on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct BlochVector([f64; 3]);

impl BlochVector {
    pub fn new(v: [f64; 3]) -> Result<Self> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Direction(norm));
        }
        Ok(BlochVector(v))
    }

    /// Normalizes a nonzero vector.
    pub fn along(v: [f64; 3]) -> Result<Self> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Direction(norm));
        }
        Ok(BlochVector(v.map(|x| x / norm)))
    }

    pub fn spherical(theta: f64, phi: f64) -> Self {
        BlochVector([
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        ])
    }

    pub fn x() -> Self {
        BlochVector([1.0, 0.0, 0.0])
    }

    pub fn z() -> Self {
        BlochVector([0.0, 0.0, 1.0])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }
}

impl TryFrom<[f64; 3]> for BlochVector {
    type Error = Error;
    fn try_from(v: [f64; 3]) -> Result<Self> {
        BlochVector::new(v)
    }
}

impl From<BlochVector> for [f64; 3] {
    fn from(v: BlochVector) -> Self {
        v.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub a: BlochVector,
    pub a_prime: BlochVector,
    pub b: BlochVector,
    pub b_prime: BlochVector,
}

impl ChshSettings {
    /// Optimal for `|Φ⁺⟩` under the sign convention above:
    /// a = z, a′ = x, b = (z+x)/√2, b′ = (x−z)/√2.
    pub fn canonical() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        ChshSettings {
            a: BlochVector::z(),
            a_prime: BlochVector::x(),
            b: BlochVector([h, 0.0, h]),
            b_prime: BlochVector([h, 0.0, -h]),
        }
    }

    /// The four setting pairs in `(a,b), (a,b′), (a′,b), (a′,b′)` order.
    pub fn pairs(&self) -> [(BlochVector, BlochVector); 4] {
        [
            (self.a, self.b),
            (self.a, self.b_prime),
            (self.a_prime, self.b),
            (self.a_prime, self.b_prime),
        ]
    }
}

const SIGNS: [f64; 4] = [1.0, -1.0, 1.0, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshResult {
    pub s: f64,
    /// `E(a,b), E(a,b′), E(a′,b), E(a′,b′)`
    pub correlations: [f64; 4],
    /// Counts mode only.
    pub standard_error: Option<f64>,
}

fn spin(n: &BlochVector) -> nalgebra::Matrix2<linalg::C64> {
    let [x, y, z] = n.0;
    Pauli::X.matrix().scale(x) + Pauli::Y.matrix().scale(y) + Pauli::Z.matrix().scale(z)
}

/// `E = Tr[ρ (a·σ) ⊗ (b·σ)]`
pub fn correlation(rho2: &TwoQubitState, a: &BlochVector, b: &BlochVector) -> f64 {
    let op: Mat4 = linalg::kron(&spin(a), &spin(b));
    linalg::trace(&(op * rho2.matrix())).re
}

pub fn chsh_value(rho2: &TwoQubitState, settings: &ChshSettings) -> ChshResult {
    let correlations = settings.pairs().map(|(a, b)| correlation(rho2, &a, &b));
    ChshResult {
        s: combine(&correlations),
        correlations,
        standard_error: None,
    }
}

fn combine(correlations: &[f64; 4]) -> f64 {
    correlations.iter().zip(SIGNS).map(|(e, s)| e * s).sum()
}

/// Counts for one CHSH setting pair, outcomes ordered `++, +−, −+, −−`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshRecord {
    pub a: BlochVector,
    pub b: BlochVector,
    pub counts: [u64; 4],
    pub integration_s: f64,
}

fn direction_projectors(a: &BlochVector, b: &BlochVector) -> [Mat4; 4] {
    let pa = linalg::spin_projectors(a.0);
    let pb = linalg::spin_projectors(b.0);
    [
        linalg::kron(&pa[0], &pb[0]),
        linalg::kron(&pa[0], &pb[1]),
        linalg::kron(&pa[1], &pb[0]),
        linalg::kron(&pa[1], &pb[1]),
    ]
}

pub fn chsh_probabilities(rho2: &TwoQubitState, a: &BlochVector, b: &BlochVector) -> [f64; 4] {
    probabilities_from(rho2.matrix(), &direction_projectors(a, b))
}

/// Random streams used for CHSH sampling, disjoint from tomography streams.
pub const CHSH_STREAM_BASE: u64 = 0x100;

pub fn sample_chsh(
    rho2: &TwoQubitState,
    settings: &ChshSettings,
    params: &DetectionParams,
    integration_s: f64,
) -> Result<[ChshRecord; 4]> {
    let mut out = Vec::with_capacity(4);
    for (k, (a, b)) in settings.pairs().into_iter().enumerate() {
        let probs = chsh_probabilities(rho2, &a, &b);
        let counts = sample_outcomes(&probs, params, integration_s, CHSH_STREAM_BASE + k as u64)?;
        out.push(ChshRecord {
            a,
            b,
            counts,
            integration_s,
        });
    }
    Ok(out.try_into().expect("four pairs"))
}

/// `E = (n_pp + n_mm − n_pm − n_mp)/N` per pair with binomial errors
/// `Var E = (1 − E²)/N`, combined in quadrature.
pub fn chsh_from_counts(records: &[ChshRecord; 4]) -> Result<ChshResult> {
    let mut correlations = [0.0; 4];
    let mut variance = 0.0;
    for (k, rec) in records.iter().enumerate() {
        let n: u64 = rec.counts.iter().sum();
        if n == 0 {
            return Err(Error::ZeroCounts(format!("CHSH pair {k}")));
        }
        let [pp, pm, mp, mm] = rec.counts.map(|x| x as f64);
        let e = (pp + mm - pm - mp) / n as f64;
        correlations[k] = e;
        variance += (1.0 - e * e) / n as f64;
    }
    Ok(ChshResult {
        s: combine(&correlations),
        correlations,
        standard_error: Some(variance.sqrt()),
    })
}

/// Correlation tensor `T_ij = Tr[ρ σ_i ⊗ σ_j]`, i, j ∈ {x, y, z}.
pub fn correlation_tensor(rho2: &TwoQubitState) -> [[f64; 3]; 3] {
    let paulis = [Pauli::X, Pauli::Y, Pauli::Z];
    let mut t = [[0.0; 3]; 3];
    for (i, pi) in paulis.iter().enumerate() {
        for (j, pj) in paulis.iter().enumerate() {
            let op: Mat4 = linalg::kron(&pi.matrix(), &pj.matrix());
            t[i][j] = linalg::trace(&(op * rho2.matrix())).re;
        }
    }
    t
}

fn transpose_apply(t: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (j, o) in out.iter_mut().enumerate() {
        *o = (0..3).map(|i| t[i][j] * v[i]).sum();
    }
    out
}

fn norm(v: [f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// For fixed Alice settings the best Bob settings are `b ∥ Tᵀ(a + a′)` and
/// `b′ ∥ Tᵀ(a′ − a)`, giving `S = |Tᵀ(a+a′)| + |Tᵀ(a′−a)|`.
fn best_for_alice(t: &[[f64; 3]; 3], a: BlochVector, a_prime: BlochVector) -> (ChshSettings, f64) {
    let sum = [0, 1, 2].map(|k| a.0[k] + a_prime.0[k]);
    let diff = [0, 1, 2].map(|k| a_prime.0[k] - a.0[k]);
    let tb = transpose_apply(t, sum);
    let tb_prime = transpose_apply(t, diff);
    let b = BlochVector::along(tb).unwrap_or_else(|_| BlochVector::z());
    let b_prime = BlochVector::along(tb_prime).unwrap_or_else(|_| BlochVector::z());
    (
        ChshSettings {
            a,
            a_prime,
            b,
            b_prime,
        },
        norm(tb) + norm(tb_prime),
    )
}

const GRID_THETA: usize = 8;
const GRID_PHI: usize = 16;

/// Settings maximizing S for this state: grid search over Alice's two
/// directions (Bob's chosen optimally for each), then coordinate refinement.
/// Ties go to the first grid point in enumeration order.
pub fn optimal_settings(rho2: &TwoQubitState) -> (ChshSettings, ChshResult) {
    use std::f64::consts::PI;
    let t = correlation_tensor(rho2);
    let angle = |k: usize| {
        let theta = (k / GRID_PHI) as f64 * PI / GRID_THETA as f64;
        let phi = (k % GRID_PHI) as f64 * 2.0 * PI / GRID_PHI as f64;
        (theta, phi)
    };
    let points = (GRID_THETA + 1) * GRID_PHI;

    let mut best_angles = [0.0; 4];
    let mut best_s = f64::NEG_INFINITY;
    for i in 0..points {
        for j in 0..points {
            let (ta, pa) = angle(i);
            let (tb, pb) = angle(j);
            let (_, s) = best_for_alice(
                &t,
                BlochVector::spherical(ta, pa),
                BlochVector::spherical(tb, pb),
            );
            if s > best_s + 1e-15 {
                best_s = s;
                best_angles = [ta, pa, tb, pb];
            }
        }
    }

    let eval = |x: &[f64; 4]| {
        best_for_alice(
            &t,
            BlochVector::spherical(x[0], x[1]),
            BlochVector::spherical(x[2], x[3]),
        )
        .1
    };
    let mut step = PI / GRID_THETA as f64;
    while step > 1e-10 {
        let mut improved = false;
        for k in 0..4 {
            for dir in [1.0, -1.0] {
                let mut trial = best_angles;
                trial[k] += dir * step;
                let s = eval(&trial);
                if s > best_s + 1e-15 {
                    best_s = s;
                    best_angles = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }

    let (settings, _) = best_for_alice(
        &t,
        BlochVector::spherical(best_angles[0], best_angles[1]),
        BlochVector::spherical(best_angles[2], best_angles[3]),
    );
    let result = chsh_value(rho2, &settings);
    (settings, result)
}
