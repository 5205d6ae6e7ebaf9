//! Reconfigurable circuit settings compiled to per-photon 4×4 unitaries.
//!
//! Every configuration has an ideal action on the mode basis. With a nonzero
//! coupler splitting error the same configuration is instead realized
//! element by element from imperfect MZIs, each followed by the fixed phase
//! correction that makes the element exact at zero splitting error.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hyperstate::{HyperState, Party};
use crate::linalg::{self, c, r, Mat16, Mat2, Mat4, C64, I, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MziSetting {
    /// Internal phase, radians.
    pub theta: f64,
    /// External phase, radians.
    pub phi: f64,
    /// Deviation of each coupler's power splitting from 0.5.
    pub splitting_error: f64,
}

impl MziSetting {
    pub fn new(theta: f64, phi: f64, splitting_error: f64) -> Result<Self> {
        check_splitting(splitting_error)?;
        Ok(MziSetting {
            theta,
            phi,
            splitting_error,
        })
    }

    /// Transmits each input to its own output port (identity).
    pub fn bar(splitting_error: f64) -> Result<Self> {
        MziSetting::new(std::f64::consts::PI, std::f64::consts::PI, splitting_error)
    }

    /// Swaps the two ports.
    pub fn cross(splitting_error: f64) -> Result<Self> {
        MziSetting::new(0.0, 0.0, splitting_error)
    }

    /// Balanced 50:50 setting, equal to a Hadamard up to global phase.
    pub fn hadamard(splitting_error: f64) -> Result<Self> {
        MziSetting::new(std::f64::consts::FRAC_PI_2, 0.0, splitting_error)
    }
}

fn check_splitting(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > -0.5 && eps < 0.5 {
        Ok(())
    } else {
        Err(Error::SplittingError(eps))
    }
}

/// Coupler with power splitting `(0.5 + ε, 0.5 − ε)` and cross-coupling phase `i`.
pub fn directional_coupler(splitting_error: f64) -> Result<Mat2> {
    check_splitting(splitting_error)?;
    let t = r((0.5 + splitting_error).sqrt());
    let k = I * (0.5 - splitting_error).sqrt();
    Ok(Mat2::new(t, k, k, t))
}

/// `diag(e^{iα}, 1)`
pub fn phase_shifter(alpha: f64) -> Mat2 {
    Mat2::new(C64::from_polar(1.0, alpha), ZERO, ZERO, ONE)
}

/// `DC(ε) · P(θ) · DC(ε) · P(φ)`
pub fn mzi_unitary(setting: &MziSetting) -> Result<Mat2> {
    let dc = directional_coupler(setting.splitting_error)?;
    Ok(dc * phase_shifter(setting.theta) * dc * phase_shifter(setting.phi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CircuitName {
    /// Phase-flip generator, no error.
    EgcB,
    /// Phase flip on polarization.
    EgcC,
    /// Phase flip on the spatial qubit.
    EgcD,
    /// Phase flip on both.
    EgcE,
    /// Bit-flip generator, no error.
    EgcF,
    /// Bit flip on polarization.
    EgcG,
    /// Bit flip on the spatial qubit.
    EgcH,
    /// Bit flip on both.
    EgcI,
    HadamardBank,
    PurifyOn,
    MeasurePol,
    MeasureSpatial,
    Identity,
}

impl CircuitName {
    pub const ALL: [CircuitName; 13] = [
        CircuitName::EgcB,
        CircuitName::EgcC,
        CircuitName::EgcD,
        CircuitName::EgcE,
        CircuitName::EgcF,
        CircuitName::EgcG,
        CircuitName::EgcH,
        CircuitName::EgcI,
        CircuitName::HadamardBank,
        CircuitName::PurifyOn,
        CircuitName::MeasurePol,
        CircuitName::MeasureSpatial,
        CircuitName::Identity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CircuitName::EgcB => "EGC_B",
            CircuitName::EgcC => "EGC_C",
            CircuitName::EgcD => "EGC_D",
            CircuitName::EgcE => "EGC_E",
            CircuitName::EgcF => "EGC_F",
            CircuitName::EgcG => "EGC_G",
            CircuitName::EgcH => "EGC_H",
            CircuitName::EgcI => "EGC_I",
            CircuitName::HadamardBank => "HADAMARD_BANK",
            CircuitName::PurifyOn => "PURIFY_ON",
            CircuitName::MeasurePol => "MEASURE_POL",
            CircuitName::MeasureSpatial => "MEASURE_SPATIAL",
            CircuitName::Identity => "IDENTITY",
        }
    }
}

impl fmt::Display for CircuitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CircuitName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim();
        CircuitName::ALL
            .into_iter()
            .find(|name| name.as_str().eq_ignore_ascii_case(wanted))
            .ok_or_else(|| Error::UnknownCircuit(s.to_string()))
    }
}

impl Serialize for CircuitName {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CircuitName {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Alice,
    Bob,
    Both,
}

impl Side {
    pub fn parties(self) -> &'static [Party] {
        match self {
            Side::Alice => &[Party::Alice],
            Side::Bob => &[Party::Bob],
            Side::Both => &[Party::Alice, Party::Bob],
        }
    }
}

impl From<Party> for Side {
    fn from(p: Party) -> Self {
        match p {
            Party::Alice => Side::Alice,
            Party::Bob => Side::Bob,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    pub name: CircuitName,
    pub side: Side,
    #[serde(default)]
    pub splitting_error: f64,
}

impl CircuitConfig {
    pub fn new(name: CircuitName, side: Side) -> Self {
        CircuitConfig {
            name,
            side,
            splitting_error: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalUnitary {
    pub u4: Mat4,
    pub side: Party,
}

impl LocalUnitary {
    pub fn embed(&self) -> Mat16 {
        let id = Mat4::identity();
        match self.side {
            Party::Alice => linalg::kron(&self.u4, &id),
            Party::Bob => linalg::kron(&id, &self.u4),
        }
    }
}

fn permutation(map: [usize; 4]) -> Mat4 {
    let mut u = Mat4::zeros();
    for (from, &to) in map.iter().enumerate() {
        u[(to, from)] = ONE;
    }
    u
}

fn diagonal(d: [f64; 4]) -> Mat4 {
    Mat4::from_diagonal(&nalgebra::Vector4::new(r(d[0]), r(d[1]), r(d[2]), r(d[3])))
}

pub fn x_pol() -> Mat4 {
    permutation([1, 0, 3, 2])
}

pub fn x_spa() -> Mat4 {
    permutation([2, 3, 0, 1])
}

pub fn z_pol() -> Mat4 {
    diagonal([1.0, -1.0, 1.0, -1.0])
}

pub fn z_spa() -> Mat4 {
    diagonal([1.0, 1.0, -1.0, -1.0])
}

/// `|0H⟩→|0V⟩, |0V⟩→|1V⟩, |1H⟩→|1H⟩, |1V⟩→|0H⟩`
pub fn purify_permutation() -> Mat4 {
    permutation([1, 3, 2, 0])
}

/// Ideal action of a configuration on one photon.
pub fn ideal_unitary(name: CircuitName) -> Mat4 {
    use CircuitName::*;
    match name {
        EgcB | EgcF | MeasurePol | MeasureSpatial | Identity => Mat4::identity(),
        EgcC => z_pol(),
        EgcD => z_spa(),
        EgcE => z_pol() * z_spa(),
        EgcG => x_pol(),
        EgcH => x_spa(),
        EgcI => x_pol() * x_spa(),
        HadamardBank => linalg::kron(&linalg::hadamard(), &linalg::hadamard()),
        PurifyOn => purify_permutation(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum MziRole {
    Bar,
    Cross,
    Hadamard,
}

impl MziRole {
    fn setting(self, eps: f64) -> Result<MziSetting> {
        match self {
            MziRole::Bar => MziSetting::bar(eps),
            MziRole::Cross => MziSetting::cross(eps),
            MziRole::Hadamard => MziSetting::hadamard(eps),
        }
    }

    fn ideal(self) -> Mat2 {
        match self {
            MziRole::Bar => Mat2::identity(),
            MziRole::Cross => linalg::Pauli::X.matrix(),
            MziRole::Hadamard => linalg::hadamard(),
        }
    }
}

enum Element {
    Mzi {
        modes: (usize, usize),
        role: MziRole,
    },
    Phase([f64; 4]),
}

/// Physical layout of each configuration: a polarization layer acting on
/// rails (0,1),(2,3) and a spatial layer on (0,2),(1,3), plus phase shifters.
fn layout(name: CircuitName) -> Vec<Element> {
    use CircuitName::*;
    use MziRole::*;
    let layers = |pol: MziRole, spa: MziRole| {
        vec![
            Element::Mzi {
                modes: (0, 1),
                role: pol,
            },
            Element::Mzi {
                modes: (2, 3),
                role: pol,
            },
            Element::Mzi {
                modes: (0, 2),
                role: spa,
            },
            Element::Mzi {
                modes: (1, 3),
                role: spa,
            },
        ]
    };
    match name {
        MeasurePol | MeasureSpatial | Identity => Vec::new(),
        EgcB | EgcF => layers(Bar, Bar),
        EgcG => layers(Cross, Bar),
        EgcH => layers(Bar, Cross),
        EgcI => layers(Cross, Cross),
        EgcC | EgcD | EgcE => {
            let mut elements = layers(Bar, Bar);
            let phases = match name {
                EgcC => [0.0, 1.0, 0.0, 1.0],
                EgcD => [0.0, 0.0, 1.0, 1.0],
                _ => [0.0, 1.0, 1.0, 0.0],
            };
            elements.push(Element::Phase(phases.map(|k| k * std::f64::consts::PI)));
            elements
        }
        HadamardBank => layers(Hadamard, Hadamard),
        PurifyOn => vec![
            Element::Mzi {
                modes: (1, 3),
                role: Cross,
            },
            Element::Mzi {
                modes: (0, 1),
                role: Cross,
            },
        ],
    }
}

fn embed_pair(u: &Mat2, (i, j): (usize, usize)) -> Mat4 {
    let mut out = Mat4::identity();
    out[(i, i)] = u[(0, 0)];
    out[(i, j)] = u[(0, 1)];
    out[(j, i)] = u[(1, 0)];
    out[(j, j)] = u[(1, 1)];
    out
}

/// Builds the configuration from MZIs with splitting error `eps`.
pub fn realize(name: CircuitName, eps: f64) -> Result<Mat4> {
    let mut u = Mat4::identity();
    for element in layout(name) {
        let step = match element {
            Element::Mzi { modes, role } => {
                let reference = mzi_unitary(&role.setting(0.0)?)?;
                let actual = mzi_unitary(&role.setting(eps)?)?;
                // Global phase that maps the ideal MZI onto its target gate.
                let ideal = role.ideal();
                let overlap = linalg::trace(&(reference.adjoint() * ideal));
                let correction = overlap / overlap.norm();
                embed_pair(&(actual * correction), modes)
            }
            Element::Phase(phases) => Mat4::from_diagonal(&nalgebra::Vector4::from_fn(|k, _| {
                C64::from_polar(1.0, phases[k])
            })),
        };
        u = step * u;
    }
    // Removes rounding noise such as e^{iπ} = −1 + 1.2e-16 i.
    Ok(u.map(|z| c(clean(z.re), clean(z.im))))
}

fn clean(x: f64) -> f64 {
    if x.abs() < 1e-15 {
        0.0
    } else {
        x
    }
}

/// Compiles a configuration to one unitary per addressed photon.
pub fn compile(config: &CircuitConfig) -> Result<Vec<LocalUnitary>> {
    check_splitting(config.splitting_error)?;
    let u4 = if config.splitting_error == 0.0 {
        ideal_unitary(config.name)
    } else {
        realize(config.name, config.splitting_error)?
    };
    Ok(config
        .side
        .parties()
        .iter()
        .map(|&side| LocalUnitary { u4, side })
        .collect())
}

pub fn apply(state: &HyperState, lu: &LocalUnitary) -> HyperState {
    state.evolve(&lu.embed())
}

pub fn apply_all(state: &HyperState, unitaries: &[LocalUnitary]) -> HyperState {
    unitaries.iter().fold(state.clone(), |s, lu| apply(&s, lu))
}

/// Compiles and applies a configuration in one step.
pub fn apply_config(state: &HyperState, config: &CircuitConfig) -> Result<HyperState> {
    Ok(apply_all(state, &compile(config)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperstate::{
        embed_product, make_initial_state, phi_plus, post_select, psi_plus, Mode, PostSelection,
    };
    use std::f64::consts::PI;

    fn modes(ix: &[usize]) -> Vec<Mode> {
        ix.iter().map(|&i| Mode::new(i).unwrap()).collect()
    }

    #[test]
    fn mzi_bar_and_cross_states() {
        let bar = mzi_unitary(&MziSetting::new(PI, 0.0, 0.0).unwrap()).unwrap();
        assert!((bar[(0, 0)].norm_sqr() - 1.0).abs() < 1e-15);
        let cross = mzi_unitary(&MziSetting::new(0.0, 0.0, 0.0).unwrap()).unwrap();
        assert!((cross[(0, 1)].norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mzi_cross_power_follows_cos_squared() {
        for k in 0..=16 {
            let theta = k as f64 * PI / 8.0;
            let u = mzi_unitary(&MziSetting::new(theta, 0.3, 0.0).unwrap()).unwrap();
            assert!((u[(0, 1)].norm_sqr() - (theta / 2.0).cos().powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn mzi_is_unitary_across_parameter_range() {
        for &eps in &[-0.49, -0.2, 0.0, 0.1, 0.49] {
            for k in 0..8 {
                let s = MziSetting::new(0.7 * k as f64, 1.3 * k as f64, eps).unwrap();
                assert!(linalg::unitarity_error(&mzi_unitary(&s).unwrap()) < 1e-12);
            }
        }
    }

    #[test]
    fn splitting_error_out_of_range_is_rejected() {
        assert!(matches!(
            MziSetting::new(0.0, 0.0, 0.5),
            Err(Error::SplittingError(_))
        ));
        assert!(directional_coupler(-0.7).is_err());
        assert!(compile(&CircuitConfig {
            name: CircuitName::PurifyOn,
            side: Side::Both,
            splitting_error: f64::NAN,
        })
        .is_err());
    }

    #[test]
    fn mzi_reaches_hadamard_by_phase_search() {
        // Scan the external phase on the balanced family and keep the best
        // global-phase-invariant match.
        let h = linalg::hadamard();
        let best = (0..3600)
            .map(|k| {
                let phi = k as f64 * 2.0 * PI / 3600.0;
                let u = mzi_unitary(&MziSetting::new(PI / 2.0, phi, 0.0).unwrap()).unwrap();
                (linalg::phase_invariant_distance(&u, &h), phi)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap();
        assert!(best.0 < 1e-10, "best distance {}", best.0);
        let preset = mzi_unitary(&MziSetting::hadamard(0.0).unwrap()).unwrap();
        assert!(linalg::phase_invariant_distance(&preset, &h) < 1e-10);
    }

    #[test]
    fn every_configuration_is_unitary() {
        for name in CircuitName::ALL {
            assert!(
                linalg::unitarity_error(&ideal_unitary(name)) < 1e-12,
                "{name}"
            );
            for eps in [0.0, 0.03, -0.1] {
                let u = realize(name, eps).unwrap();
                assert!(linalg::unitarity_error(&u) < 1e-12, "{name} eps={eps}");
            }
        }
    }

    #[test]
    fn mzi_realization_is_exact_without_splitting_error() {
        for name in CircuitName::ALL {
            let d = linalg::max_abs_diff(&realize(name, 0.0).unwrap(), &ideal_unitary(name));
            assert!(d < 1e-12, "{name}: {d}");
        }
    }

    #[test]
    fn splitting_error_perturbs_realized_circuit() {
        let u = realize(CircuitName::EgcG, 0.05).unwrap();
        let d = linalg::max_abs_diff(&u, &ideal_unitary(CircuitName::EgcG));
        assert!(d > 1e-3 && d < 0.5);
    }

    #[test]
    fn purify_is_a_permutation_matrix() {
        let u = ideal_unitary(CircuitName::PurifyOn);
        for row in 0..4 {
            let ones = (0..4).filter(|&col| u[(row, col)] == ONE).count();
            let zeros = (0..4).filter(|&col| u[(row, col)] == ZERO).count();
            assert_eq!((ones, zeros), (1, 3));
        }
        // 0→1→3→0 is a 3-cycle; mode 2 is fixed.
        let cubed = u * u * u;
        assert_eq!(cubed, Mat4::identity());
    }

    #[test]
    fn hadamard_conjugates_phase_flips_into_bit_flips() {
        let h = ideal_unitary(CircuitName::HadamardBank);
        let pairs = [
            (CircuitName::EgcC, CircuitName::EgcG),
            (CircuitName::EgcD, CircuitName::EgcH),
            (CircuitName::EgcE, CircuitName::EgcI),
            (CircuitName::EgcB, CircuitName::EgcF),
        ];
        for (pf, bf) in pairs {
            let conj = h * ideal_unitary(pf) * h.adjoint();
            assert!(linalg::max_abs_diff(&conj, &ideal_unitary(bf)) < 1e-12);
        }
    }

    #[test]
    fn names_parse_case_insensitively() {
        assert_eq!(
            "purify_on".parse::<CircuitName>().unwrap(),
            CircuitName::PurifyOn
        );
        assert_eq!("Egc_g".parse::<CircuitName>().unwrap(), CircuitName::EgcG);
        assert!(matches!(
            "EGC_Z".parse::<CircuitName>(),
            Err(Error::UnknownCircuit(_))
        ));
        let cfg: CircuitConfig =
            serde_json::from_str(r#"{"name": "hadamard_bank", "side": "both"}"#).unwrap();
        assert_eq!(cfg.name, CircuitName::HadamardBank);
        assert_eq!(compile(&cfg).unwrap().len(), 2);
    }

    #[test]
    fn egc_g_on_bob_flips_polarization() {
        let out = apply_config(
            &make_initial_state(),
            &CircuitConfig::new(CircuitName::EgcG, Side::Bob),
        )
        .unwrap();
        let expected = HyperState::from_pure(&embed_product(&psi_plus(), &phi_plus())).unwrap();
        assert!(out.trace_distance(&expected) < 1e-12);
    }

    #[test]
    fn purified_initial_state_selects_half_on_each_rail_pair() {
        let purified = apply_config(
            &make_initial_state(),
            &CircuitConfig::new(CircuitName::PurifyOn, Side::Both),
        )
        .unwrap();
        // Oracle: the permutation maps |mm⟩ to |π(m)π(m)⟩, so the state is
        // ½(|11⟩+|33⟩+|22⟩+|00⟩); projecting on rails {0,1} keeps |00⟩,|11⟩.
        let low = post_select(&purified, &modes(&[0, 1])).unwrap();
        assert!((low.success_prob() - 0.5).abs() < 1e-15);
        let s = low.state().unwrap();
        let mut expected = crate::linalg::Mat16::zeros();
        for a in [0, 5] {
            for b in [0, 5] {
                expected[(a, b)] = r(0.5);
            }
        }
        assert!(linalg::max_abs_diff(s.matrix(), &expected) < 1e-15);
        let high = post_select(&purified, &modes(&[2, 3])).unwrap();
        assert!((low.success_prob() + high.success_prob() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn purified_spatial_flip_gives_no_coincidence() {
        let noisy = apply_config(
            &make_initial_state(),
            &CircuitConfig::new(CircuitName::EgcH, Side::Bob),
        )
        .unwrap();
        let purified = apply_config(
            &noisy,
            &CircuitConfig::new(CircuitName::PurifyOn, Side::Both),
        )
        .unwrap();
        // Enumerated: ½(|12⟩+|30⟩+|21⟩+|03⟩).
        let h = r(0.5);
        let m = |i| Mode::new(i).unwrap();
        let expected = HyperState::from_terms(&[
            (h, m(1), m(2)),
            (h, m(3), m(0)),
            (h, m(2), m(1)),
            (h, m(0), m(3)),
        ])
        .unwrap();
        assert!(purified.trace_distance(&expected) < 1e-12);
        for group in [modes(&[0, 1]), modes(&[2, 3])] {
            assert!(matches!(
                post_select(&purified, &group).unwrap(),
                PostSelection::NoCoincidence { .. }
            ));
        }
    }

    #[test]
    fn identity_leaves_state_untouched() {
        let s = make_initial_state();
        let out = apply_config(&s, &CircuitConfig::new(CircuitName::Identity, Side::Both)).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn hadamard_bank_preserves_initial_state() {
        let s = make_initial_state();
        let out = apply_config(
            &s,
            &CircuitConfig::new(CircuitName::HadamardBank, Side::Both),
        )
        .unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), s.matrix()) < 1e-12);
    }
}
