//! Simulation of deterministic entanglement purification with
//! polarization/path hyperentangled photon pairs.
//!
//! The pipeline mirrors a reconfigurable silicon-photonic chip: a source
//! emits a pair entangled across four waveguide modes per photon, an error
//! generation circuit injects time-distributed bit-flip or phase-flip
//! errors, and a mode permutation followed by post-selection on two output
//! rails purifies the polarization qubit. Results are evaluated exactly and
//! from simulated coincidence counts via tomography and CHSH tests.

pub mod bell;
pub mod circuit;
pub mod error;
pub mod hyperstate;
pub mod linalg;
pub mod noise;
pub mod runner;
pub mod tomography;

pub use error::{Error, Result};
pub use hyperstate::{HyperState, Mode, TwoQubitState};
