//! Maximum-likelihood reconstruction by the `RρR` fixed-point iteration.
//!
//! Each step first tries the plain update `ρ' ∝ R ρ R`. If that would lower
//! the likelihood the step is diluted, `ρ' ∝ (I + εR̃) ρ (I + εR̃)` with
//! `R̃ = R / N`, halving ε until the likelihood no longer decreases. Small
//! diluted steps always increase the likelihood, so the accepted sequence
//! is monotone.

use super::{arrange, projectors, CountRecord, Method, TomographyResult};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat4};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions {
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

const MIN_PROB: f64 = 1e-300;
const MAX_DILUTIONS: usize = 60;

struct Term {
    count: f64,
    projector: Mat4,
}

fn terms(records: &[CountRecord]) -> Result<Vec<Term>> {
    let arranged = arrange(records)?;
    let mut out = Vec::with_capacity(36);
    for rec in arranged {
        for (n, p) in rec.counts.iter().zip(projectors(&rec.setting)) {
            if *n > 0 {
                out.push(Term {
                    count: *n as f64,
                    projector: p,
                });
            }
        }
    }
    Ok(out)
}

fn prob(rho: &Mat4, projector: &Mat4) -> f64 {
    linalg::trace(&(projector * rho)).re.max(MIN_PROB)
}

fn likelihood(rho: &Mat4, terms: &[Term]) -> f64 {
    terms
        .iter()
        .map(|t| t.count * prob(rho, &t.projector).ln())
        .sum()
}

/// `Σ_k n_k log p_k(ρ)` over the records.
pub fn log_likelihood(rho: &Mat4, records: &[CountRecord]) -> Result<f64> {
    Ok(likelihood(rho, &terms(records)?))
}

fn normalized(m: Mat4) -> Mat4 {
    let h = linalg::hermitian_part(&m);
    let tr = linalg::trace(&h).re;
    h.unscale(tr)
}

pub fn mle_reconstruct(records: &[CountRecord], options: MleOptions) -> Result<TomographyResult> {
    if !(options.tol.is_finite() && options.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            options.tol
        )));
    }
    let terms = terms(records)?;
    let total: f64 = terms.iter().map(|t| t.count).sum();

    let mut rho = Mat4::identity().scale(0.25);
    let mut ll = likelihood(&rho, &terms);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iter {
        iterations += 1;
        let r = terms.iter().fold(Mat4::zeros(), |acc, t| {
            acc + t.projector.scale(t.count / prob(&rho, &t.projector))
        });

        let mut candidate = normalized(r * rho * r);
        let mut candidate_ll = likelihood(&candidate, &terms);
        let mut eps = 1.0;
        let mut dilutions = 0;
        while candidate_ll < ll && dilutions < MAX_DILUTIONS {
            let step = Mat4::identity() + r.scale(eps / total);
            candidate = normalized(step * rho * step);
            candidate_ll = likelihood(&candidate, &terms);
            eps *= 0.5;
            dilutions += 1;
        }
        if candidate_ll < ll {
            // No ascent direction left at machine precision.
            converged = true;
            break;
        }

        let gain = candidate_ll - ll;
        rho = candidate;
        ll = candidate_ll;
        trace.push(ll);
        if gain < options.tol {
            converged = true;
            break;
        }
    }

    Ok(TomographyResult {
        rho_hat: rho,
        method: Method::Mle,
        log_likelihood: Some(ll),
        log_likelihood_trace: trace,
        iterations,
        converged,
    })
}
