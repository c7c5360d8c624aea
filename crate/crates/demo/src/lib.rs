//! Browser bindings for three interactive views: the phase error profile of
//! a probe with its Heisenberg limits, a number-phase uncertainty explorer,
//! and the scaling of magnetic-field bounds with the number of spins.
//!
//! Every export takes plain numbers and strings and returns a JSON string.

use holevo_limits::metrology::{
    m_spin_scaling, rms_bounds, simulate_phase_estimation, Estimator, FieldPrior, MagneticFieldSpec, PhasePrior,
    PhaseTask,
};
use holevo_limits::observables::phase_distribution;
use holevo_limits::qstate::{random_density, shannon_entropy, von_neumann_entropy};
use holevo_limits::symmetry::{g_asymmetry_u1, NumberObservable, Spin};
use holevo_limits::DensityOperator;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest truncation offered in the page.
pub const MAX_DIM: usize = 64;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Truncated coherent state `e^{-|α|²/2} Σ αⁿ/√n! |n>`, renormalized.
fn coherent(dim: usize, alpha: f64) -> Result<DensityOperator, String> {
    let mut amps = Vec::with_capacity(dim);
    let mut a = (-alpha * alpha / 2.0).exp();
    for n in 0..dim {
        if n > 0 {
            a *= alpha / (n as f64).sqrt();
        }
        amps.push(a);
    }
    let norm = amps.iter().map(|x| x * x).sum::<f64>().sqrt();
    let amps: Vec<(f64, f64)> = amps.iter().map(|x| (x / norm, 0.0)).collect();
    DensityOperator::pure_from_amplitudes(&amps).map_err(err)
}

/// Equal superposition of `|0>` and `|dim-1>`, a single-mode NOON analogue.
fn two_level(dim: usize) -> Result<DensityOperator, String> {
    let mut amps = vec![(0.0, 0.0); dim];
    amps[0].0 = std::f64::consts::FRAC_1_SQRT_2;
    amps[dim - 1].0 += std::f64::consts::FRAC_1_SQRT_2;
    let norm = amps.iter().map(|a| a.0 * a.0).sum::<f64>().sqrt();
    DensityOperator::pure_from_amplitudes(&amps.iter().map(|a| (a.0 / norm, 0.0)).collect::<Vec<_>>()).map_err(err)
}

/// `(1 - mix) probe + mix I/d`.
fn probe(kind: &str, dim: usize, alpha: f64, mix: f64, seed: u64) -> Result<DensityOperator, String> {
    if dim == 0 || dim > MAX_DIM {
        return Err(format!("dimension {dim} outside 1..={MAX_DIM}"));
    }
    if !(0.0..=1.0).contains(&mix) {
        return Err(format!("mixing weight {mix} outside [0, 1]"));
    }
    let pure = match kind {
        "coherent" => coherent(dim, alpha)?,
        "number" => DensityOperator::basis_state(dim, (alpha.max(0.0).round() as usize).min(dim - 1)),
        "two-level" => two_level(dim)?,
        "random" => random_density(dim, 1, seed).map_err(err)?,
        other => return Err(format!("unknown probe `{other}`")),
    };
    DensityOperator::mixture(&[1.0 - mix, mix], &[pure, DensityOperator::maximally_mixed(dim)]).map_err(err)
}

fn estimator(name: &str) -> Result<Estimator, String> {
    match name {
        "maximum-posterior" => Ok(Estimator::MaximumPosterior),
        "posterior-mean-circular" => Ok(Estimator::PosteriorMeanCircular),
        "identity-of-outcome" => Ok(Estimator::IdentityOfOutcome),
        other => Err(format!("unknown estimator `{other}`")),
    }
}

/// Phase error density for a uniform or Gaussian prior, with the bound chain
/// and the RMSE limits of the probe.
#[allow(clippy::too_many_arguments)]
pub fn phase_profile(
    kind: &str,
    dim: usize,
    alpha: f64,
    mix: f64,
    seed: u64,
    grid: usize,
    estimator_name: &str,
    prior_sigma: f64,
) -> Result<Value, String> {
    let rho = probe(kind, dim, alpha, mix, seed)?;
    let n = NumberObservable::number(dim);
    let prior = if prior_sigma > 0.0 {
        PhasePrior::TruncatedGaussian { mean: 0.0, sigma: prior_sigma }
    } else {
        PhasePrior::Uniform
    };
    let task = PhaseTask { prior, estimator: estimator(estimator_name)?, ..PhaseTask::covariant(rho.clone(), n.clone(), grid) };
    let report = simulate_phase_estimation(&task).map_err(err)?;
    let outcome = phase_distribution(&rho, &n, grid, 0.0).map_err(err)?;
    let cell = 2.0 * std::f64::consts::PI / grid as f64;
    let (entropy_bound, mean_bound) = rms_bounds(report.number_entropy, report.mean_number);
    Ok(json!({
        "phases": outcome.labels().iter().map(|t| if *t >= std::f64::consts::PI { t - 2.0 * std::f64::consts::PI } else { *t }).collect::<Vec<_>>(),
        "density": outcome.probs().iter().map(|p| p / cell).collect::<Vec<_>>(),
        "number": n.distribution(&rho).map_err(err)?.probs(),
        "report": serde_json::to_value(&report).map_err(err)?,
        "rms_entropy_bound": entropy_bound,
        "rms_mean_bound": mean_bound,
    }))
}

/// `H(N)`, `H(Φ)`, `S(rho)` and the slack of `H(N) + H(Φ) >= log2 2π + S(rho)`,
/// plus the asymmetry that the slack dominates.
pub fn number_phase(kind: &str, dim: usize, alpha: f64, mix: f64, seed: u64, grid: usize) -> Result<Value, String> {
    let rho = probe(kind, dim, alpha, mix, seed)?;
    let n = NumberObservable::number(dim);
    let hn = n.entropy(&rho).map_err(err)?;
    let phase = phase_distribution(&rho, &n, grid, 0.0).map_err(err)?;
    let hphi = shannon_entropy(&phase);
    let s = von_neumann_entropy(&rho).map_err(err)?;
    let log2_2pi = (2.0 * std::f64::consts::PI).log2();
    Ok(json!({
        "number_entropy": hn,
        "phase_entropy": hphi,
        "state_entropy": s,
        "bound": log2_2pi + s,
        "slack": hn + hphi - log2_2pi - s,
        "asymmetry": g_asymmetry_u1(&rho, &n).map_err(err)?,
        "number": n.distribution(&rho).map_err(err)?.probs(),
        "phase_density": phase.probs().iter().map(|p| p * grid as f64 / (2.0 * std::f64::consts::PI)).collect::<Vec<_>>(),
    }))
}

/// `T_err` and `V_err` lower bounds for `M = 1..=m_max` spins of size `j`.
pub fn field_scaling(two_j: u32, m_max: usize, mu: f64, t_int: f64) -> Result<Value, String> {
    if two_j == 0 || m_max == 0 || m_max > 256 {
        return Err("need 2j >= 1 and 1 <= M <= 256".into());
    }
    let field = MagneticFieldSpec::new(mu, t_int, FieldPrior::UniformBall { radius: None }).map_err(err)?;
    let ms: Vec<usize> = (1..=m_max).collect();
    let fit = m_spin_scaling(Spin::from_twice(two_j), &ms, &field).map_err(err)?;
    Ok(json!({ "b_pi": field.b_pi(), "fit": serde_json::to_value(&fit).map_err(err)? }))
}

fn to_js(v: Result<Value, String>) -> Result<String, JsError> {
    v.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = phaseProfile)]
#[allow(clippy::too_many_arguments)]
pub fn phase_profile_js(
    kind: &str,
    dim: usize,
    alpha: f64,
    mix: f64,
    seed: u64,
    grid: usize,
    estimator: &str,
    prior_sigma: f64,
) -> Result<String, JsError> {
    to_js(phase_profile(kind, dim, alpha, mix, seed, grid, estimator, prior_sigma))
}

#[wasm_bindgen(js_name = numberPhase)]
pub fn number_phase_js(kind: &str, dim: usize, alpha: f64, mix: f64, seed: u64, grid: usize) -> Result<String, JsError> {
    to_js(number_phase(kind, dim, alpha, mix, seed, grid))
}

#[wasm_bindgen(js_name = fieldScaling)]
pub fn field_scaling_js(two_j: u32, m_max: usize, mu: f64, t_int: f64) -> Result<String, JsError> {
    to_js(field_scaling(two_j, m_max, mu, t_int))
}
