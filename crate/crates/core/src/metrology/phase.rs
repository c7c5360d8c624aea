//! Phase estimation on a uniform grid of true phases.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{chain_holds, entropy_of, min_slack, mutual_information_of, BoundLink, Estimator, CHAIN_TOL};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::observables::{measure, phase_grid, phase_profile, Povm};
use crate::par;
use crate::qstate::{von_neumann_entropy, DensityOperator, Distribution};
use crate::symmetry::{g_asymmetry_u1, NumberObservable, Spin};

/// Joint tables larger than this are refused.
pub const PHASE_PAIR_LIMIT: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PhasePrior {
    Uniform,
    /// Gaussian in the wrapped distance from `mean`, cut off at `±π`.
    TruncatedGaussian { mean: f64, sigma: f64 },
}

impl PhasePrior {
    pub fn on_grid(&self, grid: &[f64]) -> Result<Distribution> {
        let weights = match *self {
            PhasePrior::Uniform => vec![1.0; grid.len()],
            PhasePrior::TruncatedGaussian { mean, sigma } => {
                if !(sigma > 0.0) {
                    return Err(Error::InvalidParameter(format!("prior sigma {sigma} must be positive")));
                }
                grid.iter().map(|&t| (-wrap(t - mean).powi(2) / (2.0 * sigma * sigma)).exp()).collect()
            }
        };
        Distribution::from_weights(weights, grid.to_vec())?.with_cell_width(2.0 * PI / grid.len() as f64)
    }
}

/// How outcomes are produced.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseMeasurement {
    /// The covariant phase POVM of the generator on the prior grid itself,
    /// outcomes at `offset + 2πk/K`.
    Covariant,
    /// Any POVM on the probe space; its labels are the outcome phases.
    Custom(Povm),
}

#[derive(Debug, Clone)]
pub struct PhaseTask {
    pub probe: DensityOperator,
    pub generator: NumberObservable,
    pub prior: PhasePrior,
    /// Number of true phases `K`; the grid is `offset + 2πk/K`.
    pub grid: usize,
    pub offset: f64,
    pub measurement: PhaseMeasurement,
    pub estimator: Estimator,
}

impl PhaseTask {
    pub fn covariant(probe: DensityOperator, generator: NumberObservable, grid: usize) -> Self {
        Self {
            probe,
            generator,
            prior: PhasePrior::Uniform,
            grid,
            offset: 0.0,
            measurement: PhaseMeasurement::Covariant,
            estimator: Estimator::MaximumPosterior,
        }
    }
}

/// Everything measured in one phase-estimation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimationReport {
    pub grid: usize,
    pub outcomes: usize,
    pub estimator: Estimator,
    pub uniform_prior: bool,
    /// `H(Θ)`, differential, bits.
    pub h_prior: f64,
    /// `H(Θ_err)` of the error wrapped to `[-π, π)`.
    pub h_err: f64,
    /// Entropy of the unwrapped error, present when it differs from `h_err` by more than `1e-6`.
    pub h_err_unwrapped: Option<f64>,
    pub prior_length: f64,
    pub error_length: f64,
    /// `H(Θ_est : Θ)`.
    pub estimate_information: f64,
    /// `H(A : Θ)` for the raw outcomes.
    pub measured_information: f64,
    /// `S(rho_E) - S(rho)` for the prior-weighted shifted ensemble.
    pub chi: f64,
    pub asymmetry: f64,
    /// `H(N|rho)`.
    pub number_entropy: f64,
    /// `<N>`, or `2<|J_z|>` for rotations about a known axis.
    pub mean_number: f64,
    pub rmse: f64,
    /// RMS of the binned error labels used for the entropy.
    pub binned_rmse: f64,
    /// `|H(Θ_est:Θ) - (H(Θ) - H(Θ_err))|`.
    pub saturation_gap: f64,
    pub bound_chain: Vec<BoundLink>,
}

impl EstimationReport {
    pub fn holds(&self) -> bool {
        chain_holds(&self.bound_chain)
    }

    pub fn min_slack(&self) -> f64 {
        min_slack(&self.bound_chain)
    }
}

/// Wraps to `[-π, π)`.
pub(crate) fn wrap(x: f64) -> f64 {
    x - 2.0 * PI * ((x + PI) / (2.0 * PI)).floor()
}

/// Builds the exact joint distribution of true phase and outcome, applies the
/// estimator and evaluates the full bound chain.
pub fn simulate_phase_estimation(task: &PhaseTask) -> Result<EstimationReport> {
    let n = &task.generator;
    let rho = &task.probe;
    if rho.dim() != n.dim() {
        return Err(Error::DimensionMismatch { expected: n.dim(), found: rho.dim() });
    }
    let k = task.grid;
    if k == 0 {
        return Err(Error::InvalidParameter("phase grid needs at least one point".into()));
    }
    let thetas = phase_grid(k, task.offset);
    let prior = task.prior.on_grid(&thetas)?;
    let delta = 2.0 * PI / k as f64;

    // likelihood[j * m + a] = p(a | θ_j)
    let (likelihood, outcome_phases, m) = match &task.measurement {
        PhaseMeasurement::Covariant => {
            let m = k;
            if k.saturating_mul(m) > PHASE_PAIR_LIMIT {
                return Err(Error::InfeasibleGrid { pairs: k.saturating_mul(m), limit: PHASE_PAIR_LIMIT });
            }
            let required = usize::try_from(n.span()).unwrap_or(usize::MAX).saturating_add(1);
            if m < required {
                return Err(Error::InsufficientOutcomes { outcomes: m, required });
            }
            // p(a | θ_j) depends on a - j only: f(s) at angle 2πs/K.
            let f = phase_profile(rho, n, &phase_grid(k, 0.0));
            let rows = par::map_range(k, |j| {
                let row: Vec<f64> = (0..m).map(|a| f[(a + k - j) % k].max(0.0)).collect();
                let total: f64 = row.iter().sum();
                row.into_iter().map(|p| p / total).collect::<Vec<_>>()
            });
            (rows.concat(), phase_grid(m, task.offset), m)
        }
        PhaseMeasurement::Custom(povm) => {
            let m = povm.len();
            if k.saturating_mul(m) > PHASE_PAIR_LIMIT {
                return Err(Error::InfeasibleGrid { pairs: k.saturating_mul(m), limit: PHASE_PAIR_LIMIT });
            }
            let rows = par::map(&thetas, |&t| n.shift(rho, t).and_then(|s| measure(&s, povm)).map(|d| d.probs().to_vec()))
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            (rows.concat(), povm.labels().to_vec(), m)
        }
    };

    let p = prior.probs();
    let joint: Vec<f64> = (0..k * m).map(|idx| p[idx / m] * likelihood[idx]).collect();

    // Estimate for every outcome, plus the lattice the estimates live on.
    let lattice_origin = match (task.estimator, &task.measurement) {
        (Estimator::MaximumPosterior, _) => Some(task.offset),
        (Estimator::IdentityOfOutcome, PhaseMeasurement::Covariant) => Some(task.offset),
        _ => None,
    };
    let estimates: Vec<f64> = (0..m)
        .map(|a| {
            let column = |j: usize| joint[j * m + a];
            let map_estimate = || thetas[(0..k).fold(0, |best, j| if column(j) > column(best) { j } else { best })];
            match task.estimator {
                Estimator::MaximumPosterior => map_estimate(),
                Estimator::IdentityOfOutcome => outcome_phases[a],
                Estimator::PosteriorMeanCircular => {
                    // An undefined mean direction falls back to the MAP estimate.
                    let z: C64 = (0..k).map(|j| C64::from_polar(column(j), thetas[j])).sum();
                    if z.norm() <= 1e-12 * (0..k).map(column).sum::<f64>().max(f64::MIN_POSITIVE) {
                        map_estimate()
                    } else {
                        z.arg()
                    }
                }
            }
        })
        .map(|e| task.offset + (e - task.offset).rem_euclid(2.0 * PI))
        .collect();

    // Error distributions.
    let c0 = lattice_origin.map_or(0.0, |o| o - task.offset);
    let mut wrapped_bins = vec![0.0; k];
    let mut unwrapped_bins: BTreeMap<i64, f64> = BTreeMap::new();
    let mut second_moment = 0.0;
    for j in 0..k {
        for a in 0..m {
            let w = joint[j * m + a];
            if w == 0.0 {
                continue;
            }
            let raw = estimates[a] - thetas[j];
            let err = wrap(raw);
            second_moment += w * err * err;
            let b = ((err - c0) / delta).round() as i64;
            wrapped_bins[b.rem_euclid(k as i64) as usize] += w;
            *unwrapped_bins.entry(((raw - c0) / delta).round() as i64).or_insert(0.0) += w;
        }
    }
    let bin_labels: Vec<f64> = (0..k).map(|b| wrap(c0 + b as f64 * delta)).collect();
    let binned_rmse = wrapped_bins.iter().zip(&bin_labels).map(|(w, x)| w * x * x).sum::<f64>().sqrt();
    let h_prior = entropy_of(p.iter().copied()) + delta.log2();
    let h_err = entropy_of(wrapped_bins.iter().copied()) + delta.log2();
    let h_unwrapped = entropy_of(unwrapped_bins.values().copied()) + delta.log2();
    let h_err_unwrapped = ((h_unwrapped - h_err).abs() > 1e-6).then_some(h_unwrapped);

    // Information about the phase carried by estimates and by raw outcomes.
    let mut by_estimate: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (a, e) in estimates.iter().enumerate() {
        by_estimate.entry(e.to_bits()).or_default().push(a);
    }
    let cols = by_estimate.len();
    let mut est_joint = vec![0.0; k * cols];
    for (col, outcomes) in by_estimate.values().enumerate() {
        for j in 0..k {
            est_joint[j * cols + col] = outcomes.iter().map(|&a| joint[j * m + a]).sum();
        }
    }
    let estimate_information = mutual_information_of(&est_joint, k, cols);
    let measured_information = mutual_information_of(&joint, k, m);

    // Quantum side: χ of the prior-weighted shifted ensemble, asymmetry, H(N).
    let s_rho = von_neumann_entropy(rho)?;
    let rho_e = shifted_mixture(rho, n, &thetas, p);
    let chi = von_neumann_entropy(&rho_e)? - s_rho;
    let asymmetry = g_asymmetry_u1(rho, n)?;
    let pn = n.distribution(rho)?;
    let number_entropy = crate::qstate::shannon_entropy(&pn);
    let mean_number = pn.mean();
    let rmse = second_moment.sqrt();
    let prior_length = h_prior.exp2();
    let error_length = h_err.exp2();

    let reduction = h_prior - h_err;
    let gaussian_length = (2.0 * PI * std::f64::consts::E * (binned_rmse.powi(2) + delta * delta / 12.0)).sqrt();
    let bound_chain = vec![
        BoundLink::at_most("entropy-reduction <= estimate-information", reduction, estimate_information, CHAIN_TOL),
        BoundLink::at_most("estimate-information <= measured-information", estimate_information, measured_information, CHAIN_TOL),
        BoundLink::at_most("measured-information <= chi", measured_information, chi, CHAIN_TOL),
        BoundLink::at_most("chi <= asymmetry", chi, asymmetry, CHAIN_TOL),
        BoundLink::at_most("asymmetry <= number-entropy", asymmetry, number_entropy, CHAIN_TOL),
        BoundLink::at_least(
            "error-length >= prior-length * 2^-asymmetry",
            error_length,
            prior_length * (-asymmetry).exp2(),
            CHAIN_TOL * prior_length,
        ),
        BoundLink::at_most("error-length <= gaussian-length", error_length, gaussian_length, CHAIN_TOL * prior_length),
    ];

    Ok(EstimationReport {
        grid: k,
        outcomes: m,
        estimator: task.estimator,
        uniform_prior: matches!(task.prior, PhasePrior::Uniform),
        h_prior,
        h_err,
        h_err_unwrapped,
        prior_length,
        error_length,
        estimate_information,
        measured_information,
        chi,
        asymmetry,
        number_entropy,
        mean_number,
        rmse,
        binned_rmse,
        saturation_gap: (estimate_information - reduction).abs(),
        bound_chain,
    })
}

/// `Σ_j p_j e^{-iNθ_j} rho e^{iNθ_j}`, entrywise.
fn shifted_mixture(rho: &DensityOperator, n: &NumberObservable, thetas: &[f64], p: &[f64]) -> DensityOperator {
    let levels = n.levels();
    let d = n.dim();
    let m = rho.matrix();
    let mut cache: BTreeMap<i64, C64> = BTreeMap::new();
    let mut out = CMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            let dl = levels[a] - levels[b];
            let factor = *cache
                .entry(dl)
                .or_insert_with(|| thetas.iter().zip(p).map(|(&t, &w)| C64::from_polar(w, -(dl as f64) * t)).sum());
            out[(a, b)] = m[(a, b)] * factor;
        }
    }
    DensityOperator::from_valid(out)
}

/// Rotation about the known `z` axis, treated as phase estimation with
/// generator `J_z + j`. The report's `mean_number` is `2<|J_z|>`.
pub fn known_axis_rotation_estimation(
    probe: &DensityOperator,
    spin: Spin,
    prior: PhasePrior,
    grid: usize,
    estimator: Estimator,
) -> Result<EstimationReport> {
    let generator = NumberObservable::spin_z(spin);
    let task = PhaseTask {
        probe: probe.clone(),
        generator,
        prior,
        grid,
        offset: 0.0,
        measurement: PhaseMeasurement::Covariant,
        estimator,
    };
    let mut report = simulate_phase_estimation(&task)?;
    let diag = probe.diagonal();
    report.mean_number = spin.twice_m().zip(diag).map(|(m2, p)| p * (m2 as f64).abs()).sum();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CVector;
    use crate::observables::canonical_phase_povm;
    use crate::qstate::random_density_with;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plus() -> DensityOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityOperator::pure_from_amplitudes(&[(s, 0.0), (s, 0.0)]).unwrap()
    }

    #[test]
    fn number_eigenstate_gives_no_information() {
        let task = PhaseTask::covariant(DensityOperator::basis_state(4, 2), NumberObservable::number(4), 64);
        let r = simulate_phase_estimation(&task).unwrap();
        assert!(r.estimate_information.abs() < 1e-12);
        assert!((r.error_length - r.prior_length).abs() < 1e-9);
        assert!(r.holds());
    }

    #[test]
    fn covariant_saturation_for_plus_state() {
        for est in [Estimator::MaximumPosterior, Estimator::IdentityOfOutcome] {
            let mut task = PhaseTask::covariant(plus(), NumberObservable::number(2), 256);
            task.estimator = est;
            let r = simulate_phase_estimation(&task).unwrap();
            assert!(r.saturation_gap <= 2e-3, "{est:?}: {}", r.saturation_gap);
            assert!(r.holds(), "{:?}", r.bound_chain);
        }
    }

    #[test]
    fn noon_gain_is_at_most_one_bit() {
        for gap in [1, 3, 6] {
            let mut ket = CVector::zeros(gap + 1);
            ket[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            ket[gap] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let rho = DensityOperator::pure(&ket).unwrap();
            let r = simulate_phase_estimation(&PhaseTask::covariant(rho, NumberObservable::number(gap + 1), 96)).unwrap();
            assert!(r.estimate_information <= 1.0 + 1e-9);
            assert!((r.asymmetry - 1.0).abs() < 1e-9);
            assert!(r.holds());
        }
    }

    #[test]
    fn custom_povm_matches_covariant_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_density_with(&mut rng, 4, 2).unwrap();
        let n = NumberObservable::number(4);
        let mut a = PhaseTask::covariant(rho.clone(), n.clone(), 32);
        let ra = simulate_phase_estimation(&a).unwrap();
        a.measurement = PhaseMeasurement::Custom(canonical_phase_povm(4, 32).unwrap());
        let rb = simulate_phase_estimation(&a).unwrap();
        assert!((ra.estimate_information - rb.estimate_information).abs() < 1e-10);
        assert!((ra.h_err - rb.h_err).abs() < 1e-10);
    }

    #[test]
    fn error_distribution_ignores_grid_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = random_density_with(&mut rng, 5, 5).unwrap();
        for est in [Estimator::MaximumPosterior, Estimator::PosteriorMeanCircular, Estimator::IdentityOfOutcome] {
            let mut task = PhaseTask::covariant(rho.clone(), NumberObservable::number(5), 40);
            task.estimator = est;
            let base = simulate_phase_estimation(&task).unwrap();
            task.offset = 0.37;
            let moved = simulate_phase_estimation(&task).unwrap();
            assert!((base.h_err - moved.h_err).abs() < 1e-9, "{est:?}");
            assert!(moved.holds(), "{est:?}: {:?}", moved.bound_chain);
        }
    }

    #[test]
    fn gaussian_prior_chain_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let rho = random_density_with(&mut rng, 6, 1).unwrap();
        for est in [Estimator::MaximumPosterior, Estimator::PosteriorMeanCircular, Estimator::IdentityOfOutcome] {
            let task = PhaseTask {
                probe: rho.clone(),
                generator: NumberObservable::number(6),
                prior: PhasePrior::TruncatedGaussian { mean: 1.0, sigma: 0.6 },
                grid: 64,
                offset: 0.1,
                measurement: PhaseMeasurement::Covariant,
                estimator: est,
            };
            let r = simulate_phase_estimation(&task).unwrap();
            assert!(!r.uniform_prior);
            assert!(r.holds(), "{est:?}: {:?}", r.bound_chain);
        }
    }

    #[test]
    fn known_axis_matches_qubit_phase() {
        let half = Spin::from_twice(1);
        let r = known_axis_rotation_estimation(&plus(), half, PhasePrior::Uniform, 64, Estimator::MaximumPosterior).unwrap();
        let q = simulate_phase_estimation(&PhaseTask::covariant(plus(), NumberObservable::number(2), 64)).unwrap();
        assert!((r.h_err - q.h_err).abs() < 1e-12);
        assert!((r.estimate_information - q.estimate_information).abs() < 1e-12);
        assert!((r.mean_number - 1.0).abs() < 1e-12);

        let one = Spin::from_twice(2);
        let eig = DensityOperator::basis_state(3, 1);
        let r = known_axis_rotation_estimation(&eig, one, PhasePrior::Uniform, 32, Estimator::MaximumPosterior).unwrap();
        assert!(r.estimate_information.abs() < 1e-12);
        let s = 1.0 / 3.0f64.sqrt();
        let eq = DensityOperator::pure_from_amplitudes(&[(s, 0.0), (s, 0.0), (s, 0.0)]).unwrap();
        let r = known_axis_rotation_estimation(&eq, one, PhasePrior::Uniform, 32, Estimator::MaximumPosterior).unwrap();
        assert!((r.number_entropy - 3.0f64.log2()).abs() < 1e-12);
        assert!(r.holds());
    }

    #[test]
    fn rejects_coarse_and_oversized_grids() {
        let task = PhaseTask::covariant(plus(), NumberObservable::new(vec![0, 5]).unwrap(), 4);
        assert!(matches!(simulate_phase_estimation(&task), Err(Error::InsufficientOutcomes { .. })));
        let task = PhaseTask::covariant(plus(), NumberObservable::number(2), 4000);
        assert!(matches!(simulate_phase_estimation(&task), Err(Error::InfeasibleGrid { .. })));
    }
}
