//! Signal ensembles, Shannon mutual information and the Holevo quantity.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::observables::{measure, Povm};
use crate::par;
use crate::qstate::{
    classical_relative_entropy, quantum_relative_entropy, shannon_entropy, von_neumann_entropy, DensityOperator,
    Distribution,
};
use crate::symmetry::NumberObservable;

/// Dense joint distributions are capped at this many entries.
pub const JOINT_ENTRY_LIMIT: usize = 1_000_000;

/// Signal states `rho_x` sent with prior probabilities `p(x)`.
#[derive(Debug, Clone)]
pub struct SignalEnsemble {
    states: Vec<DensityOperator>,
    prior: Distribution,
}

impl SignalEnsemble {
    pub fn new(states: Vec<DensityOperator>, prior: Distribution) -> Result<Self> {
        let first = states.first().ok_or_else(|| Error::InvalidParameter("ensemble needs a state".into()))?;
        if prior.len() != states.len() {
            return Err(Error::DimensionMismatch { expected: states.len(), found: prior.len() });
        }
        if let Some(s) = states.iter().find(|s| s.dim() != first.dim()) {
            return Err(Error::DimensionMismatch { expected: first.dim(), found: s.dim() });
        }
        Ok(Self { states, prior })
    }

    pub fn uniform(states: Vec<DensityOperator>) -> Result<Self> {
        let prior = Distribution::uniform(states.len())?;
        Self::new(states, prior)
    }

    /// `{e^{-iNθ_k} rho e^{iNθ_k}; p_k}` with `θ_k` read from the prior's labels.
    pub fn phase_shifts(rho: &DensityOperator, n: &NumberObservable, prior: Distribution) -> Result<Self> {
        let states = prior.labels().iter().map(|&t| n.shift(rho, t)).collect::<Result<Vec<_>>>()?;
        Self::new(states, prior)
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn prior(&self) -> &Distribution {
        &self.prior
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// `rho_E = Σ_x p(x) rho_x`.
pub fn ensemble_state(e: &SignalEnsemble) -> Result<DensityOperator> {
    DensityOperator::mixture(e.prior.probs(), &e.states)
}

/// `χ = S(rho_E) - Σ_x p(x) S(rho_x)`.
pub fn holevo_chi(e: &SignalEnsemble) -> Result<f64> {
    let entropies = par::map(&e.states, von_neumann_entropy).into_iter().collect::<Result<Vec<_>>>()?;
    let average: f64 = e.prior.probs().iter().zip(&entropies).map(|(p, s)| p * s).sum();
    Ok(von_neumann_entropy(&ensemble_state(e)?)? - average)
}

/// `p(a, x)` stored as outcomes by signals.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    matrix: DMatrix<f64>,
}

impl JointDistribution {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.len() > JOINT_ENTRY_LIMIT {
            return Err(Error::InfeasibleGrid { pairs: matrix.len(), limit: JOINT_ENTRY_LIMIT });
        }
        if let Some(p) = matrix.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution(format!("joint probability {p} is negative or not finite")));
        }
        let total = matrix.sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDistribution(format!("joint probabilities sum to {total}")));
        }
        Ok(Self { matrix })
    }

    /// `p(a, x) = p(x) tr[A_a rho_x]`.
    pub fn from_ensemble(e: &SignalEnsemble, m: &Povm) -> Result<Self> {
        let columns = par::map(&e.states, |s| measure(s, m)).into_iter().collect::<Result<Vec<_>>>()?;
        let matrix = DMatrix::from_fn(m.len(), e.len(), |a, x| e.prior.probs()[x] * columns[x].probs()[a]);
        Self::new(matrix)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `p(a)`.
    pub fn outcome_marginal(&self) -> Vec<f64> {
        self.matrix.row_iter().map(|r| r.sum()).collect()
    }

    /// `p(x)`.
    pub fn signal_marginal(&self) -> Vec<f64> {
        self.matrix.column_iter().map(|col| col.sum()).collect()
    }

    /// `H(A) + H(X) - H(A, X)`.
    pub fn mutual_information(&self) -> f64 {
        let h = |v: &[f64]| -v.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>();
        h(&self.outcome_marginal()) + h(&self.signal_marginal()) - h(self.matrix.as_slice())
    }
}

/// `H(A:X) = H(A|rho_E) - Σ_x p(x) H(A|rho_x)`.
pub fn mutual_information(e: &SignalEnsemble, m: &Povm) -> Result<f64> {
    check_dims(e, m)?;
    let outcomes = par::map(&e.states, |s| measure(s, m)).into_iter().collect::<Result<Vec<_>>>()?;
    let average: f64 = e.prior.probs().iter().zip(&outcomes).map(|(p, d)| p * discrete_entropy(d)).sum();
    Ok(discrete_entropy(&measure(&ensemble_state(e)?, m)?) - average)
}

/// `H(A:X) = Σ_x p(x) H(p_x ‖ p_E)`; agrees with [`mutual_information`].
pub fn mutual_information_relative(e: &SignalEnsemble, m: &Povm) -> Result<f64> {
    check_dims(e, m)?;
    let pe = measure(&ensemble_state(e)?, m)?;
    let terms = par::map(&e.states, |s| classical_relative_entropy(&measure(s, m)?, &pe))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(e.prior.probs().iter().zip(&terms).filter(|(p, _)| **p > 0.0).map(|(p, d)| p * d).sum())
}

/// `S(rho_1 ‖ rho_2) - H(p_1 ‖ p_2)`; `+∞` when the quantum term is infinite.
pub fn data_processing_check(r1: &DensityOperator, r2: &DensityOperator, m: &Povm) -> Result<f64> {
    let quantum = quantum_relative_entropy(r1, r2)?;
    if quantum.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let classical = classical_relative_entropy(&measure(r1, m)?, &measure(r2, m)?)?;
    Ok(quantum - classical)
}

/// Projective measurement onto a common eigenbasis of commuting states.
pub fn joint_eigenbasis_povm(e: &SignalEnsemble) -> Result<Povm> {
    let basis: CMatrix = ensemble_state(e)?.eigen()?.vectors;
    Povm::projective(&basis, (0..e.dim()).map(|k| k as f64).collect())
}

fn discrete_entropy(d: &Distribution) -> f64 {
    match d.cell_width() {
        Some(w) => shannon_entropy(d) - w.log2(),
        None => shannon_entropy(d),
    }
}

fn check_dims(e: &SignalEnsemble, m: &Povm) -> Result<()> {
    if e.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: e.dim(), found: m.dim() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_unitary;
    use crate::observables::{canonical_phase_povm, number_phase_slack, phase_grid};
    use crate::qstate::{random_density_with, random_pure_with};
    use crate::symmetry::g_asymmetry_u1;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bb84() -> SignalEnsemble {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let kets = [[(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (1.0, 0.0)], [(s, 0.0), (s, 0.0)], [(s, 0.0), (-s, 0.0)]];
        SignalEnsemble::uniform(kets.iter().map(|k| DensityOperator::pure_from_amplitudes(k).unwrap()).collect()).unwrap()
    }

    fn orthogonal_pair() -> SignalEnsemble {
        SignalEnsemble::uniform(vec![DensityOperator::basis_state(2, 0), DensityOperator::basis_state(2, 1)]).unwrap()
    }

    #[test]
    fn ensemble_state_examples() {
        let half = DensityOperator::maximally_mixed(2);
        assert!(ensemble_state(&orthogonal_pair()).unwrap().distance(&half).unwrap() < 1e-15);
        assert!(ensemble_state(&bb84()).unwrap().distance(&half).unwrap() < 1e-15);
        let single = SignalEnsemble::uniform(vec![DensityOperator::basis_state(3, 1)]).unwrap();
        assert!(ensemble_state(&single).unwrap().distance(&DensityOperator::basis_state(3, 1)).unwrap() < 1e-15);
    }

    #[test]
    fn chi_examples() {
        let same = SignalEnsemble::uniform(vec![DensityOperator::maximally_mixed(3); 4]).unwrap();
        assert!(holevo_chi(&same).unwrap().abs() < 1e-12);
        assert!((holevo_chi(&orthogonal_pair()).unwrap() - 1.0).abs() < 1e-12);
        assert!((holevo_chi(&bb84()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_examples() {
        let z = Povm::computational(2, vec![0.0, 1.0]).unwrap();
        assert!((mutual_information(&orthogonal_pair(), &z).unwrap() - 1.0).abs() < 1e-12);
        assert!(mutual_information(&bb84(), &Povm::trivial(2)).unwrap().abs() < 1e-12);
        assert!((mutual_information(&bb84(), &z).unwrap() - 0.5).abs() < 1e-12);
        let joint = JointDistribution::from_ensemble(&bb84(), &z).unwrap();
        assert!((joint.mutual_information() - 0.5).abs() < 1e-12);
        assert!((mutual_information_relative(&bb84(), &z).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn data_processing_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_density_with(&mut rng, 3, 3).unwrap();
        let m = Povm::computational(3, vec![0.0, 1.0, 2.0]).unwrap();
        assert!(data_processing_check(&rho, &rho, &m).unwrap().abs() < 1e-12);
        let r1 = DensityOperator::from_diagonal(&[0.5, 0.3, 0.2]).unwrap();
        let r2 = DensityOperator::from_diagonal(&[0.1, 0.6, 0.3]).unwrap();
        assert!(data_processing_check(&r1, &r2, &m).unwrap().abs() < 1e-12);
        let slack = data_processing_check(&DensityOperator::basis_state(3, 0), &DensityOperator::basis_state(3, 1), &m);
        assert_eq!(slack.unwrap(), f64::INFINITY);
    }

    #[test]
    fn commuting_ensembles_saturate_chi() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for d in [2, 5, 9] {
            let u = random_unitary(&mut rng, d);
            let states: Vec<DensityOperator> = (0..4)
                .map(|_| {
                    let w: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
                    let total: f64 = w.iter().sum();
                    let diag: Vec<f64> = w.iter().map(|x| x / total).collect();
                    DensityOperator::from_diagonal(&diag).unwrap().conjugate_by(&u).unwrap()
                })
                .collect();
            let e = SignalEnsemble::new(states, Distribution::from_weights(vec![0.1, 0.2, 0.3, 0.4], vec![0.0; 4]).unwrap()).unwrap();
            let basis = Povm::projective(&u, (0..d).map(|k| k as f64).collect()).unwrap();
            assert!((mutual_information(&e, &basis).unwrap() - holevo_chi(&e).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn asymmetry_is_chi_of_uniform_shifts() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = NumberObservable::total_number(&[2, 3]);
        let rho = random_density_with(&mut rng, 6, 2).unwrap();
        let prior = Distribution::new(vec![1.0 / 8.0; 8], phase_grid(8, 0.0)).unwrap();
        let e = SignalEnsemble::phase_shifts(&rho, &n, prior).unwrap();
        assert!((holevo_chi(&e).unwrap() - g_asymmetry_u1(&rho, &n).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn number_phase_slack_is_holevo_gap() {
        // With a uniform prior on the POVM grid the EUR slack equals χ - H(Θ:Φ).
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = NumberObservable::number(5);
        let m = 16;
        let povm = canonical_phase_povm(5, m).unwrap();
        for rank in [1, 3, 5] {
            let rho = random_density_with(&mut rng, 5, rank).unwrap();
            let prior = Distribution::new(vec![1.0 / m as f64; m], phase_grid(m, 0.0)).unwrap();
            let e = SignalEnsemble::phase_shifts(&rho, &n, prior).unwrap();
            let gap = holevo_chi(&e).unwrap() - mutual_information(&e, &povm).unwrap();
            assert!((gap - number_phase_slack(&rho, &n, m).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn joint_distribution_rejects_bad_input() {
        assert!(JointDistribution::new(DMatrix::from_element(2, 2, 0.3)).is_err());
        assert!(JointDistribution::new(DMatrix::from_row_slice(1, 2, &[1.2, -0.2])).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn holevo_bound_and_formula_agreement(seed in any::<u64>(), d in 2usize..7, k in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let states: Vec<DensityOperator> = (0..k).map(|_| {
                let rank = rng.random_range(1..=d);
                random_density_with(&mut rng, d, rank).unwrap()
            }).collect();
            let weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
            let e = SignalEnsemble::new(states, Distribution::from_weights(weights, vec![0.0; k]).unwrap()).unwrap();
            let povm = Povm::projective(&random_unitary(&mut rng, d), vec![0.0; d]).unwrap();
            let info = mutual_information(&e, &povm).unwrap();
            prop_assert!(info <= holevo_chi(&e).unwrap() + 1e-9);
            prop_assert!((info - mutual_information_relative(&e, &povm).unwrap()).abs() <= 1e-9);
        }

        #[test]
        fn data_processing_holds(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r1 = random_density_with(&mut rng, 4, 4).unwrap();
            let r2 = random_pure_with(&mut rng, 4);
            let r2 = DensityOperator::mixture(&[0.7, 0.3], &[r2, DensityOperator::maximally_mixed(4)]).unwrap();
            let povm = Povm::projective(&random_unitary(&mut rng, 4), vec![0.0; 4]).unwrap();
            prop_assert!(data_processing_check(&r1, &r2, &povm).unwrap() >= -1e-9);
        }
    }
}
