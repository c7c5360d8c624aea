//! Density operators, classical distributions and the entropies built on them.
//!
//! All entropies are in bits. Eigenvalues at or below [`EIGEN_FLOOR`] count as
//! exact zeros, both for `0 log 0 = 0` and for support tests in the relative
//! entropies, which return `f64::INFINITY` when the first argument is not
//! supported inside the second.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, HermitianEigen, EIGEN_FLOOR};

/// Maximum entry of `rho - rho†` tolerated on construction.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Allowed deviation of the trace from one.
pub const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues down to `-PSD_TOL` are rounding noise and get clipped to zero.
pub const PSD_TOL: f64 = 1e-10;
/// Allowed deviation of a distribution's total from one.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    labels: Option<Vec<String>>,
}

impl DensityOperator {
    /// Validates `matrix` against the Hermitian, unit-trace and PSD invariants.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        let defect = linalg::hermitian_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let matrix = linalg::hermitize(&matrix);
        let lowest = linalg::eigvalsh(&matrix)?[0];
        if lowest < -PSD_TOL {
            return Err(Error::NotPositive(lowest));
        }
        Ok(Self { matrix, labels: None })
    }

    /// Wraps a matrix produced by an operation known to preserve validity
    /// (twirls, unitary conjugation, mixtures, partial traces).
    pub(crate) fn from_valid(matrix: CMatrix) -> Self {
        debug_assert!(matrix.is_square());
        Self { matrix: linalg::hermitize(&matrix), labels: None }
    }

    /// `|psi><psi|` for a ket normalised on the way in.
    pub fn pure(ket: &CVector) -> Result<Self> {
        let norm = ket.norm();
        if ket.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("ket must be nonzero and finite".into()));
        }
        let ket = ket.unscale(norm);
        Ok(Self::from_valid(linalg::projector(&ket)))
    }

    /// Pure state from amplitudes given as `(re, im)` pairs.
    pub fn pure_from_amplitudes(amplitudes: &[(f64, f64)]) -> Result<Self> {
        let ket = CVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|&(re, im)| c(re, im)));
        Self::pure(&ket)
    }

    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        let d = Distribution::from_probs(probs.to_vec())?;
        let diag = CVector::from_iterator(probs.len(), d.probs().iter().map(|&p| c(p, 0.0)));
        Ok(Self::from_valid(CMatrix::from_diagonal(&diag)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_valid(CMatrix::identity(dim, dim) * c(1.0 / dim as f64, 0.0))
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = c(1.0, 0.0);
        Self::from_valid(m)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn eigen(&self) -> Result<HermitianEigen> {
        linalg::eigh(&self.matrix)
    }

    /// Eigenvalues in ascending order with rounding negatives clipped to zero.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(clip(linalg::eigvalsh(&self.matrix)?))
    }

    /// Diagonal in the working basis, i.e. the outcome distribution of a
    /// computational-basis measurement.
    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re.max(0.0)).collect()
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.matrix, &self.matrix).re
    }

    /// `U rho U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.nrows() });
        }
        Ok(Self::from_valid(u * &self.matrix * u.adjoint()))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self::from_valid(linalg::kron(&self.matrix, &other.matrix))
    }

    /// Frobenius distance between the two matrices.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(linalg::frobenius(&(&self.matrix - &other.matrix)))
    }

    /// Convex combination `sum_i w_i rho_i`; weights must form a distribution.
    pub fn mixture(weights: &[f64], states: &[DensityOperator]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::DimensionMismatch { expected: states.len(), found: weights.len() });
        }
        Distribution::from_probs(weights.to_vec())?;
        let dim = states[0].dim();
        let mut acc = CMatrix::zeros(dim, dim);
        for (w, s) in weights.iter().zip(states) {
            check_dims(dim, s.dim())?;
            acc += s.matrix() * c(*w, 0.0);
        }
        Ok(Self::from_valid(acc))
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn clip(mut values: Vec<f64>) -> Vec<f64> {
    for v in &mut values {
        if *v < 0.0 && *v >= -PSD_TOL {
            *v = 0.0;
        }
    }
    values
}

/// A finite probability distribution with numeric outcome labels.
///
/// When `cell_width` is set each outcome stands for a cell of that measure
/// and entropies are differential: `H_discrete + log2(cell_width)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    probs: Vec<f64>,
    labels: Vec<f64>,
    cell_width: Option<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>, labels: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        if labels.len() != probs.len() {
            return Err(Error::DimensionMismatch { expected: probs.len(), found: labels.len() });
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution(format!("probability {p} is negative or not finite")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(Self { probs, labels, cell_width: None })
    }

    /// Outcomes labelled `0, 1, ..., n-1`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let labels = (0..probs.len()).map(|i| i as f64).collect();
        Self::new(probs, labels)
    }

    /// Rescales nonnegative weights to unit total.
    pub fn from_weights(weights: Vec<f64>, labels: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect(), labels)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_probs(vec![1.0 / n as f64; n])
    }

    pub fn point_mass(n: usize, at: usize) -> Result<Self> {
        let mut p = vec![0.0; n];
        p[at] = 1.0;
        Self::from_probs(p)
    }

    pub fn with_cell_width(mut self, width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidParameter(format!("cell width {width} must be positive")));
        }
        self.cell_width = Some(width);
        Ok(self)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn cell_width(&self) -> Option<f64> {
        self.cell_width
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().zip(&self.labels).map(|(p, x)| p * x).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.probs.iter().zip(&self.labels).map(|(p, x)| p * (x - mean).powi(2)).sum()
    }
}

/// `-sum p log2 p` over values above the eigenvalue floor.
pub(crate) fn entropy_bits(values: &[f64]) -> f64 {
    -values
        .iter()
        .filter(|&&p| p > EIGEN_FLOOR)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// Shannon entropy in bits, differential when the distribution carries a cell width.
pub fn shannon_entropy(d: &Distribution) -> f64 {
    let h = -d
        .probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>();
    match d.cell_width {
        Some(w) => h + w.log2(),
        None => h,
    }
}

pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    Ok(entropy_bits(&rho.spectrum()?))
}

/// `tr[r1 (log2 r1 - log2 r2)]`, infinite when `supp r1` is not inside `supp r2`.
pub fn quantum_relative_entropy(r1: &DensityOperator, r2: &DensityOperator) -> Result<f64> {
    check_dims(r1.dim(), r2.dim())?;
    let e1 = r1.eigen()?;
    let e2 = r2.eigen()?;
    let n = r1.dim();
    // <v_j| r1 |v_j> for each eigenvector of r2.
    let projected = e2.vectors.adjoint() * r1.matrix() * &e2.vectors;
    let mut cross = 0.0;
    for j in 0..n {
        let weight = projected[(j, j)].re;
        let mu = e2.values[j];
        if mu <= EIGEN_FLOOR {
            if weight > EIGEN_FLOOR {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross += weight * mu.log2();
    }
    let self_term = -entropy_bits(&clip(e1.values));
    Ok((self_term - cross).max(0.0))
}

/// `sum p1 log2(p1 / p2)`, infinite when `p2` vanishes where `p1` does not.
pub fn classical_relative_entropy(d1: &Distribution, d2: &Distribution) -> Result<f64> {
    check_dims(d1.len(), d2.len())?;
    let mut acc = 0.0;
    for (&p, &q) in d1.probs.iter().zip(&d2.probs) {
        if p <= 0.0 {
            continue;
        }
        if q <= 0.0 {
            return Ok(f64::INFINITY);
        }
        acc += p * (p / q).log2();
    }
    Ok(acc.max(0.0))
}

/// Ensemble volume `K 2^S`; with `k = 1` this is the effective number of
/// occupied dimensions or bins (or length, for a differential entropy).
pub fn ensemble_volume(entropy: f64, k: f64) -> f64 {
    k * entropy.exp2()
}

/// Traces out factor `traced` of a tensor product with the given factor dimensions.
pub fn partial_trace(rho: &DensityOperator, factor_dims: &[usize], traced: usize) -> Result<DensityOperator> {
    let total: usize = factor_dims.iter().product();
    if factor_dims.is_empty() || total != rho.dim() || traced >= factor_dims.len() || factor_dims.contains(&0) {
        return Err(Error::BadFactorization { dims: factor_dims.to_vec(), dim: rho.dim() });
    }
    let left: usize = factor_dims[..traced].iter().product();
    let mid = factor_dims[traced];
    let right: usize = factor_dims[traced + 1..].iter().product();
    let out_dim = left * right;
    let m = rho.matrix();
    let out = CMatrix::from_fn(out_dim, out_dim, |a, b| {
        let (la, ra) = (a / right, a % right);
        let (lb, rb) = (b / right, b % right);
        (0..mid)
            .map(|t| m[((la * mid + t) * right + ra, (lb * mid + t) * right + rb)])
            .sum()
    });
    Ok(DensityOperator::from_valid(out))
}

/// Pure state on `H ⊗ H` whose marginal on the first factor is `rho`.
pub fn purify(rho: &DensityOperator) -> Result<DensityOperator> {
    let e = rho.eigen()?;
    let d = rho.dim();
    let mut ket = CVector::zeros(d * d);
    for (i, &lambda) in e.values.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        let amp = lambda.sqrt();
        for a in 0..d {
            ket[a * d + i] += e.vectors[(a, i)] * amp;
        }
    }
    DensityOperator::pure(&ket)
}

/// Ginibre (Hilbert-Schmidt for full rank) random density operator, deterministic per seed.
pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityOperator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_density_with(&mut rng, dim, rank)
}

pub fn random_density_with<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Result<DensityOperator> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::InvalidParameter(format!("need 1 <= rank <= dim, got rank {rank}, dim {dim}")));
    }
    let g = linalg::ginibre(rng, dim, rank);
    let w = &g * g.adjoint();
    let tr = linalg::trace(&w).re;
    Ok(DensityOperator::from_valid(w * c(1.0 / tr, 0.0)))
}

pub fn random_pure_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityOperator {
    DensityOperator::from_valid(linalg::projector(&linalg::random_ket(rng, dim)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_unitary;
    use proptest::prelude::*;
    use rand::Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn shannon_examples() {
        assert!(close(shannon_entropy(&Distribution::uniform(8).unwrap()), 3.0, 1e-12));
        assert_eq!(shannon_entropy(&Distribution::point_mass(5, 2).unwrap()), 0.0);
        let u = Distribution::uniform(64).unwrap().with_cell_width(2.0 * std::f64::consts::PI / 64.0).unwrap();
        assert!(close(shannon_entropy(&u), (2.0 * std::f64::consts::PI).log2(), 1e-12));
    }

    #[test]
    fn geometric_entropy_matches_direct_sum() {
        // Direct summation oracle for p_n = (3/4) 4^-n, n = 0..40.
        let probs: Vec<f64> = (0..=40).map(|n| 0.75 * 4f64.powi(-n)).collect();
        let oracle: f64 = probs.iter().map(|p| -p * p.log2()).sum();
        let total: f64 = probs.iter().sum();
        let d = Distribution::from_weights(probs, (0..=40).map(f64::from).collect()).unwrap();
        assert!(close(total, 1.0, 1e-12));
        assert!(close(shannon_entropy(&d), oracle, 1e-12));
        assert!(close(oracle, (4.0f64 / 3.0).log2() + 2.0 / 3.0, 1e-12));
    }

    #[test]
    fn von_neumann_examples() {
        assert_eq!(von_neumann_entropy(&DensityOperator::basis_state(4, 0)).unwrap(), 0.0);
        assert!(close(von_neumann_entropy(&DensityOperator::maximally_mixed(16)).unwrap(), 4.0, 1e-12));
        let rho = DensityOperator::from_diagonal(&[0.5, 0.25, 0.25]).unwrap();
        assert!(close(von_neumann_entropy(&rho).unwrap(), 1.5, 1e-12));
    }

    #[test]
    fn relative_entropy_examples() {
        let zero = DensityOperator::basis_state(2, 0);
        let one = DensityOperator::basis_state(2, 1);
        let mixed = DensityOperator::maximally_mixed(2);
        assert!(close(quantum_relative_entropy(&zero, &zero).unwrap(), 0.0, 1e-12));
        assert!(close(quantum_relative_entropy(&zero, &mixed).unwrap(), 1.0, 1e-12));
        assert_eq!(quantum_relative_entropy(&zero, &one).unwrap(), f64::INFINITY);

        let p = Distribution::from_probs(vec![1.0, 0.0]).unwrap();
        let q = Distribution::uniform(2).unwrap();
        assert_eq!(classical_relative_entropy(&p, &p).unwrap(), 0.0);
        assert!(close(classical_relative_entropy(&p, &q).unwrap(), 1.0, 1e-12));
        assert_eq!(classical_relative_entropy(&q, &p).unwrap(), f64::INFINITY);
        assert!(matches!(
            quantum_relative_entropy(&zero, &DensityOperator::maximally_mixed(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn volume_examples() {
        let h = shannon_entropy(&Distribution::uniform(5).unwrap());
        assert!(close(ensemble_volume(h, 1.0), 5.0, 1e-12));
        assert_eq!(ensemble_volume(0.0, 1.0), 1.0);
        let two_pi = 2.0 * std::f64::consts::PI;
        let u = Distribution::uniform(100).unwrap().with_cell_width(two_pi / 100.0).unwrap();
        assert!(close(ensemble_volume(shannon_entropy(&u), 1.0), two_pi, 1e-12));
    }

    #[test]
    fn partial_trace_examples() {
        let a = random_density(3, 3, 1).unwrap();
        let b = random_density(2, 2, 2).unwrap();
        let ab = a.tensor(&b);
        assert!(partial_trace(&ab, &[3, 2], 1).unwrap().distance(&a).unwrap() < 1e-12);
        assert!(partial_trace(&ab, &[3, 2], 0).unwrap().distance(&b).unwrap() < 1e-12);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = DensityOperator::pure_from_amplitudes(&[(0.0, 0.0), (s, 0.0), (-s, 0.0), (0.0, 0.0)]).unwrap();
        let marginal = partial_trace(&singlet, &[2, 2], 1).unwrap();
        assert!(marginal.distance(&DensityOperator::maximally_mixed(2)).unwrap() < 1e-12);

        assert!(matches!(partial_trace(&ab, &[2, 2], 0), Err(Error::BadFactorization { .. })));
    }

    #[test]
    fn schmidt_marginals_share_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let psi = random_pure_with(&mut rng, 12);
            let sa = partial_trace(&psi, &[3, 4], 1).unwrap().spectrum().unwrap();
            let sb = partial_trace(&psi, &[3, 4], 0).unwrap().spectrum().unwrap();
            let sa: Vec<f64> = sa.into_iter().filter(|x| *x > 1e-10).collect();
            let sb: Vec<f64> = sb.into_iter().filter(|x| *x > 1e-10).collect();
            assert_eq!(sa.len(), sb.len());
            for (x, y) in sa.iter().zip(&sb) {
                assert!(close(*x, *y, 1e-10));
            }
        }
    }

    #[test]
    fn purification_examples() {
        let pure = DensityOperator::basis_state(3, 1);
        let p = purify(&pure).unwrap();
        assert!(close(p.purity(), 1.0, 1e-12));
        assert!(partial_trace(&p, &[3, 3], 1).unwrap().distance(&pure).unwrap() < 1e-10);

        let p = purify(&DensityOperator::maximally_mixed(2)).unwrap();
        let marginal = partial_trace(&p, &[2, 2], 1).unwrap();
        assert!(close(von_neumann_entropy(&marginal).unwrap(), 1.0, 1e-12));

        let rho = DensityOperator::from_diagonal(&[0.7, 0.3]).unwrap();
        let spec = partial_trace(&purify(&rho).unwrap(), &[2, 2], 1).unwrap().spectrum().unwrap();
        assert!(close(spec[0], 0.3, 1e-12) && close(spec[1], 0.7, 1e-12));
    }

    #[test]
    fn random_density_rank_and_determinism() {
        let pure = random_density(4, 1, 5).unwrap();
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-9);
        assert_eq!(random_density(4, 4, 77).unwrap(), random_density(4, 4, 77).unwrap());
        assert!(random_density(4, 5, 0).is_err());
    }

    #[test]
    fn mean_qubit_entropy_is_seed_independent() {
        // Two independent Monte Carlo estimates of E[S] under the
        // Hilbert-Schmidt measure at d = 2 must agree within 3 sigma.
        let estimate = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xs: Vec<f64> = (0..10_000)
                .map(|_| von_neumann_entropy(&random_density_with(&mut rng, 2, 2).unwrap()).unwrap())
                .collect();
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (mean, (var / n).sqrt())
        };
        let (m1, s1) = estimate(100);
        let (m2, s2) = estimate(200);
        assert!((m1 - m2).abs() <= 3.0 * (s1 * s1 + s2 * s2).sqrt());
    }

    #[test]
    fn construction_rejects_invalid_matrices() {
        let mut m = CMatrix::identity(2, 2) * c(0.5, 0.0);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(DensityOperator::new(m), Err(Error::NotHermitian(_))));
        let m = CMatrix::identity(2, 2);
        assert!(matches!(DensityOperator::new(m), Err(Error::InvalidTrace(_))));
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.5, 0.0), c(-0.5, 0.0)]));
        assert!(matches!(DensityOperator::new(m), Err(Error::NotPositive(_))));
        let tiny = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0 + 5e-11, 0.0), c(-5e-11, 0.0)]));
        let rho = DensityOperator::new(tiny).unwrap();
        let spec = rho.spectrum().unwrap();
        assert_eq!(spec[0], 0.0);
        assert!((spec.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn entropy_is_unitarily_invariant(seed in any::<u64>(), dim in 2usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rank = rng.random_range(1..=dim);
            let rho = random_density_with(&mut rng, dim, rank).unwrap();
            let u = random_unitary(&mut rng, dim);
            let s0 = von_neumann_entropy(&rho).unwrap();
            let s1 = von_neumann_entropy(&rho.conjugate_by(&u).unwrap()).unwrap();
            prop_assert!((s0 - s1).abs() <= 1e-10);
        }

        #[test]
        fn relative_entropy_nonnegative(seed in any::<u64>(), dim in 2usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_density_with(&mut rng, dim, dim).unwrap();
            let b = random_density_with(&mut rng, dim, dim).unwrap();
            let d = quantum_relative_entropy(&a, &b).unwrap();
            prop_assert!(d >= 0.0);
            if a.distance(&b).unwrap() > 1e-8 {
                prop_assert!(d > 0.0);
            }
            prop_assert!(quantum_relative_entropy(&a, &a).unwrap() <= 1e-9);
        }

        #[test]
        fn volume_multiplies_under_tensor_product(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_density_with(&mut rng, 3, 2).unwrap();
            let b = random_density_with(&mut rng, 2, 2).unwrap();
            let va = ensemble_volume(von_neumann_entropy(&a).unwrap(), 1.0);
            let vb = ensemble_volume(von_neumann_entropy(&b).unwrap(), 1.0);
            let vab = ensemble_volume(von_neumann_entropy(&a.tensor(&b)).unwrap(), 1.0);
            prop_assert!((vab - va * vb).abs() <= 1e-8 * vab);
        }

        #[test]
        fn clipping_preserves_trace(seed in any::<u64>(), dim in 1usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rank = rng.random_range(1..=dim);
            let rho = random_density_with(&mut rng, dim, rank).unwrap();
            let raw: f64 = linalg::eigvalsh(rho.matrix()).unwrap().iter().sum();
            let clipped: f64 = rho.spectrum().unwrap().iter().sum();
            prop_assert!((raw - clipped).abs() <= 1e-9);
        }
    }
}
