//! POVMs and entropic uncertainty relations.
//!
//! Phase-like outcomes carry a cell width so that their entropies are
//! differential, `H_discrete + log2(cell)`. All EUR slacks are reported as
//! `lhs - rhs`, so a violation shows up as a negative number.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, C64};
use crate::qstate::{entropy_bits, shannon_entropy, von_neumann_entropy, DensityOperator, Distribution, PSD_TOL};
use crate::symmetry::NumberObservable;

/// Frobenius tolerance on `Σ E_k - I`.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Outcome probabilities may sum to `1 ± MEASURE_TOL` before renormalising.
const MEASURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<CMatrix>,
    labels: Vec<f64>,
    cell_width: Option<f64>,
    residual: f64,
}

impl Povm {
    /// Validates positivity of every element and completeness within [`COMPLETENESS_TOL`].
    pub fn new(elements: Vec<CMatrix>, labels: Vec<f64>) -> Result<Self> {
        let povm = Self::approximate(elements, labels)?;
        if povm.residual > COMPLETENESS_TOL {
            return Err(Error::Incomplete(povm.residual));
        }
        Ok(povm)
    }

    /// Like [`Povm::new`] but keeps an incomplete family, recording its residual.
    /// Quadrature-built measurements land here; see [`Povm::completed`].
    pub fn approximate(elements: Vec<CMatrix>, labels: Vec<f64>) -> Result<Self> {
        let first = elements.first().ok_or_else(|| Error::InvalidParameter("POVM needs an element".into()))?;
        let d = first.nrows();
        if labels.len() != elements.len() {
            return Err(Error::DimensionMismatch { expected: elements.len(), found: labels.len() });
        }
        for e in &elements {
            if e.nrows() != d || e.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: e.nrows().max(e.ncols()) });
            }
            let defect = linalg::hermitian_defect(e);
            if defect > 1e-12 {
                return Err(Error::NotHermitian(defect));
            }
            let low = linalg::eigvalsh(e)?[0];
            if low < -PSD_TOL {
                return Err(Error::NotPositive(low));
            }
        }
        let residual = completeness_residual(&elements);
        Ok(Self { elements, labels, cell_width: None, residual })
    }

    /// Projective measurement onto the columns of an orthonormal `basis`.
    pub fn projective(basis: &CMatrix, labels: Vec<f64>) -> Result<Self> {
        let elements = basis.column_iter().map(|col| linalg::projector(&col.into_owned())).collect();
        Self::new(elements, labels)
    }

    /// Measurement in the working basis, outcome `i` labelled `labels[i]`.
    pub fn computational(dim: usize, labels: Vec<f64>) -> Result<Self> {
        Self::projective(&CMatrix::identity(dim, dim), labels)
    }

    /// The one-outcome measurement `{I}`.
    pub fn trivial(dim: usize) -> Self {
        Self { elements: vec![CMatrix::identity(dim, dim)], labels: vec![0.0], cell_width: None, residual: 0.0 }
    }

    /// Projective measurement of the generator's spectral projectors.
    pub fn from_number(n: &NumberObservable) -> Self {
        let eig = n.eigenvalues();
        let elements = eig.iter().map(|&k| n.projector(k)).collect();
        Self { elements, labels: eig.iter().map(|&k| k as f64).collect(), cell_width: None, residual: 0.0 }
    }

    pub fn with_cell_width(mut self, width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidParameter(format!("cell width {width} must be positive")));
        }
        self.cell_width = Some(width);
        Ok(self)
    }

    /// Renormalised family `S^{-1/2} E_k S^{-1/2}` with `S = Σ E_k`, which is
    /// complete to rounding whenever `S` is invertible.
    pub fn completed(&self) -> Result<Self> {
        let d = self.dim();
        let s: CMatrix = self.elements.iter().fold(CMatrix::zeros(d, d), |acc, e| acc + e);
        let eig = linalg::eigh(&s)?;
        if eig.values[0] <= linalg::EIGEN_FLOOR {
            return Err(Error::Incomplete(self.residual));
        }
        let inv_sqrt = CVector::from_iterator(d, eig.values.iter().map(|&x| c(1.0 / x.sqrt(), 0.0)));
        let w = &eig.vectors * CMatrix::from_diagonal(&inv_sqrt) * eig.vectors.adjoint();
        let elements: Vec<CMatrix> = self.elements.iter().map(|e| linalg::hermitize(&(&w * e * &w))).collect();
        let residual = completeness_residual(&elements);
        Ok(Self { elements, labels: self.labels.clone(), cell_width: self.cell_width, residual })
    }

    /// `E_k ⊗ I_aux`.
    pub fn tensor_identity(&self, aux_dim: usize) -> Self {
        let id = CMatrix::identity(aux_dim, aux_dim);
        Self {
            elements: self.elements.iter().map(|e| linalg::kron(e, &id)).collect(),
            labels: self.labels.clone(),
            cell_width: self.cell_width,
            residual: self.residual * (aux_dim as f64).sqrt(),
        }
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn cell_width(&self) -> Option<f64> {
        self.cell_width
    }

    /// `‖Σ E_k - I‖_F`.
    pub fn residual(&self) -> f64 {
        self.residual
    }
}

fn completeness_residual(elements: &[CMatrix]) -> f64 {
    let d = elements[0].nrows();
    let sum = elements.iter().fold(CMatrix::zeros(d, d), |acc, e| acc + e);
    linalg::frobenius(&(sum - CMatrix::identity(d, d)))
}

/// Clips rounding noise and renormalises outcome weights.
pub(crate) fn normalise_outcomes(mut probs: Vec<f64>, labels: Vec<f64>, cell_width: Option<f64>) -> Result<Distribution> {
    for p in probs.iter_mut() {
        if *p < 0.0 {
            if *p < -MEASURE_TOL {
                return Err(Error::NotPositive(*p));
            }
            *p = 0.0;
        }
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > MEASURE_TOL {
        return Err(Error::Incomplete((total - 1.0).abs()));
    }
    let d = Distribution::from_weights(probs, labels)?;
    match cell_width {
        Some(w) => d.with_cell_width(w),
        None => Ok(d),
    }
}

/// `p_k = tr[E_k rho]`, carrying the POVM's labels and cell width.
pub fn measure(rho: &DensityOperator, m: &Povm) -> Result<Distribution> {
    if rho.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: rho.dim() });
    }
    let probs = m.elements.iter().map(|e| linalg::trace_product(e, rho.matrix()).re).collect();
    normalise_outcomes(probs, m.labels.clone(), m.cell_width)
}

/// Phase grid `offset + 2πk/m`, `k = 0..m`.
pub fn phase_grid(m: usize, offset: f64) -> Vec<f64> {
    (0..m).map(|k| offset + 2.0 * PI * k as f64 / m as f64).collect()
}

/// Multiplicity index of each basis vector: its rank among vectors sharing its level.
fn multiplicity_index(n: &NumberObservable) -> Vec<usize> {
    let mut seen = std::collections::HashMap::new();
    n.levels()
        .iter()
        .map(|&l| {
            let r = seen.entry(l).or_insert(0usize);
            *r += 1;
            *r - 1
        })
        .collect()
}

fn check_phase_outcomes(n: &NumberObservable, m: usize) -> Result<()> {
    let required = usize::try_from(n.span()).unwrap_or(usize::MAX).saturating_add(1);
    if m < required {
        return Err(Error::InsufficientOutcomes { outcomes: m, required });
    }
    Ok(())
}

/// Covariant phase POVM of an integer generator on `m` equally spaced phases.
///
/// `E_k = (1/m) Σ_r |θ_k, r><θ_k, r|` with `|θ, r> = Σ_n e^{-inθ} |n, r>`,
/// where `r` runs over the degenerate copies of each level. The sign makes the
/// outcome covariant, `p(φ | rho_θ) = p(φ - θ | rho)` for `rho_θ = e^{-iNθ} rho e^{iNθ}`.
/// Completeness is exact once `m` exceeds the spread of the spectrum.
pub fn covariant_phase_povm(n: &NumberObservable, m: usize) -> Result<Povm> {
    check_phase_outcomes(n, m)?;
    let levels = n.levels();
    let r = multiplicity_index(n);
    let d = n.dim();
    let elements = phase_grid(m, 0.0)
        .into_iter()
        .map(|theta| {
            CMatrix::from_fn(d, d, |a, b| {
                if r[a] == r[b] {
                    C64::from_polar(1.0 / m as f64, -((levels[a] - levels[b]) as f64) * theta)
                } else {
                    c(0.0, 0.0)
                }
            })
        })
        .collect();
    let residual_free = Povm { elements, labels: phase_grid(m, 0.0), cell_width: None, residual: 0.0 };
    let residual = completeness_residual(&residual_free.elements);
    if residual > COMPLETENESS_TOL {
        return Err(Error::Incomplete(residual));
    }
    Povm { residual, ..residual_free }.with_cell_width(2.0 * PI / m as f64)
}

/// Canonical phase POVM on `d` photon-number levels with `m ≥ d` outcomes.
pub fn canonical_phase_povm(d: usize, m: usize) -> Result<Povm> {
    covariant_phase_povm(&NumberObservable::number(d), m)
}

/// Outcome distribution of [`covariant_phase_povm`] evaluated without forming
/// the elements, on the grid `offset + 2πk/m`.
pub fn phase_distribution(rho: &DensityOperator, n: &NumberObservable, m: usize, offset: f64) -> Result<Distribution> {
    check_phase_outcomes(n, m)?;
    if rho.dim() != n.dim() {
        return Err(Error::DimensionMismatch { expected: n.dim(), found: rho.dim() });
    }
    let probs = phase_profile(rho, n, &phase_grid(m, offset));
    normalise_outcomes(probs, phase_grid(m, offset), Some(2.0 * PI / m as f64))
}

/// `(1/m) <θ|rho|θ>` summed over multiplicity, for each `θ` in `phases` (`m = phases.len()`).
pub(crate) fn phase_profile(rho: &DensityOperator, n: &NumberObservable, phases: &[f64]) -> Vec<f64> {
    let levels = n.levels();
    let r = multiplicity_index(n);
    let m = rho.matrix();
    let d = n.dim();
    let mut terms = Vec::new();
    for a in 0..d {
        for b in 0..d {
            if r[a] == r[b] && m[(a, b)].norm() > 0.0 {
                terms.push((m[(a, b)], (levels[a] - levels[b]) as f64));
            }
        }
    }
    let scale = 1.0 / phases.len() as f64;
    phases
        .iter()
        .map(|&theta| scale * terms.iter().map(|&(rho_ab, dl)| rho_ab * C64::from_polar(1.0, dl * theta)).sum::<C64>().re)
        .collect()
}

/// A pair of orthonormal bases, stored as matrix columns.
#[derive(Debug, Clone)]
pub struct MubPair {
    dim: usize,
    basis_a: CMatrix,
    basis_b: CMatrix,
}

impl MubPair {
    pub fn new(basis_a: CMatrix, basis_b: CMatrix) -> Result<Self> {
        let dim = basis_a.nrows();
        for basis in [&basis_a, &basis_b] {
            if basis.nrows() != dim || basis.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: basis.ncols() });
            }
            let defect = linalg::frobenius(&(basis.adjoint() * basis - CMatrix::identity(dim, dim)));
            if defect > 1e-10 {
                return Err(Error::InvalidParameter(format!("basis is not orthonormal (defect {defect:e})")));
            }
        }
        let pair = Self { dim, basis_a, basis_b };
        let defect = pair.overlap_defect();
        if defect > 1e-10 {
            return Err(Error::InvalidParameter(format!("bases are not mutually unbiased (defect {defect:e})")));
        }
        Ok(pair)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis_a(&self) -> &CMatrix {
        &self.basis_a
    }

    pub fn basis_b(&self) -> &CMatrix {
        &self.basis_b
    }

    /// `max |(|<a|b>|² - 1/d)|`.
    pub fn overlap_defect(&self) -> f64 {
        let g = self.basis_a.adjoint() * &self.basis_b;
        let target = 1.0 / self.dim as f64;
        g.iter().map(|z| (z.norm_sqr() - target).abs()).fold(0.0, f64::max)
    }

    pub fn povm_a(&self) -> Povm {
        self.povm(&self.basis_a)
    }

    pub fn povm_b(&self) -> Povm {
        self.povm(&self.basis_b)
    }

    fn povm(&self, basis: &CMatrix) -> Povm {
        let elements: Vec<CMatrix> = basis.column_iter().map(|col| linalg::projector(&col.into_owned())).collect();
        let residual = completeness_residual(&elements);
        Povm { elements, labels: (0..self.dim).map(|k| k as f64).collect(), cell_width: None, residual }
    }

    /// `‖e^{-2πijB/d} - T_j‖_F` where `T_j |a> = |a ⊕ j>` in the A basis and
    /// `B = Σ_b b |b><b|`.
    pub fn translation_defect(&self, j: usize) -> f64 {
        let d = self.dim;
        let phases = CVector::from_iterator(d, (0..d).map(|b| C64::from_polar(1.0, -2.0 * PI * (j * b) as f64 / d as f64)));
        let exp_b = &self.basis_b * CMatrix::from_diagonal(&phases) * self.basis_b.adjoint();
        let shift = CMatrix::from_fn(d, d, |row, col| if row == (col + j) % d { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let target = &self.basis_a * shift * self.basis_a.adjoint();
        linalg::frobenius(&(exp_b - target))
    }
}

/// `dft_matrix(d)[(a, b)] = <a|b> = d^{-1/2} e^{2πiab/d}`.
pub fn dft_matrix(d: usize) -> CMatrix {
    let s = 1.0 / (d as f64).sqrt();
    CMatrix::from_fn(d, d, |a, b| C64::from_polar(s, 2.0 * PI * ((a * b) % d) as f64 / d as f64))
}

/// Working basis paired with its discrete Fourier transform.
pub fn mub_pair_dft(d: usize) -> Result<MubPair> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("MUB pair needs d >= 2, got {d}")));
    }
    MubPair::new(CMatrix::identity(d, d), dft_matrix(d))
}

/// `H(A|rho) + H(B|rho) - S(rho) - log2_c`.
pub fn eur_slack(rho: &DensityOperator, a: &Povm, b: &Povm, log2_c: f64) -> Result<f64> {
    let ha = shannon_entropy(&measure(rho, a)?);
    let hb = shannon_entropy(&measure(rho, b)?);
    Ok(ha + hb - von_neumann_entropy(rho)? - log2_c)
}

/// Number-phase slack `H(N) + H(Φ) - S(rho) - log2 2π` with the covariant
/// phase POVM on `m` outcomes.
pub fn number_phase_slack(rho: &DensityOperator, n: &NumberObservable, m: usize) -> Result<f64> {
    let hn = n.entropy(rho)?;
    let hphi = shannon_entropy(&phase_distribution(rho, n, m, 0.0)?);
    Ok(hn + hphi - von_neumann_entropy(rho)? - (2.0 * PI).log2())
}

/// Position and momentum on an odd grid of `d = 2r + 1` points.
#[derive(Debug, Clone)]
pub struct QpDiscretization {
    pub dim: usize,
    pub length: f64,
    pub hbar: f64,
    pub dq: f64,
    pub dp: f64,
    pub q: Povm,
    pub p: Povm,
}

impl QpDiscretization {
    /// Index offset `m = i - r` of grid point `i`.
    fn centred(&self, i: usize) -> f64 {
        i as f64 - (self.dim / 2) as f64
    }

    pub fn q_values(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.centred(i) * self.dq).collect()
    }

    pub fn p_values(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.centred(i) * self.dp).collect()
    }

    /// `log2(2πħ)`, the continuum constant that the discrete relation reproduces.
    pub fn log2_bound(&self) -> f64 {
        (2.0 * PI * self.hbar).log2()
    }

    /// Sampled Gaussian wavepacket with position spread `sigma_q`, centred at the origin.
    pub fn gaussian(&self, sigma_q: f64) -> Result<DensityOperator> {
        let amps: Vec<f64> = self.q_values().iter().map(|q| (-q * q / (4.0 * sigma_q * sigma_q)).exp()).collect();
        let norm = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
        DensityOperator::pure(&CVector::from_iterator(self.dim, amps.iter().map(|a| c(a / norm, 0.0))))
    }
}

/// Grids `q_m = m L/√d`, `p_n = n 2πħ/(L√d)`, `m, n = -r..r`, with the
/// momentum eigenbasis the DFT of the position basis, `<q_m|p_n> = d^{-1/2} e^{2πimn/d}`.
pub fn qp_discretization(d: usize, length: f64, hbar: f64) -> Result<QpDiscretization> {
    if d.is_multiple_of(2) {
        return Err(Error::EvenDimension(d));
    }
    if !(length > 0.0) || !(hbar > 0.0) {
        return Err(Error::InvalidParameter("length and hbar must be positive".into()));
    }
    let r = (d / 2) as i64;
    let sd = (d as f64).sqrt();
    let dq = length / sd;
    let dp = 2.0 * PI * hbar / (length * sd);
    let s = 1.0 / sd;
    let basis = CMatrix::from_fn(d, d, |a, b| {
        let mn = ((a as i64 - r) * (b as i64 - r)).rem_euclid(d as i64);
        C64::from_polar(s, 2.0 * PI * mn as f64 / d as f64)
    });
    let centred = |step: f64| (0..d).map(move |i| (i as i64 - r) as f64 * step).collect::<Vec<_>>();
    let q = Povm::computational(d, centred(dq))?.with_cell_width(dq)?;
    let p = Povm::projective(&basis, centred(dp))?.with_cell_width(dp)?;
    Ok(QpDiscretization { dim: d, length, hbar, dq, dp, q, p })
}

/// `H(N) + H(Φ) - log2 2π - S(rho) + Σ_n p_n S(rho_{a|n})` for a degenerate
/// generator, where `rho_{a|n} = Π_n rho Π_n / p_n` is the state left on the
/// `n`th eigenspace.
pub fn degenerate_eur_slack(rho: &DensityOperator, n: &NumberObservable, phase: &Povm) -> Result<f64> {
    let pn = n.distribution(rho)?;
    let hphi = shannon_entropy(&measure(rho, phase)?);
    let conditional = conditional_entropy_term(rho, n)?;
    Ok(shannon_entropy(&pn) + hphi - (2.0 * PI).log2() - von_neumann_entropy(rho)? + conditional)
}

/// `Σ_n p_n S(Π_n rho Π_n / p_n)`.
pub fn conditional_entropy_term(rho: &DensityOperator, n: &NumberObservable) -> Result<f64> {
    let m = rho.matrix();
    let levels = n.levels();
    let mut total = 0.0;
    for k in n.eigenvalues() {
        let idx: Vec<usize> = (0..n.dim()).filter(|&i| levels[i] == k).collect();
        let block = CMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])]);
        let pk = linalg::trace(&block).re;
        if pk > linalg::EIGEN_FLOOR {
            let values: Vec<f64> = linalg::eigvalsh(&block)?.into_iter().map(|x| x / pk).collect();
            total += pk * entropy_bits(&values);
        }
    }
    Ok(total)
}

/// Oscillator energy-time slack `H(E) + H(T) - S(rho) - log2 τ` with
/// `τ = 2π/ω` and `H(T) = H(Φ) - log2 ω`.
pub fn oscillator_energy_time_slack(rho: &DensityOperator, omega: f64, m: usize) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!("omega {omega} must be positive")));
    }
    let n = NumberObservable::number(rho.dim());
    let he = n.entropy(rho)?;
    let ht = shannon_entropy(&phase_distribution(rho, &n, m, 0.0)?) - omega.log2();
    let tau = 2.0 * PI / omega;
    Ok(he + ht - von_neumann_entropy(rho)? - tau.log2())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlmostPeriodicEntropy {
    /// Estimate at window `2x`.
    pub value: f64,
    /// Estimate at window `x`.
    pub half_window: f64,
    /// `|value - half_window|`, the reported convergence.
    pub delta: f64,
}

/// Long-time average of `-p_ap log2 p_ap` with `p_ap(t) = |Σ c_n e^{-iε_n t/ħ}|²`,
/// sampled at `samples` midpoints of `[-x, x]` and again at twice the window
/// and sample count. `p_ap` is divided by its sample mean so that it averages
/// to one on the window.
pub fn almost_periodic_entropy(
    amplitudes: &[C64],
    energies: &[f64],
    window: f64,
    samples: usize,
    hbar: f64,
) -> Result<AlmostPeriodicEntropy> {
    if amplitudes.len() != energies.len() || amplitudes.is_empty() {
        return Err(Error::DimensionMismatch { expected: energies.len(), found: amplitudes.len() });
    }
    let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidDistribution(format!("amplitudes have norm² {norm}")));
    }
    let mut sorted = energies.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[1] - w[0] <= 0.0) {
        return Err(Error::InvalidParameter("energies must be distinct".into()));
    }
    if !(window > 0.0) || samples == 0 {
        return Err(Error::InvalidParameter("window and sample count must be positive".into()));
    }
    let average = |x: f64, n: usize| {
        let dt = 2.0 * x / n as f64;
        let p: Vec<f64> = (0..n)
            .map(|i| {
                let t = -x + (i as f64 + 0.5) * dt;
                amplitudes
                    .iter()
                    .zip(energies)
                    .map(|(&cn, &e)| cn * C64::from_polar(1.0, -e * t / hbar))
                    .sum::<C64>()
                    .norm_sqr()
            })
            .collect();
        let mean = p.iter().sum::<f64>() / n as f64;
        -p.iter().filter(|&&v| v > 0.0).map(|&v| (v / mean) * (v / mean).log2()).sum::<f64>() / n as f64
    };
    let half_window = average(window, samples);
    let value = average(2.0 * window, 2 * samples);
    Ok(AlmostPeriodicEntropy { value, half_window, delta: (value - half_window).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{random_density_with, random_pure_with};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const LOG2_2PI: f64 = 2.651_496_129_472_318_7;

    #[test]
    fn projective_measurement_on_eigenstate() {
        let m = Povm::computational(4, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let p = measure(&DensityOperator::basis_state(4, 2), &m).unwrap();
        assert_eq!(p.probs(), &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn maximally_mixed_gives_uniform_phase() {
        let povm = canonical_phase_povm(4, 16).unwrap();
        let p = measure(&DensityOperator::maximally_mixed(4), &povm).unwrap();
        assert!(p.probs().iter().all(|&x| (x - 1.0 / 16.0).abs() < 1e-14));
    }

    #[test]
    fn phase_distribution_of_plus_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rho = DensityOperator::pure_from_amplitudes(&[(s, 0.0), (s, 0.0)]).unwrap();
        let povm = canonical_phase_povm(2, 64).unwrap();
        let p = measure(&rho, &povm).unwrap();
        for (k, &pk) in p.probs().iter().enumerate() {
            let theta = 2.0 * PI * k as f64 / 64.0;
            assert!((pk - (1.0 + theta.cos()) / 64.0).abs() < 1e-14);
        }
        let fast = phase_distribution(&rho, &NumberObservable::number(2), 64, 0.0).unwrap();
        for (a, b) in fast.probs().iter().zip(p.probs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn canonical_phase_povm_completeness() {
        assert!(canonical_phase_povm(2, 2).unwrap().residual() <= 1e-12);
        assert!(matches!(canonical_phase_povm(16, 15), Err(Error::InsufficientOutcomes { outcomes: 15, required: 16 })));
        let p = measure(&DensityOperator::basis_state(5, 3), &canonical_phase_povm(5, 40).unwrap()).unwrap();
        assert!((shannon_entropy(&p) - LOG2_2PI).abs() < 1e-12);
    }

    #[test]
    fn degenerate_phase_povm_is_complete_and_covariant() {
        let n = NumberObservable::number(3).with_auxiliary(2);
        let povm = covariant_phase_povm(&n, 8).unwrap();
        assert!(povm.residual() <= 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random_density_with(&mut rng, 6, 6).unwrap();
        let base = measure(&rho, &povm).unwrap();
        let shifted = measure(&n.shift(&rho, 2.0 * PI * 3.0 / 8.0).unwrap(), &povm).unwrap();
        for k in 0..8 {
            assert!((shifted.probs()[(k + 3) % 8] - base.probs()[k]).abs() < 1e-14);
        }
        let fast = phase_distribution(&rho, &n, 8, 0.0).unwrap();
        for (a, b) in fast.probs().iter().zip(base.probs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn mub_examples() {
        let pair = mub_pair_dft(2).unwrap();
        assert!(pair.overlap_defect() < 1e-15);
        let pair = mub_pair_dft(5).unwrap();
        assert!(pair.translation_defect(1) < 1e-10);
        let shifted = pair.basis_b() * CMatrix::from_diagonal(&CVector::from_iterator(
            5,
            (0..5).map(|b| C64::from_polar(1.0, -2.0 * PI * b as f64 / 5.0)),
        )) * pair.basis_b().adjoint();
        let out = &shifted * CVector::from_iterator(5, (0..5).map(|a| c(if a == 0 { 1.0 } else { 0.0 }, 0.0)));
        assert!((out[1].norm() - 1.0).abs() < 1e-12);
        assert!(mub_pair_dft(12).unwrap().overlap_defect() <= 1e-12);
    }

    #[test]
    fn mub_eur_saturation() {
        for d in [2, 3, 4, 8, 16] {
            let pair = mub_pair_dft(d).unwrap();
            let (a, b) = (pair.povm_a(), pair.povm_b());
            let log2d = (d as f64).log2();
            for k in 0..d {
                assert!(eur_slack(&DensityOperator::basis_state(d, k), &a, &b, log2d).unwrap().abs() <= 1e-9);
            }
            assert!(eur_slack(&DensityOperator::maximally_mixed(d), &a, &b, log2d).unwrap().abs() <= 1e-9);
        }
    }

    #[test]
    fn number_phase_slack_at_m128() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = NumberObservable::number(8);
        for rank in 1..=8 {
            let rho = random_density_with(&mut rng, 8, rank).unwrap();
            assert!(number_phase_slack(&rho, &n, 128).unwrap() >= -5e-3);
            let dense = eur_slack(&rho, &Povm::from_number(&n), &canonical_phase_povm(8, 128).unwrap(), LOG2_2PI).unwrap();
            assert!((dense - number_phase_slack(&rho, &n, 128).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn qp_grid_spacings() {
        let qp = qp_discretization(101, 3.0, 1.0).unwrap();
        assert!((qp.dq * qp.dp * 101.0 - 2.0 * PI).abs() < 1e-12);
        assert!(matches!(qp_discretization(100, 3.0, 1.0), Err(Error::EvenDimension(100))));
        let qp = qp_discretization(101, 1.7, 0.5).unwrap();
        assert!((qp.dq * qp.dp * 101.0 - 2.0 * PI * 0.5).abs() < 1e-12);
    }

    #[test]
    fn discretized_gaussian_is_near_minimum_uncertainty() {
        let hbar = 1.0;
        let qp = qp_discretization(101, (2.0 * PI * hbar).sqrt(), hbar).unwrap();
        let rho = qp.gaussian((hbar / 2.0).sqrt()).unwrap();
        let total = shannon_entropy(&measure(&rho, &qp.q).unwrap()) + shannon_entropy(&measure(&rho, &qp.p).unwrap());
        let target = (std::f64::consts::E * PI * hbar).log2();
        assert!(((total - target) / target).abs() < 0.01);
        assert!(total >= qp.log2_bound());
    }

    #[test]
    fn degenerate_slack_reduces_for_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = NumberObservable::number(3);
        let mode = random_density_with(&mut rng, 3, 2).unwrap();
        let aux = random_density_with(&mut rng, 2, 2).unwrap();
        let joint = mode.tensor(&aux);
        let nd = n.with_auxiliary(2);
        let slack = degenerate_eur_slack(&joint, &nd, &covariant_phase_povm(&nd, 12).unwrap()).unwrap();
        let single = eur_slack(&mode, &Povm::from_number(&n), &canonical_phase_povm(3, 12).unwrap(), LOG2_2PI).unwrap();
        assert!((slack - single).abs() < 1e-10);
        // A pure joint state: S(rho) = 0 and each conditional state is pure too
        // when the generator is nondegenerate on the mode.
        let pure = random_pure_with(&mut rng, 6);
        assert!(degenerate_eur_slack(&pure, &nd, &covariant_phase_povm(&nd, 12).unwrap()).unwrap() >= -1e-9);
    }

    #[test]
    fn oscillator_slack_is_frequency_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rho = random_density_with(&mut rng, 6, 3).unwrap();
        let a = oscillator_energy_time_slack(&rho, 1.0, 96).unwrap();
        let b = oscillator_energy_time_slack(&rho, 7.3, 96).unwrap();
        assert!((a - b).abs() <= 1e-12);
        assert!((a - number_phase_slack(&rho, &NumberObservable::number(6), 96).unwrap()).abs() <= 1e-12);
        let eig = DensityOperator::basis_state(6, 4);
        assert!(oscillator_energy_time_slack(&eig, 2.0, 96).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn almost_periodic_examples() {
        let single = almost_periodic_entropy(&[c(1.0, 0.0)], &[3.0], 10.0, 100, 1.0).unwrap();
        assert!(single.value.abs() < 1e-12);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let omega = 1.0;
        let tau = 2.0 * PI / omega;
        let amps = [c(s, 0.0), c(0.6 * s, 0.8 * s)];
        let hap = almost_periodic_entropy(&amps, &[0.0, omega], 1e3 * tau, 64_000, 1.0).unwrap();
        let rho = DensityOperator::pure_from_amplitudes(&[(s, 0.0), (0.6 * s, 0.8 * s)]).unwrap();
        let ht = shannon_entropy(&phase_distribution(&rho, &NumberObservable::number(2), 4096, 0.0).unwrap()) - omega.log2();
        assert!((hap.value - (ht - tau.log2())).abs() < 1e-3);
        assert!(almost_periodic_entropy(&[c(1.0, 0.0), c(1.0, 0.0)], &[0.0, 1.0], 1.0, 10, 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn mub_eur_holds(seed in any::<u64>(), d in 2usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pair = mub_pair_dft(d).unwrap();
            let rho = random_density_with(&mut rng, d, 1 + (seed as usize) % d).unwrap();
            prop_assert!(eur_slack(&rho, &pair.povm_a(), &pair.povm_b(), (d as f64).log2()).unwrap() >= -1e-9);
        }

        #[test]
        fn completed_povm_is_complete(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let elements: Vec<CMatrix> = (0..5).map(|_| {
                let g = linalg::ginibre(&mut rng, 3, 2);
                &g * g.adjoint() * c(0.2, 0.0)
            }).collect();
            let rough = Povm::approximate(elements, vec![0.0; 5]).unwrap();
            prop_assert!(rough.completed().unwrap().residual() <= 1e-10);
        }
    }
}
