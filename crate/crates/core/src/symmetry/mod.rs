//! Group twirls and the G-asymmetry `A_G(rho) = S(twirl(rho)) - S(rho)`.
//!
//! The U(1) twirl is dephasing in the eigenbasis of an integer-valued
//! generator. The SO(3) twirl is computed algebraically from the total-`j`
//! block structure: by Schur's lemma it replaces each `j` sector by
//! `I_{2j+1}/(2j+1) ⊗ tr_spin[block]` and removes all coherence between
//! sectors.

pub mod spin;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, C64};
use crate::qstate::{entropy_bits, shannon_entropy, von_neumann_entropy, DensityOperator, Distribution};

pub use spin::Spin;

const SUPPORT_TOL: f64 = 1e-10;

/// Integer-spectrum generator that is diagonal in the working basis.
///
/// `levels[i]` is the eigenvalue carried by basis vector `i`, so the spectral
/// projectors are `Π_n = Σ_{i: levels[i] = n} |i><i|`. Photon numbers, total
/// photon numbers of several modes, `N ⊗ I` on a mode with an ancilla, and
/// `J_z + j` all fit this form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumberObservable {
    levels: Vec<i64>,
}

impl NumberObservable {
    pub fn new(levels: Vec<i64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidParameter("generator needs at least one level".into()));
        }
        Ok(Self { levels })
    }

    /// Rejects any eigenvalue more than `1e-9` away from an integer.
    pub fn from_real_levels(levels: &[f64]) -> Result<Self> {
        let ints = levels
            .iter()
            .map(|&x| {
                let r = x.round();
                if (x - r).abs() > 1e-9 || !x.is_finite() {
                    Err(Error::NonIntegerSpectrum(x))
                } else {
                    Ok(r as i64)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ints)
    }

    /// Photon number `0..d-1` of a single truncated mode.
    pub fn number(dim: usize) -> Self {
        Self { levels: (0..dim as i64).collect() }
    }

    /// Number operator of mode `mode` in a product of truncated modes.
    pub fn mode_number(mode_dims: &[usize], mode: usize) -> Result<Self> {
        if mode >= mode_dims.len() {
            return Err(Error::InvalidParameter(format!("mode {mode} out of range")));
        }
        Ok(Self { levels: multi_index(mode_dims).map(|idx| idx[mode] as i64).collect() })
    }

    /// Total photon number `N_1 + ... + N_M`.
    pub fn total_number(mode_dims: &[usize]) -> Self {
        Self { levels: multi_index(mode_dims).map(|idx| idx.iter().sum::<usize>() as i64).collect() }
    }

    /// `J_z + j` on a spin-j irrep in the `m = j..-j` basis. The shift by `j`
    /// is a global phase for rotations and makes the spectrum integral.
    pub fn spin_z(spin: Spin) -> Self {
        Self { levels: spin.twice_m().map(|m2| (m2 + i64::from(spin.twice())) / 2).collect() }
    }

    /// `N ⊗ I_aux`, with the auxiliary factor least significant.
    pub fn with_auxiliary(&self, aux_dim: usize) -> Self {
        Self { levels: self.levels.iter().flat_map(|&n| std::iter::repeat_n(n, aux_dim)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[i64] {
        &self.levels
    }

    /// Distinct eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<i64> {
        let mut v = self.levels.clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn degeneracy(&self, n: i64) -> usize {
        self.levels.iter().filter(|&&l| l == n).count()
    }

    pub fn is_degenerate(&self) -> bool {
        self.eigenvalues().len() < self.levels.len()
    }

    /// `max n - min n`; a uniform phase grid needs more points than this.
    pub fn span(&self) -> i64 {
        let e = self.eigenvalues();
        e[e.len() - 1] - e[0]
    }

    pub fn projector(&self, n: i64) -> CMatrix {
        let d = self.dim();
        CMatrix::from_fn(d, d, |i, j| if i == j && self.levels[i] == n { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    /// `exp(-i N theta)` as a diagonal matrix.
    pub fn phase_shift(&self, theta: f64) -> CMatrix {
        let d = self.dim();
        let diag = nalgebra::DVector::from_iterator(d, self.levels.iter().map(|&n| C64::from_polar(1.0, -(n as f64) * theta)));
        CMatrix::from_diagonal(&diag)
    }

    /// `rho_theta = exp(-i N theta) rho exp(i N theta)`, evaluated entrywise.
    pub fn shift(&self, rho: &DensityOperator, theta: f64) -> Result<DensityOperator> {
        self.check(rho)?;
        let m = rho.matrix();
        let d = self.dim();
        let out = CMatrix::from_fn(d, d, |i, j| {
            m[(i, j)] * C64::from_polar(1.0, -((self.levels[i] - self.levels[j]) as f64) * theta)
        });
        Ok(DensityOperator::from_valid(out))
    }

    /// `p_n = tr[Π_n rho]`, labelled by the eigenvalues.
    pub fn distribution(&self, rho: &DensityOperator) -> Result<Distribution> {
        self.check(rho)?;
        let diag = rho.diagonal();
        let mut acc: BTreeMap<i64, f64> = BTreeMap::new();
        for (&n, p) in self.levels.iter().zip(diag) {
            *acc.entry(n).or_insert(0.0) += p;
        }
        let labels = acc.keys().map(|&n| n as f64).collect();
        Distribution::from_weights(acc.into_values().collect(), labels)
    }

    /// Shannon entropy `H(N|rho)` of the generator.
    pub fn entropy(&self, rho: &DensityOperator) -> Result<f64> {
        Ok(shannon_entropy(&self.distribution(rho)?))
    }

    fn check(&self, rho: &DensityOperator) -> Result<()> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rho.dim() });
        }
        Ok(())
    }
}

fn multi_index(dims: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = dims.iter().product();
    (0..total).map(move |mut flat| {
        let mut idx = vec![0; dims.len()];
        for k in (0..dims.len()).rev() {
            idx[k] = flat % dims[k];
            flat /= dims[k];
        }
        idx
    })
}

/// `rho_Φ = Σ_n Π_n rho Π_n`.
pub fn phase_twirl(rho: &DensityOperator, n: &NumberObservable) -> Result<DensityOperator> {
    n.check(rho)?;
    let m = rho.matrix();
    let levels = n.levels();
    let d = n.dim();
    let out = CMatrix::from_fn(d, d, |i, j| if levels[i] == levels[j] { m[(i, j)] } else { c(0.0, 0.0) });
    Ok(DensityOperator::from_valid(out))
}

/// `‖twirl(rho_E) - twirl(rho)‖_F` for the ensemble of phase shifts of `rho`
/// at `phases` weighted by `prior`.
pub fn ensemble_twirl_identity_check(
    rho: &DensityOperator,
    n: &NumberObservable,
    phases: &[f64],
    prior: &Distribution,
) -> Result<f64> {
    if phases.len() != prior.len() {
        return Err(Error::DimensionMismatch { expected: phases.len(), found: prior.len() });
    }
    let shifted = phases.iter().map(|&t| n.shift(rho, t)).collect::<Result<Vec<_>>>()?;
    let ensemble = DensityOperator::mixture(prior.probs(), &shifted)?;
    phase_twirl(&ensemble, n)?.distance(&phase_twirl(rho, n)?)
}

/// U(1) asymmetry `S(rho_Φ) - S(rho)`.
pub fn g_asymmetry_u1(rho: &DensityOperator, n: &NumberObservable) -> Result<f64> {
    let twirled = von_neumann_entropy(&phase_twirl(rho, n)?)?;
    Ok((twirled - von_neumann_entropy(rho)?).max(0.0))
}

/// `H(N|rho) - A_G(rho)`, nonnegative by the purification argument.
pub fn asymmetry_number_entropy_bound_check(rho: &DensityOperator, n: &NumberObservable) -> Result<f64> {
    Ok(n.entropy(rho)? - g_asymmetry_u1(rho, n)?)
}

/// One total-`j` sector: spin `j` carried `multiplicity` times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinBlock {
    pub spin: Spin,
    pub multiplicity: usize,
}

impl SpinBlock {
    pub fn dim(&self) -> usize {
        self.spin.dim() * self.multiplicity
    }
}

/// Direct sum of spin sectors, each laid out as `C^{2j+1} ⊗ C^{mult}` with
/// basis index `m_index * mult + r` and `m = j..-j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinDecomposition {
    blocks: Vec<SpinBlock>,
}

impl SpinDecomposition {
    /// Each `j` may occur in one block only; equivalent sectors must be
    /// merged into a multiplicity so the twirl can see their coherences.
    pub fn new(blocks: Vec<SpinBlock>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::UnsupportedSpin("empty decomposition".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for b in &blocks {
            if b.multiplicity == 0 {
                return Err(Error::UnsupportedSpin(format!("j={} has zero multiplicity", b.spin)));
            }
            if !seen.insert(b.spin) {
                return Err(Error::UnsupportedSpin(format!("j={} listed twice; merge into one block", b.spin)));
            }
        }
        Ok(Self { blocks })
    }

    /// Blocks given as `[2j, multiplicity]` pairs.
    pub fn from_pairs(pairs: &[(u32, usize)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(t, m)| SpinBlock { spin: Spin::from_twice(t), multiplicity: m }).collect())
    }

    pub fn single(spin: Spin) -> Self {
        Self { blocks: vec![SpinBlock { spin, multiplicity: 1 }] }
    }

    /// A spin rotated while an untouched `aux_dim`-level partner rides along.
    pub fn one_sided(spin: Spin, aux_dim: usize) -> Self {
        Self { blocks: vec![SpinBlock { spin, multiplicity: aux_dim }] }
    }

    pub fn blocks(&self) -> &[SpinBlock] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(SpinBlock::dim).sum()
    }

    pub fn is_multiplicity_free(&self) -> bool {
        self.blocks.iter().all(|b| b.multiplicity == 1)
    }

    pub fn max_spin(&self) -> Spin {
        self.blocks.iter().map(|b| b.spin).max().unwrap_or(Spin::from_twice(0))
    }

    fn offsets(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |acc, b| {
                let start = *acc;
                *acc += b.dim();
                Some(start)
            })
            .collect()
    }

    /// Projector onto the total-`j` sector of block `index`.
    pub fn projector(&self, index: usize) -> CMatrix {
        let offsets = self.offsets();
        let (start, len) = (offsets[index], self.blocks[index].dim());
        let d = self.dim();
        CMatrix::from_fn(d, d, |i, j| if i == j && i >= start && i < start + len { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    /// The unitary of rotation `(alpha, beta, gamma)` (z-y-z Euler angles).
    pub fn rotation(&self, alpha: f64, beta: f64, gamma: f64) -> CMatrix {
        let d = self.dim();
        let mut u = CMatrix::zeros(d, d);
        for (b, start) in self.blocks.iter().zip(self.offsets()) {
            let dj = spin::wigner_d(b.spin, alpha, beta, gamma);
            let block = linalg::kron(&dj, &CMatrix::identity(b.multiplicity, b.multiplicity));
            u.view_mut((start, start), (b.dim(), b.dim())).copy_from(&block);
        }
        u
    }

    /// `J_x, J_y, J_z` on the whole space.
    pub fn generators(&self) -> [CMatrix; 3] {
        let d = self.dim();
        let mut out = [CMatrix::zeros(d, d), CMatrix::zeros(d, d), CMatrix::zeros(d, d)];
        for (b, start) in self.blocks.iter().zip(self.offsets()) {
            let ops = spin::angular_momentum(b.spin);
            for (o, op) in out.iter_mut().zip(ops.iter()) {
                let block = linalg::kron(op, &CMatrix::identity(b.multiplicity, b.multiplicity));
                o.view_mut((start, start), (b.dim(), b.dim())).copy_from(&block);
            }
        }
        out
    }

    /// `p_j = tr[Π_j rho]` per block, labelled by `j`.
    pub fn distribution(&self, rho: &DensityOperator) -> Result<Distribution> {
        self.check(rho)?;
        let diag = rho.diagonal();
        let probs: Vec<f64> = self
            .blocks
            .iter()
            .zip(self.offsets())
            .map(|(b, start)| diag[start..start + b.dim()].iter().sum())
            .collect();
        Distribution::from_weights(probs, self.blocks.iter().map(|b| b.spin.j()).collect())
    }

    /// Unnormalised `tr_spin[Π_j rho Π_j]` on the multiplicity space of each block.
    fn multiplicity_marginals(&self, rho: &DensityOperator) -> Vec<CMatrix> {
        let m = rho.matrix();
        self.blocks
            .iter()
            .zip(self.offsets())
            .map(|(b, start)| {
                let r = b.multiplicity;
                CMatrix::from_fn(r, r, |a, a2| (0..b.spin.dim()).map(|k| m[(start + k * r + a, start + k * r + a2)]).sum())
            })
            .collect()
    }

    fn check(&self, rho: &DensityOperator) -> Result<()> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rho.dim() });
        }
        Ok(())
    }
}

/// Average of `U_g rho U_g†` over SO(3) (SU(2) for half-integer sectors).
pub fn so3_twirl(rho: &DensityOperator, s: &SpinDecomposition) -> Result<DensityOperator> {
    s.check(rho)?;
    let d = s.dim();
    let mut out = CMatrix::zeros(d, d);
    for ((b, start), sigma) in s.blocks.iter().zip(s.offsets()).zip(s.multiplicity_marginals(rho)) {
        let n = b.spin.dim();
        let block = linalg::kron(&CMatrix::identity(n, n), &sigma) * c(1.0 / n as f64, 0.0);
        out.view_mut((start, start), (b.dim(), b.dim())).copy_from(&block);
    }
    Ok(DensityOperator::from_valid(out))
}

/// Closed-form SO(3) asymmetry
/// `H(J²) + <log2(2j+1)> + Σ_j p_j S(σ_j) - S(rho)`,
/// where `σ_j` is the normalised multiplicity-space state of sector `j`
/// (absent for multiplicity-free decompositions).
pub fn g_asymmetry_so3(rho: &DensityOperator, s: &SpinDecomposition) -> Result<f64> {
    let p = s.distribution(rho)?;
    let mut extra = 0.0;
    let mut mean_log_dim = 0.0;
    for ((b, &pj), sigma) in s.blocks.iter().zip(p.probs()).zip(s.multiplicity_marginals(rho)) {
        mean_log_dim += pj * (b.spin.dim() as f64).log2();
        if b.multiplicity > 1 && pj > SUPPORT_TOL {
            let values = linalg::eigvalsh(&(sigma * c(1.0 / pj, 0.0)))?;
            extra += pj * entropy_bits(&values);
        }
    }
    Ok((shannon_entropy(&p) + mean_log_dim + extra - von_neumann_entropy(rho)?).max(0.0))
}

/// `S(so3_twirl(rho)) - S(rho)` by direct diagonalisation.
pub fn g_asymmetry_so3_direct(rho: &DensityOperator, s: &SpinDecomposition) -> Result<f64> {
    Ok((von_neumann_entropy(&so3_twirl(rho, s)?)? - von_neumann_entropy(rho)?).max(0.0))
}

/// Result of comparing the asymmetry with `log2 (j_max + 1)² - S(rho)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JmaxCheck {
    pub asymmetry: f64,
    pub bound: f64,
    pub slack: f64,
    /// `|slack| <= 1e-9`; reached when `p_j ∝ 2j + 1` on a pure state.
    pub saturated: bool,
}

/// Checks `A_G(rho) <= log2 (j_max+1)² - S(rho)` for states supported on `j <= j_max`.
///
/// The variational bound presumes one copy of each sector and sectors of a
/// single integer/half-integer class, as for any fixed set of particles, so
/// decompositions outside that class are rejected.
pub fn jmax_asymmetry_bound(rho: &DensityOperator, s: &SpinDecomposition, j_max: Spin) -> Result<JmaxCheck> {
    if !s.is_multiplicity_free() {
        return Err(Error::UnsupportedSpin("j_max bound needs a multiplicity-free decomposition".into()));
    }
    let parity = s.blocks[0].spin.is_integer();
    if s.blocks.iter().any(|b| b.spin.is_integer() != parity) || j_max.is_integer() != parity {
        return Err(Error::UnsupportedSpin("sectors mix integer and half-integer j".into()));
    }
    let p = s.distribution(rho)?;
    let outside: f64 = s
        .blocks
        .iter()
        .zip(p.probs())
        .filter(|(b, _)| b.spin > j_max)
        .map(|(_, &pj)| pj)
        .sum();
    if outside > SUPPORT_TOL {
        return Err(Error::SupportViolation { what: format!("j > {j_max}"), weight: outside });
    }
    let asymmetry = g_asymmetry_so3(rho, s)?;
    let bound = 2.0 * (j_max.j() + 1.0).log2() - von_neumann_entropy(rho)?;
    let slack = bound - asymmetry;
    Ok(JmaxCheck { asymmetry, bound, slack, saturated: slack.abs() <= 1e-9 })
}

/// Checks projector orthogonality and completeness of a [`NumberObservable`].
pub fn projector_residual(n: &NumberObservable) -> f64 {
    let d = n.dim();
    let eig = n.eigenvalues();
    let mut sum = CMatrix::zeros(d, d);
    let mut worst: f64 = 0.0;
    for (i, &a) in eig.iter().enumerate() {
        let pa = n.projector(a);
        for &b in &eig[i..] {
            let pb = n.projector(b);
            let expected = if a == b { pa.clone() } else { CMatrix::zeros(d, d) };
            worst = worst.max(linalg::frobenius(&(&pa * &pb - expected)));
        }
        sum += pa;
    }
    worst.max(linalg::frobenius(&(sum - CMatrix::identity(d, d))))
}
