//! Angular momentum bookkeeping: half-integer spins, Wigner D-matrices and
//! the coupling of several spins into total-`j` sectors.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, C64};

/// A spin quantum number stored as `2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Spin(u32);

impl Spin {
    pub const fn from_twice(two_j: u32) -> Self {
        Self(two_j)
    }

    pub const fn twice(self) -> u32 {
        self.0
    }

    pub fn j(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// `2j + 1`.
    pub const fn dim(self) -> usize {
        self.0 as usize + 1
    }

    pub const fn is_integer(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// Magnetic quantum numbers `2m` in basis order `m = j, j-1, ..., -j`.
    pub fn twice_m(self) -> impl Iterator<Item = i64> {
        let two_j = i64::from(self.0);
        (0..=two_j).map(move |i| two_j - 2 * i)
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// `J_x, J_y, J_z` (with hbar = 1) on the spin-j irrep, basis `m = j..-j`.
pub fn angular_momentum(spin: Spin) -> [CMatrix; 3] {
    let n = spin.dim();
    let j = spin.j();
    let ms: Vec<f64> = spin.twice_m().map(|m2| m2 as f64 / 2.0).collect();
    let mut raise = CMatrix::zeros(n, n);
    // J+ |j,m> = sqrt(j(j+1) - m(m+1)) |j,m+1>; index i-1 holds m+1.
    for i in 1..n {
        let m = ms[i];
        raise[(i - 1, i)] = c((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.adjoint();
    let jx = (&raise + &lower) * c(0.5, 0.0);
    let jy = (&raise - &lower) * c(0.0, -0.5);
    let jz = CMatrix::from_diagonal(&CVector::from_iterator(n, ms.iter().map(|&m| c(m, 0.0))));
    [jx, jy, jz]
}

fn factorial(n: i64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Wigner small-d element `d^j_{m'm}(beta)` from the explicit factorial sum.
pub fn wigner_small_d(spin: Spin, two_mp: i64, two_m: i64, beta: f64) -> f64 {
    let two_j = i64::from(spin.twice());
    let jpmp = (two_j + two_mp) / 2;
    let jmmp = (two_j - two_mp) / 2;
    let jpm = (two_j + two_m) / 2;
    let jmm = (two_j - two_m) / 2;
    let mp_m = (two_mp - two_m) / 2;
    let prefactor = (factorial(jpmp) * factorial(jmmp) * factorial(jpm) * factorial(jmm)).sqrt();
    let (cb, sb) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let s_min = 0.max(-mp_m);
    let s_max = jpm.min(jmmp);
    let mut acc = 0.0;
    for s in s_min..=s_max {
        let denom = factorial(jpm - s) * factorial(s) * factorial(mp_m + s) * factorial(jmmp - s);
        let sign = if (mp_m + s) % 2 == 0 { 1.0 } else { -1.0 };
        let cos_pow = (two_j - mp_m - 2 * s) as i32;
        let sin_pow = (mp_m + 2 * s) as i32;
        acc += sign * cb.powi(cos_pow) * sb.powi(sin_pow) / denom;
    }
    prefactor * acc
}

/// `D^j(alpha, beta, gamma) = exp(-i alpha J_z) exp(-i beta J_y) exp(-i gamma J_z)`
/// in the z-y-z convention.
pub fn wigner_d(spin: Spin, alpha: f64, beta: f64, gamma: f64) -> CMatrix {
    let ms: Vec<i64> = spin.twice_m().collect();
    let n = spin.dim();
    CMatrix::from_fn(n, n, |r, col| {
        let (mp, m) = (ms[r], ms[col]);
        let phase = -(mp as f64 / 2.0) * alpha - (m as f64 / 2.0) * gamma;
        C64::from_polar(wigner_small_d(spin, mp, m, beta), phase)
    })
}

/// Coupled basis for a product of spins.
///
/// Column `k` of `basis` is the `k`-th coupled basis vector expressed in the
/// product basis (first spin most significant, each factor ordered
/// `m = j..-j`). Columns follow the [`super::SpinDecomposition`] layout:
/// blocks in descending `j`, and within a block index `m_index * mult + r`.
#[derive(Debug, Clone)]
pub struct Coupling {
    pub basis: CMatrix,
    pub decomposition: super::SpinDecomposition,
}

/// Couples up to a handful of spins by building highest-weight vectors and
/// lowering them; dimensions stay small enough for dense Gram-Schmidt.
pub fn couple_spins(spins: &[Spin]) -> Result<Coupling> {
    if spins.is_empty() {
        return Err(Error::UnsupportedSpin("no spins to couple".into()));
    }
    let dims: Vec<usize> = spins.iter().map(|s| s.dim()).collect();
    let dim: usize = dims.iter().product();
    if dim > 4096 {
        return Err(Error::UnsupportedSpin(format!("product dimension {dim} too large")));
    }
    // Total J components on the product space.
    let mut total = [CMatrix::zeros(dim, dim), CMatrix::zeros(dim, dim), CMatrix::zeros(dim, dim)];
    for (k, spin) in spins.iter().enumerate() {
        let ops = angular_momentum(*spin);
        let left: usize = dims[..k].iter().product();
        let right: usize = dims[k + 1..].iter().product();
        for (t, op) in total.iter_mut().zip(ops.iter()) {
            let lifted = linalg::kron(&linalg::kron(&CMatrix::identity(left, left), op), &CMatrix::identity(right, right));
            *t += lifted;
        }
    }
    let lower = &total[0] - &total[1] * c(0.0, 1.0);

    // Total 2M of each product basis vector.
    let twice_m: Vec<i64> = (0..dim)
        .map(|mut idx| {
            let mut acc = 0;
            for (k, spin) in spins.iter().enumerate().rev() {
                let i = idx % dims[k];
                idx /= dims[k];
                acc += i64::from(spin.twice()) - 2 * i as i64;
            }
            acc
        })
        .collect();
    let two_j_max = twice_m.iter().copied().max().unwrap_or(0);

    // Vectors found so far, grouped by the 2M they carry.
    let mut found: Vec<(i64, CVector)> = Vec::new();
    let mut blocks: Vec<(Spin, Vec<Vec<CVector>>)> = Vec::new();
    let mut two_j = two_j_max;
    while two_j >= 0 {
        let mut highest: Vec<CVector> = Vec::new();
        for idx in (0..dim).filter(|&i| twice_m[i] == two_j) {
            let mut v = CVector::zeros(dim);
            v[idx] = c(1.0, 0.0);
            // Two passes of classical Gram-Schmidt against everything already at this 2M.
            for _ in 0..2 {
                for u in found.iter().filter(|(m, _)| *m == two_j).map(|(_, u)| u).chain(&highest) {
                    let overlap = u.dotc(&v);
                    v -= u * overlap;
                }
            }
            let norm = v.norm();
            if norm > 1e-8 {
                highest.push(v.unscale(norm));
            }
        }
        if !highest.is_empty() {
            let spin = Spin::from_twice(two_j as u32);
            let mut ladders: Vec<Vec<CVector>> = Vec::with_capacity(highest.len());
            for h in &highest {
                let mut ladder = vec![h.clone()];
                let mut cur = h.clone();
                for step in 1..spin.dim() {
                    let next = &lower * &cur;
                    let norm = next.norm();
                    if norm < 1e-10 {
                        return Err(Error::SpectralFailure(format!("ladder for j={spin} ended at step {step}")));
                    }
                    cur = next.unscale(norm);
                    ladder.push(cur.clone());
                }
                for (i, v) in ladder.iter().enumerate() {
                    found.push((two_j - 2 * i as i64, v.clone()));
                }
                ladders.push(ladder);
            }
            blocks.push((spin, ladders));
        }
        two_j -= 1;
    }

    let mut columns: Vec<CVector> = Vec::with_capacity(dim);
    let mut layout = Vec::with_capacity(blocks.len());
    for (spin, ladders) in &blocks {
        let mult = ladders.len();
        for m_index in 0..spin.dim() {
            for ladder in ladders {
                columns.push(ladder[m_index].clone());
            }
        }
        layout.push(super::SpinBlock { spin: *spin, multiplicity: mult });
    }
    let basis = CMatrix::from_columns(&columns);
    Ok(Coupling { basis, decomposition: super::SpinDecomposition::new(layout)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;

    fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
        let e = linalg::eigh(h).unwrap();
        let n = h.nrows();
        let d = CMatrix::from_diagonal(&CVector::from_iterator(
            n,
            e.values.iter().map(|&l| c((-t * l).cos(), (-t * l).sin())),
        ));
        &e.vectors * d * e.vectors.adjoint()
    }

    #[test]
    fn commutation_relations() {
        for two_j in 1..=4 {
            let [jx, jy, jz] = angular_momentum(Spin::from_twice(two_j));
            let comm = &jx * &jy - &jy * &jx;
            assert!(frobenius(&(comm - &jz * c(0.0, 1.0))) < 1e-12);
            let j = f64::from(two_j) / 2.0;
            let casimir = &jx * &jx + &jy * &jy + &jz * &jz;
            let n = two_j as usize + 1;
            assert!(frobenius(&(casimir - CMatrix::identity(n, n) * c(j * (j + 1.0), 0.0))) < 1e-12);
        }
    }

    #[test]
    fn wigner_d_matches_matrix_exponentials() {
        let angles = [(0.3, 1.1, -0.7), (2.0, 0.0, 1.0), (5.9, 3.1, 4.2)];
        for two_j in 0..=4 {
            let spin = Spin::from_twice(two_j);
            let [_, jy, jz] = angular_momentum(spin);
            for &(a, b, g) in &angles {
                let oracle = expm_hermitian(&jz, a) * expm_hermitian(&jy, b) * expm_hermitian(&jz, g);
                let d = wigner_d(spin, a, b, g);
                assert!(frobenius(&(d - oracle)) < 1e-12, "j={spin}");
            }
        }
    }

    #[test]
    fn two_qubits_couple_to_triplet_and_singlet() {
        let half = Spin::from_twice(1);
        let coupling = couple_spins(&[half, half]).unwrap();
        let blocks = coupling.decomposition.blocks();
        assert_eq!(blocks.len(), 2);
        assert_eq!((blocks[0].spin.twice(), blocks[0].multiplicity), (2, 1));
        assert_eq!((blocks[1].spin.twice(), blocks[1].multiplicity), (0, 1));
        let u = &coupling.basis;
        assert!(frobenius(&(u.adjoint() * u - CMatrix::identity(4, 4))) < 1e-12);
        // Last column is the singlet (|01> - |10>)/sqrt2 up to phase.
        let singlet = u.column(3);
        assert!(singlet[0].norm() < 1e-12 && singlet[3].norm() < 1e-12);
        assert!(((singlet[1] + singlet[2]).norm()) < 1e-12);
    }

    #[test]
    fn coupled_basis_diagonalises_total_spin() {
        for n in 1..=4 {
            let spins = vec![Spin::from_twice(1); n];
            let coupling = couple_spins(&spins).unwrap();
            let s = &coupling.decomposition;
            let dim = 1 << n;
            assert_eq!(s.dim(), dim);
            // Rotations in the product basis equal block rotations in the coupled basis.
            let (a, b, g) = (0.4, 1.3, 2.2);
            let mut product = CMatrix::identity(1, 1);
            for spin in &spins {
                product = linalg::kron(&product, &wigner_d(*spin, a, b, g));
            }
            let coupled = coupling.basis.adjoint() * product * &coupling.basis;
            assert!(frobenius(&(coupled - s.rotation(a, b, g))) < 1e-10, "n={n}");
        }
    }
}
