//! SO(3) estimation on Euler-angle grids.
//!
//! Rotations use the z-y-z convention `R = R_z(α) R_y(β) R_z(γ)` with cells
//! of exact Haar measure `Δα Δγ (cos β_lo - cos β_hi)`, so the cell measures
//! of a full grid add up to `8π²`. Differential entropies on the group are
//! taken with respect to this measure.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::{chain_holds, min_slack, mutual_information_of, BoundLink, Estimator, CHAIN_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::observables::Povm;
use crate::par;
use crate::qstate::{von_neumann_entropy, DensityOperator};
use crate::symmetry::spin::wigner_d;
use crate::symmetry::{g_asymmetry_so3, Spin, SpinDecomposition};

/// Joint tables of true rotation and outcome are capped at this many pairs.
pub const ROTATION_PAIR_LIMIT: usize = 10_000_000;

const GRID_RESIDUAL_LIMIT: f64 = 0.05;

/// `n × n × n` cells over `α ∈ [0, 2π)`, `β ∈ [0, π]`, `γ ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EulerGrid {
    pub n: usize,
}

impl EulerGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("Euler grid needs at least one cell per angle".into()));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn steps(&self) -> (f64, f64) {
        (2.0 * PI / self.n as f64, PI / self.n as f64)
    }

    /// Cell-centre angles `(α, β, γ)` of cell `index`.
    pub fn center(&self, index: usize) -> (f64, f64, f64) {
        let (da, db) = self.steps();
        let (ia, ib, ig) = (index / (self.n * self.n), (index / self.n) % self.n, index % self.n);
        ((ia as f64 + 0.5) * da, (ib as f64 + 0.5) * db, (ig as f64 + 0.5) * da)
    }

    /// Haar measure of cell `index`.
    pub fn measure(&self, index: usize) -> f64 {
        let (da, db) = self.steps();
        let ib = (index / self.n) % self.n;
        da * da * ((ib as f64 * db).cos() - ((ib + 1) as f64 * db).cos())
    }

    /// Cell containing the angles, with `α, γ` taken mod `2π`.
    pub fn locate(&self, alpha: f64, beta: f64, gamma: f64) -> usize {
        let (da, db) = self.steps();
        let cell = |x: f64, step: f64| ((x / step).floor() as i64).clamp(0, self.n as i64 - 1) as usize;
        let ia = cell(alpha.rem_euclid(2.0 * PI), da);
        let ib = cell(beta, db);
        let ig = cell(gamma.rem_euclid(2.0 * PI), da);
        (ia * self.n + ib) * self.n + ig
    }
}

/// `R_z(α) R_y(β) R_z(γ)`.
pub fn euler_to_matrix(alpha: f64, beta: f64, gamma: f64) -> Matrix3<f64> {
    let rz = |t: f64| Matrix3::new(t.cos(), -t.sin(), 0.0, t.sin(), t.cos(), 0.0, 0.0, 0.0, 1.0);
    let ry = Matrix3::new(beta.cos(), 0.0, beta.sin(), 0.0, 1.0, 0.0, -beta.sin(), 0.0, beta.cos());
    rz(alpha) * ry * rz(gamma)
}

/// z-y-z angles with `α, γ ∈ [0, 2π)`, `β ∈ [0, π]`; `γ = 0` on the poles.
pub fn matrix_to_euler(r: &Matrix3<f64>) -> (f64, f64, f64) {
    let beta = r[(2, 2)].clamp(-1.0, 1.0).acos();
    let sb = beta.sin();
    let (alpha, gamma) = if sb > 1e-12 {
        (r[(1, 2)].atan2(r[(0, 2)]), r[(2, 1)].atan2(-r[(2, 0)]))
    } else if r[(2, 2)] > 0.0 {
        (r[(1, 0)].atan2(r[(0, 0)]), 0.0)
    } else {
        ((-r[(1, 0)]).atan2(-r[(0, 0)]), 0.0)
    };
    (alpha.rem_euclid(2.0 * PI), beta, gamma.rem_euclid(2.0 * PI))
}

/// Covariant measurement seeded by `|j, j>`, one element per grid cell.
#[derive(Debug, Clone)]
pub struct So3Povm {
    pub spin: Spin,
    pub grid: EulerGrid,
    /// The raw quadrature elements; completeness holds up to `povm.residual()`.
    pub povm: Povm,
}

/// `E_c = (μ_c / 8π²) (2j+1) U_c |j,j><j,j| U_c†` over the cells of an `n³` grid.
pub fn so3_covariant_povm(spin: Spin, n: usize) -> Result<So3Povm> {
    if spin.twice() > 4 {
        return Err(Error::UnsupportedSpin(format!("covariant POVM is limited to j <= 2, got {spin}")));
    }
    let grid = EulerGrid::new(n)?;
    if spin.twice() == 0 {
        return Ok(So3Povm { spin, grid, povm: Povm::trivial(1) });
    }
    let d = spin.dim() as f64;
    let elements = par::map_range(grid.len(), |c| {
        let (a, b, g) = grid.center(c);
        let column = wigner_d(spin, a, b, g).column(0).into_owned();
        linalg::projector(&column) * linalg::c(grid.measure(c) * d / (8.0 * PI * PI), 0.0)
    });
    let povm = Povm::approximate(elements, (0..grid.len()).map(|c| c as f64).collect())?;
    if povm.residual() > GRID_RESIDUAL_LIMIT {
        return Err(Error::GridTooCoarse(povm.residual()));
    }
    Ok(So3Povm { spin, grid, povm })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RotationPrior {
    /// Haar measure.
    Uniform,
    /// Haar measure weighted by `exp(κ cos ω)`, `ω` the rotation angle.
    Concentrated { kappa: f64 },
}

#[derive(Debug, Clone)]
pub struct RotationTask {
    pub spin: Spin,
    pub probe: DensityOperator,
    pub prior: RotationPrior,
    /// Cells per angle of the grid of true rotations.
    pub prior_grid: usize,
    /// Cells per angle of the covariant POVM.
    pub povm_grid: usize,
    /// Cells per angle of the grid the error is binned on.
    pub error_grid: usize,
    pub estimator: Estimator,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationReport {
    pub spin: Spin,
    pub pairs: usize,
    pub povm_residual: f64,
    /// `H(G)` relative to the `8π²` Euler measure.
    pub h_prior: f64,
    /// `H(G_err)` of `g_err = g_est^{-1} g`.
    pub h_err: f64,
    /// `H` of the inverse error `g^{-1} g_est`.
    pub h_err_inverse: f64,
    pub prior_volume: f64,
    pub error_volume: f64,
    pub estimate_information: f64,
    pub measured_information: f64,
    pub chi: f64,
    pub asymmetry: f64,
    /// Entropy lost to binning the error, measured on the same grids with a
    /// maximally mixed probe, which carries no information.
    pub grid_tolerance: f64,
    pub bound_chain: Vec<BoundLink>,
}

impl RotationReport {
    pub fn holds(&self) -> bool {
        chain_holds(&self.bound_chain)
    }

    pub fn min_slack(&self) -> f64 {
        min_slack(&self.bound_chain)
    }
}

struct ErrorEntropies {
    h_prior: f64,
    h_err: f64,
    h_err_inverse: f64,
    estimate_information: f64,
    measured_information: f64,
    prior_weights: Vec<f64>,
}

/// Exact joint distribution of rotation and outcome on the grids of `task`,
/// with the covariant POVM completed to an exact resolution of the identity.
pub fn simulate_rotation_estimation(task: &RotationTask) -> Result<RotationReport> {
    let spin = task.spin;
    if spin.twice() > 2 {
        return Err(Error::UnsupportedSpin(format!("rotation simulation is limited to j <= 1, got {spin}")));
    }
    if task.probe.dim() != spin.dim() {
        return Err(Error::DimensionMismatch { expected: spin.dim(), found: task.probe.dim() });
    }
    if task.estimator == Estimator::PosteriorMeanCircular {
        return Err(Error::InvalidParameter("posterior-mean-circular is defined for phases only".into()));
    }
    let prior_grid = EulerGrid::new(task.prior_grid)?;
    let error_grid = EulerGrid::new(task.error_grid)?;
    let raw = so3_covariant_povm(spin, task.povm_grid)?;
    let povm = raw.povm.completed()?;
    let pairs = prior_grid.len().saturating_mul(povm.len());
    if pairs > ROTATION_PAIR_LIMIT {
        return Err(Error::InfeasibleGrid { pairs, limit: ROTATION_PAIR_LIMIT });
    }
    let unitaries: Vec<CMatrix> = (0..prior_grid.len())
        .map(|i| {
            let (a, b, g) = prior_grid.center(i);
            wigner_d(spin, a, b, g)
        })
        .collect();

    let run = |probe: &DensityOperator| -> Result<ErrorEntropies> {
        error_entropies(task, probe, &prior_grid, &error_grid, &raw.grid, &povm, &unitaries)
    };
    let main = run(&task.probe)?;
    let reference = run(&DensityOperator::maximally_mixed(spin.dim()))?;
    let grid_tolerance = (reference.h_prior - reference.h_err).max(reference.h_prior - reference.h_err_inverse).max(0.0);

    let s_rho = von_neumann_entropy(&task.probe)?;
    let rotated: Vec<DensityOperator> =
        unitaries.iter().map(|u| task.probe.conjugate_by(u)).collect::<Result<Vec<_>>>()?;
    let chi = von_neumann_entropy(&DensityOperator::mixture(&main.prior_weights, &rotated)?)? - s_rho;
    let asymmetry = g_asymmetry_so3(&task.probe, &SpinDecomposition::single(spin))?;

    let prior_volume = main.h_prior.exp2();
    let error_volume = main.h_err.exp2();
    let tol = CHAIN_TOL + grid_tolerance;
    let volume_floor = prior_volume * (-asymmetry).exp2();
    let bound_chain = vec![
        BoundLink::at_most("entropy-reduction <= asymmetry", main.h_prior - main.h_err, asymmetry, tol),
        BoundLink::at_most("inverse-entropy-reduction <= asymmetry", main.h_prior - main.h_err_inverse, asymmetry, tol),
        BoundLink::at_most(
            "estimate-information <= measured-information",
            main.estimate_information,
            main.measured_information,
            CHAIN_TOL,
        ),
        BoundLink::at_most("measured-information <= chi", main.measured_information, chi, CHAIN_TOL),
        BoundLink::at_most("chi <= asymmetry", chi, asymmetry, CHAIN_TOL),
        BoundLink::at_most("asymmetry <= log2(2j+1)", asymmetry, (spin.dim() as f64).log2(), CHAIN_TOL),
        BoundLink::at_least(
            "error-volume >= prior-volume * 2^-asymmetry",
            error_volume,
            volume_floor,
            volume_floor * (1.0 - (-tol).exp2()),
        ),
    ];
    Ok(RotationReport {
        spin,
        pairs,
        povm_residual: raw.povm.residual(),
        h_prior: main.h_prior,
        h_err: main.h_err,
        h_err_inverse: main.h_err_inverse,
        prior_volume,
        error_volume,
        estimate_information: main.estimate_information,
        measured_information: main.measured_information,
        chi,
        asymmetry,
        grid_tolerance,
        bound_chain,
    })
}

fn error_entropies(
    task: &RotationTask,
    probe: &DensityOperator,
    prior_grid: &EulerGrid,
    error_grid: &EulerGrid,
    povm_grid: &EulerGrid,
    povm: &Povm,
    unitaries: &[CMatrix],
) -> Result<ErrorEntropies> {
    let k = prior_grid.len();
    let m = povm.len();
    let weights: Vec<f64> = (0..k)
        .map(|i| {
            let mu = prior_grid.measure(i);
            match task.prior {
                RotationPrior::Uniform => mu,
                RotationPrior::Concentrated { kappa } => {
                    let (a, b, g) = prior_grid.center(i);
                    let cos_omega = (euler_to_matrix(a, b, g).trace() - 1.0) / 2.0;
                    mu * (kappa * cos_omega).exp()
                }
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let prior: Vec<f64> = weights.iter().map(|w| w / total).collect();

    let rows = par::map(unitaries, |u| -> Result<Vec<f64>> {
        let rotated = probe.conjugate_by(u)?;
        let row: Vec<f64> = povm.elements().iter().map(|e| linalg::trace_product(e, rotated.matrix()).re.max(0.0)).collect();
        let s: f64 = row.iter().sum();
        Ok(row.into_iter().map(|p| p / s).collect())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let joint: Vec<f64> = (0..k * m).map(|idx| prior[idx / m] * rows[idx / m][idx % m]).collect();

    // Estimate per outcome as (index, rotation matrix).
    let prior_rot: Vec<Matrix3<f64>> = (0..k).map(|i| {
        let (a, b, g) = prior_grid.center(i);
        euler_to_matrix(a, b, g)
    }).collect();
    let estimates: Vec<(usize, Matrix3<f64>)> = (0..m)
        .map(|a| match task.estimator {
            Estimator::IdentityOfOutcome => {
                let (x, y, z) = povm_grid.center(a);
                (k + a, euler_to_matrix(x, y, z))
            }
            _ => {
                let best = (0..k).fold(0, |best, j| if joint[j * m + a] > joint[best * m + a] { j } else { best });
                (best, prior_rot[best])
            }
        })
        .collect();

    let mut err = vec![0.0; error_grid.len()];
    let mut err_inv = vec![0.0; error_grid.len()];
    for i in 0..k {
        for a in 0..m {
            let w = joint[i * m + a];
            if w == 0.0 {
                continue;
            }
            let r_err = estimates[a].1.transpose() * prior_rot[i];
            let (x, y, z) = matrix_to_euler(&r_err);
            err[error_grid.locate(x, y, z)] += w;
            let (x, y, z) = matrix_to_euler(&r_err.transpose());
            err_inv[error_grid.locate(x, y, z)] += w;
        }
    }
    let relative = |q: &[f64], grid: &EulerGrid| -> f64 {
        -q.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(c, &p)| p * (p / grid.measure(c)).log2()).sum::<f64>()
    };

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (a, (idx, _)) in estimates.iter().enumerate() {
        groups.entry(*idx).or_default().push(a);
    }
    let cols = groups.len();
    let mut est_joint = vec![0.0; k * cols];
    for (col, outcomes) in groups.values().enumerate() {
        for i in 0..k {
            est_joint[i * cols + col] = outcomes.iter().map(|&a| joint[i * m + a]).sum();
        }
    }
    Ok(ErrorEntropies {
        h_prior: relative(&prior, prior_grid),
        h_err: relative(&err, error_grid),
        h_err_inverse: relative(&err_inv, error_grid),
        estimate_information: mutual_information_of(&est_joint, k, cols),
        measured_information: mutual_information_of(&joint, k, m),
        prior_weights: prior,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_round_trip() {
        for &(a, b, g) in &[(0.3, 1.1, 5.9), (6.0, 0.2, 0.1), (2.0, 3.0, 4.0), (1.0, 0.0, 0.0)] {
            let r = euler_to_matrix(a, b, g);
            let (x, y, z) = matrix_to_euler(&r);
            assert!((euler_to_matrix(x, y, z) - r).norm() < 1e-12);
        }
    }

    #[test]
    fn grid_measures_add_to_euler_volume() {
        let grid = EulerGrid::new(7).unwrap();
        let total: f64 = (0..grid.len()).map(|c| grid.measure(c)).sum();
        assert!((total - 8.0 * PI * PI).abs() < 1e-10);
        let (a, b, g) = grid.center(123);
        assert_eq!(grid.locate(a, b, g), 123);
    }

    #[test]
    fn wigner_d_of_spin_one_is_the_rotation_matrix() {
        // In the spherical basis the spin-1 representation is similar to R.
        let (a, b, g) = (0.4, 1.3, 2.2);
        let d = wigner_d(Spin::from_twice(2), a, b, g);
        let r = euler_to_matrix(a, b, g);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = linalg::c;
        // Columns: |1,1>, |1,0>, |1,-1> in Cartesian components.
        let t = CMatrix::from_row_slice(3, 3, &[
            c(-s, 0.0), c(0.0, 0.0), c(s, 0.0),
            c(0.0, -s), c(0.0, 0.0), c(0.0, -s),
            c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0),
        ]);
        let rc = CMatrix::from_fn(3, 3, |i, j| c(r[(i, j)], 0.0));
        assert!(linalg::frobenius(&(&t * d - rc * &t)) < 1e-12);
    }

    #[test]
    fn covariant_povm_residual_shrinks() {
        assert!(so3_covariant_povm(Spin::from_twice(0), 4).unwrap().povm.residual() == 0.0);
        // For j = 1/2 the quadrature is exact, so there is nothing left to halve.
        let half = so3_covariant_povm(Spin::from_twice(1), 16).unwrap().povm.residual();
        assert!(half <= 1e-12);
        let coarse = so3_covariant_povm(Spin::from_twice(2), 16).unwrap().povm.residual();
        let fine = so3_covariant_povm(Spin::from_twice(2), 32).unwrap().povm.residual();
        assert!(coarse <= 1e-2);
        assert!(fine <= coarse / 2.0);
        assert!(matches!(so3_covariant_povm(Spin::from_twice(2), 2), Err(Error::GridTooCoarse(_))));
        assert!(so3_covariant_povm(Spin::from_twice(5), 8).is_err());
    }

    fn task(probe: DensityOperator, estimator: Estimator) -> RotationTask {
        RotationTask {
            spin: Spin::from_twice(1),
            probe,
            prior: RotationPrior::Uniform,
            prior_grid: 8,
            povm_grid: 8,
            error_grid: 8,
            estimator,
        }
    }

    #[test]
    fn mixed_probe_gains_nothing() {
        let r = simulate_rotation_estimation(&task(DensityOperator::maximally_mixed(2), Estimator::MaximumPosterior)).unwrap();
        assert!(r.estimate_information.abs() < 1e-9);
        assert!(r.asymmetry.abs() < 1e-9);
        assert!(r.holds(), "{:?}", r.bound_chain);
    }

    #[test]
    fn spin_half_reduction_is_at_most_one_bit() {
        for est in [Estimator::MaximumPosterior, Estimator::IdentityOfOutcome] {
            let r = simulate_rotation_estimation(&task(DensityOperator::basis_state(2, 0), est)).unwrap();
            assert!((r.asymmetry - 1.0).abs() < 1e-9);
            assert!(r.holds(), "{est:?}: tol {} {:?}", r.grid_tolerance, r.bound_chain);
        }
    }
}
