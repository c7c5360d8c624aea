//! Estimation simulators and Heisenberg-limit calculators.
//!
//! Joint distributions of true value and outcome are evaluated exactly on
//! grids, never sampled, so every inequality in a report can be checked to
//! tight tolerances. Each report carries its bound chain as a list of
//! [`BoundLink`]s with per-link slack.

mod bounds;
mod phase;
mod rotation;

use serde::{Deserialize, Serialize};

pub use bounds::{
    m_spin_scaling, mow_bound_check, multimode_bounds, rms_bounds, rms_heisenberg_check, rotation_bound_calculator,
    FieldPrior, MagneticFieldSpec, MultimodeBounds, MultimodeInput, RmsCheck, RotationBounds, ScalingFit,
};
pub use phase::{
    known_axis_rotation_estimation, simulate_phase_estimation, EstimationReport, PhaseMeasurement, PhasePrior,
    PhaseTask,
};
pub use rotation::{
    euler_to_matrix, matrix_to_euler, simulate_rotation_estimation, so3_covariant_povm,
    EulerGrid, RotationPrior, RotationReport, RotationTask, So3Povm, ROTATION_PAIR_LIMIT,
};

/// Tolerance for links that hold exactly on the grid.
pub const CHAIN_TOL: f64 = 1e-9;

/// Rule mapping a measurement outcome to an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[cfg_attr(feature = "cli", derive(clap::ValueEnum))]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Grid point of largest posterior weight; ties go to the lowest index.
    MaximumPosterior,
    /// Argument of the posterior mean of `e^{iθ}`.
    PosteriorMeanCircular,
    /// The value labelling the outcome.
    IdentityOfOutcome,
}

/// One inequality of a bound chain, with `slack >= -tolerance` when it holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundLink {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
}

impl BoundLink {
    /// `lhs <= rhs`.
    pub fn at_most(name: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self { name: name.into(), lhs, rhs, slack: rhs - lhs, tolerance }
    }

    /// `lhs >= rhs`.
    pub fn at_least(name: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self { name: name.into(), lhs, rhs, slack: lhs - rhs, tolerance }
    }

    pub fn holds(&self) -> bool {
        self.slack >= -self.tolerance
    }
}

pub(crate) fn chain_holds(chain: &[BoundLink]) -> bool {
    chain.iter().all(BoundLink::holds)
}

pub(crate) fn min_slack(chain: &[BoundLink]) -> f64 {
    chain.iter().map(|l| l.slack).fold(f64::INFINITY, f64::min)
}

/// Entropy in bits of nonnegative weights, ignoring zeros.
pub(crate) fn entropy_of(weights: impl IntoIterator<Item = f64>) -> f64 {
    -weights.into_iter().filter(|&p| p > 0.0).map(|p| p * p.log2()).sum::<f64>()
}

/// `H(X) + H(Y) - H(X, Y)` of a row-major joint table.
pub(crate) fn mutual_information_of(joint: &[f64], rows: usize, cols: usize) -> f64 {
    let row_marginal = (0..rows).map(|r| joint[r * cols..(r + 1) * cols].iter().sum::<f64>());
    let col_marginal = (0..cols).map(|cidx| (0..rows).map(|r| joint[r * cols + cidx]).sum::<f64>());
    entropy_of(row_marginal) + entropy_of(col_marginal) - entropy_of(joint.iter().copied())
}
