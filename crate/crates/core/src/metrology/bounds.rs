//! Closed-form Heisenberg limits: RMSE bounds, the Mow entropy-variance
//! inequality, multimode bounds and magnetic-field bounds.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use super::phase::EstimationReport;
use crate::error::{Error, Result};
use crate::qstate::{partial_trace, shannon_entropy, DensityOperator, Distribution};
use crate::symmetry::{g_asymmetry_so3, NumberObservable, Spin, SpinDecomposition};

/// The two RMSE lower bounds for a uniform phase prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RmsCheck {
    pub rmse: f64,
    /// `sqrt(2π/e) 2^{-H(N)}`.
    pub entropy_bound: f64,
    /// `sqrt(2π/e³) / (<N> + 1)`.
    pub mean_bound: f64,
    pub entropy_slack: f64,
    pub mean_slack: f64,
}

impl RmsCheck {
    pub fn holds(&self) -> bool {
        self.entropy_slack > 0.0 && self.mean_slack > 0.0
    }
}

/// `(sqrt(2π/e) 2^{-H}, sqrt(2π/e³)/(<N>+1))`.
pub fn rms_bounds(number_entropy: f64, mean_number: f64) -> (f64, f64) {
    ((2.0 * PI / E).sqrt() * (-number_entropy).exp2(), (2.0 * PI / E.powi(3)).sqrt() / (mean_number + 1.0))
}

/// Compares a simulated RMSE with both bounds evaluated on `probe`.
pub fn rms_heisenberg_check(report: &EstimationReport, probe: &DensityOperator, n: &NumberObservable) -> Result<RmsCheck> {
    if !report.uniform_prior {
        return Err(Error::InvalidParameter("RMSE Heisenberg limits assume a uniform phase prior".into()));
    }
    let pn = n.distribution(probe)?;
    let (entropy_bound, mean_bound) = rms_bounds(shannon_entropy(&pn), pn.mean());
    Ok(RmsCheck {
        rmse: report.rmse,
        entropy_bound,
        mean_bound,
        entropy_slack: report.rmse - entropy_bound,
        mean_slack: report.rmse - mean_bound,
    })
}

/// `½ log2(2πe (Var + 1/12)) - H` for an integer-valued distribution.
pub fn mow_bound_check(d: &Distribution) -> Result<f64> {
    if let Some(x) = d.labels().iter().find(|x| (*x - x.round()).abs() > 1e-9) {
        return Err(Error::NonIntegerSpectrum(*x));
    }
    let discrete = shannon_entropy(d) - d.cell_width().map_or(0.0, f64::log2);
    Ok(0.5 * (2.0 * PI * E * (d.variance() + 1.0 / 12.0)).log2() - discrete)
}

/// Number statistics of an `M`-mode probe.
#[derive(Debug, Clone)]
pub enum MultimodeInput<'a> {
    /// A state on the product of truncated modes.
    Joint { probe: &'a DensityOperator, mode_dims: &'a [usize] },
    /// Independent modes given by their photon-number distributions.
    Product { modes: &'a [Distribution] },
}

/// Lower bounds on the fractional phase uncertainty `L_err / 2π` of an `M`-mode probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultimodeBounds {
    pub modes: usize,
    pub total_number_entropy: f64,
    /// `2^{-H(N_T)}`.
    pub entropy_bound: f64,
    /// `1/sqrt(2πe [M² ΔN̄² + 1/12])` with `ΔN̄` the mean per-mode deviation.
    pub correlated_bound: f64,
    /// `1/sqrt(2πe [M avg Var + 1/12])`, valid for product probes.
    pub product_bound: f64,
    /// `1/(sqrt(2πeM) ΔN)`, the large-M limit for identical independent modes.
    pub clt_bound: Option<f64>,
    pub product_applicable: bool,
    pub clt_applicable: bool,
    /// `2^{-H(N_T)} - correlated_bound`.
    pub correlated_slack: f64,
    /// `2^{-H(N_T)} - product_bound` when applicable.
    pub product_slack: Option<f64>,
}

pub fn multimode_bounds(input: MultimodeInput<'_>) -> Result<MultimodeBounds> {
    let (modes, total, product) = match input {
        MultimodeInput::Joint { probe, mode_dims } => {
            let total = NumberObservable::total_number(mode_dims).distribution(probe)?;
            let modes = (0..mode_dims.len())
                .map(|i| NumberObservable::mode_number(mode_dims, i)?.distribution(probe))
                .collect::<Result<Vec<_>>>()?;
            (modes, total, is_product(probe, mode_dims)?)
        }
        MultimodeInput::Product { modes } => {
            if modes.is_empty() {
                return Err(Error::InvalidParameter("need at least one mode".into()));
            }
            let total = modes[1..].iter().try_fold(modes[0].clone(), |acc, d| convolve(&acc, d))?;
            (modes.to_vec(), total, true)
        }
    };
    let m = modes.len() as f64;
    let h_total = shannon_entropy(&total);
    let mean_dev = modes.iter().map(|d| d.variance().sqrt()).sum::<f64>() / m;
    let mean_var = modes.iter().map(Distribution::variance).sum::<f64>() / m;
    let bound = |var: f64| 1.0 / (2.0 * PI * E * (var + 1.0 / 12.0)).sqrt();
    let entropy_bound = (-h_total).exp2();
    let correlated_bound = bound(m * m * mean_dev * mean_dev);
    let product_bound = bound(m * mean_var);
    let identical = product && modes.windows(2).all(|w| same_distribution(&w[0], &w[1]));
    let clt_bound = (mean_var > 0.0).then(|| 1.0 / ((2.0 * PI * E * m).sqrt() * mean_var.sqrt()));
    Ok(MultimodeBounds {
        modes: modes.len(),
        total_number_entropy: h_total,
        entropy_bound,
        correlated_bound,
        product_bound,
        clt_bound,
        product_applicable: product,
        clt_applicable: identical && clt_bound.is_some(),
        correlated_slack: entropy_bound - correlated_bound,
        product_slack: product.then_some(entropy_bound - product_bound),
    })
}

fn same_distribution(a: &Distribution, b: &Distribution) -> bool {
    a.len() == b.len() && a.probs().iter().zip(b.probs()).all(|(x, y)| (x - y).abs() <= 1e-12) && a.labels() == b.labels()
}

/// Distribution of the sum of two independent integer variables.
fn convolve(a: &Distribution, b: &Distribution) -> Result<Distribution> {
    let mut acc = std::collections::BTreeMap::new();
    for (pa, xa) in a.probs().iter().zip(a.labels()) {
        for (pb, xb) in b.probs().iter().zip(b.labels()) {
            *acc.entry((xa + xb).round() as i64).or_insert(0.0) += pa * pb;
        }
    }
    let labels = acc.keys().map(|&k| k as f64).collect();
    Distribution::from_weights(acc.into_values().collect(), labels)
}

/// Whether `probe` equals the product of its single-mode marginals.
fn is_product(probe: &DensityOperator, mode_dims: &[usize]) -> Result<bool> {
    let mut marginals = Vec::with_capacity(mode_dims.len());
    for keep in 0..mode_dims.len() {
        let mut state = probe.clone();
        let mut dims = mode_dims.to_vec();
        // Trace out every other factor, highest index first so indices stay valid.
        for f in (0..mode_dims.len()).rev().filter(|&f| f != keep) {
            state = partial_trace(&state, &dims, f)?;
            dims.remove(f);
        }
        marginals.push(state);
    }
    let product = marginals[1..].iter().fold(marginals[0].clone(), |acc, s| acc.tensor(s));
    Ok(product.distance(probe)? <= 1e-10)
}

/// Prior over the field vector, supported on the ball `|B| <= B_π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FieldPrior {
    /// Uniform on the ball of the given radius (`B_π` when absent).
    UniformBall { radius: Option<f64> },
    /// Isotropic Gaussian cut off at `B_π`.
    TruncatedGaussian { sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagneticFieldSpec {
    pub mu: f64,
    pub t_int: f64,
    pub prior: FieldPrior,
}

impl MagneticFieldSpec {
    pub fn new(mu: f64, t_int: f64, prior: FieldPrior) -> Result<Self> {
        let spec = Self { mu, t_int, prior };
        if !(mu > 0.0) || !(t_int > 0.0) {
            return Err(Error::InvalidParameter("mu and T must be positive".into()));
        }
        match prior {
            FieldPrior::UniformBall { radius: Some(r) } if !(r > 0.0) || r > spec.b_pi() * (1.0 + 1e-12) => {
                return Err(Error::SupportViolation { what: format!("|B| <= B_pi = {}", spec.b_pi()), weight: r });
            }
            FieldPrior::TruncatedGaussian { sigma } if !(sigma > 0.0) => {
                return Err(Error::InvalidParameter(format!("sigma {sigma} must be positive")));
            }
            _ => {}
        }
        Ok(spec)
    }

    /// `B_π = 2π / (μ T)`; rotations alias beyond this magnitude.
    pub fn b_pi(&self) -> f64 {
        2.0 * PI / (self.mu * self.t_int)
    }

    /// Differential entropy `H(B)` in bits with Lebesgue measure.
    pub fn prior_entropy(&self) -> f64 {
        match self.prior {
            FieldPrior::UniformBall { radius } => {
                let r = radius.unwrap_or_else(|| self.b_pi());
                (4.0 * PI * r.powi(3) / 3.0).log2()
            }
            FieldPrior::TruncatedGaussian { sigma } => truncated_gaussian_entropy(sigma, self.b_pi()),
        }
    }
}

/// Entropy of `exp(-r²/2σ²)` restricted to `r <= R` in three dimensions, by
/// Simpson quadrature over the radius.
fn truncated_gaussian_entropy(sigma: f64, radius: f64) -> f64 {
    let n = 20_000;
    let h = radius / n as f64;
    let simpson = |f: &dyn Fn(f64) -> f64| {
        let inner: f64 = (1..n).map(|i| f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
        (f(0.0) + f(radius) + inner) * h / 3.0
    };
    let g = |r: f64| (-r * r / (2.0 * sigma * sigma)).exp();
    let z = simpson(&|r| 4.0 * PI * r * r * g(r));
    // -∫ p log2 p with p = g/z and log2 g = -r²/(2σ² ln 2)
    let mean_log = simpson(&|r| 4.0 * PI * r * r * g(r) / z * (-(r * r) / (2.0 * sigma * sigma) / std::f64::consts::LN_2));
    z.log2() - mean_log
}

/// Heisenberg limits for estimating a field vector with a spin probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationBounds {
    pub asymmetry: f64,
    pub b_pi: f64,
    pub prior_entropy: f64,
    /// `V_err / V_0 >= 2^{-A_G}`.
    pub volume_ratio_bound: f64,
    /// `D_err >= (2πe)^{-3/2} 2^{H(B)} 2^{-A_G}`.
    pub d_err_bound: f64,
    /// `T_err >= (2πe/3)^{-1/2} 2^{H(B)/3} 2^{-A_G/3}`.
    pub t_err_bound: f64,
    /// `(πe³/6)^{-1/6}`.
    pub ball_constant: f64,
    /// `T_err bound / (B_π 2^{-A_G/3})` for a uniform prior on the full ball.
    pub ball_ratio: Option<f64>,
}

pub fn rotation_bound_calculator(s: &SpinDecomposition, rho: &DensityOperator, field: &MagneticFieldSpec) -> Result<RotationBounds> {
    let asymmetry = g_asymmetry_so3(rho, s)?;
    Ok(bounds_from_asymmetry(asymmetry, field))
}

fn bounds_from_asymmetry(asymmetry: f64, field: &MagneticFieldSpec) -> RotationBounds {
    let h = field.prior_entropy();
    let t_err_bound = (2.0 * PI * E / 3.0).powf(-0.5) * (h / 3.0).exp2() * (-asymmetry / 3.0).exp2();
    let full_ball = matches!(field.prior, FieldPrior::UniformBall { radius: None });
    RotationBounds {
        asymmetry,
        b_pi: field.b_pi(),
        prior_entropy: h,
        volume_ratio_bound: (-asymmetry).exp2(),
        d_err_bound: (2.0 * PI * E).powf(-1.5) * h.exp2() * (-asymmetry).exp2(),
        t_err_bound,
        ball_constant: (PI * E.powi(3) / 6.0).powf(-1.0 / 6.0),
        ball_ratio: full_ball.then(|| t_err_bound / (field.b_pi() * (-asymmetry / 3.0).exp2())),
    }
}

/// Log-log fit of the `M`-spin bounds against `M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub spin: Spin,
    pub ms: Vec<usize>,
    /// `A_G = 2 log2(Mj + 1)`, the largest asymmetry with `j_max = Mj`.
    pub asymmetries: Vec<f64>,
    pub volume_bounds: Vec<f64>,
    pub t_err_bounds: Vec<f64>,
    pub volume_slope: f64,
    pub t_err_slope: f64,
}

/// Bounds for `M` spins of size `j` at the largest asymmetry allowed by
/// `j_max = Mj`, with least-squares slopes of `log V_err` and `log T_err`
/// against `log M`.
pub fn m_spin_scaling(spin: Spin, ms: &[usize], field: &MagneticFieldSpec) -> Result<ScalingFit> {
    if ms.len() < 2 {
        return Err(Error::InvalidParameter("scaling fit needs at least two values of M".into()));
    }
    let asymmetries: Vec<f64> = ms.iter().map(|&m| 2.0 * (m as f64 * spin.j() + 1.0).log2()).collect();
    let bounds: Vec<RotationBounds> = asymmetries.iter().map(|&a| bounds_from_asymmetry(a, field)).collect();
    let volume_bounds: Vec<f64> = bounds.iter().map(|b| b.volume_ratio_bound).collect();
    let t_err_bounds: Vec<f64> = bounds.iter().map(|b| b.t_err_bound).collect();
    let xs: Vec<f64> = ms.iter().map(|&m| (m as f64).ln()).collect();
    let slope = |ys: &[f64]| {
        let ys: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        cov / var
    };
    Ok(ScalingFit {
        spin,
        ms: ms.to_vec(),
        volume_slope: slope(&volume_bounds),
        t_err_slope: slope(&t_err_bounds),
        asymmetries,
        volume_bounds,
        t_err_bounds,
    })
}
