//! One function per subcommand, each returning the checked slacks and results.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::io::{load_ensemble, load_state, matrix_to_json, required_file, LoadedEnsemble};
use super::*;
use crate::holevo::{holevo_chi, joint_eigenbasis_povm, mutual_information, SignalEnsemble};
use crate::linalg::{self, c, CVector, EIGEN_FLOOR};
use crate::metrology::{
    m_spin_scaling, mow_bound_check, multimode_bounds, rms_heisenberg_check, rotation_bound_calculator,
    simulate_phase_estimation, simulate_rotation_estimation, BoundLink, FieldPrior, MagneticFieldSpec,
    MultimodeInput, PhaseMeasurement, PhasePrior, PhaseTask, RotationPrior, RotationTask, CHAIN_TOL,
};
use crate::observables::{
    almost_periodic_entropy, covariant_phase_povm, degenerate_eur_slack, eur_slack, mub_pair_dft,
    number_phase_slack, oscillator_energy_time_slack, qp_discretization, Povm, COMPLETENESS_TOL,
};
use crate::par;
use crate::qstate::{
    random_density, random_density_with, random_pure_with, shannon_entropy, von_neumann_entropy, DensityOperator,
    Distribution, HERMITIAN_TOL, NORMALIZATION_TOL, PSD_TOL, TRACE_TOL,
};
use crate::symmetry::{
    g_asymmetry_so3, g_asymmetry_so3_direct, g_asymmetry_u1, jmax_asymmetry_bound, NumberObservable, Spin,
    SpinDecomposition,
};

/// Rows of a sweep, written as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// One checked inequality; it holds when `slack >= -tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slack {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub holds: bool,
}

impl From<&BoundLink> for Slack {
    fn from(l: &BoundLink) -> Self {
        Self { name: l.name.clone(), lhs: l.lhs, rhs: l.rhs, slack: l.slack, tolerance: l.tolerance, holds: l.holds() }
    }
}

impl Slack {
    fn at_most(name: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        (&BoundLink::at_most(name, lhs, rhs, tolerance)).into()
    }

    fn at_least(name: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        (&BoundLink::at_least(name, lhs, rhs, tolerance)).into()
    }

    /// `|lhs - rhs| <= tolerance`, stored with slack `-|lhs - rhs|`.
    fn equal(name: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let slack = -(lhs - rhs).abs();
        Self { name: name.into(), lhs, rhs, slack, tolerance, holds: slack >= -tolerance }
    }
}

/// Numerical tolerances in force for a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub hermitian: f64,
    pub trace: f64,
    pub psd: f64,
    pub normalization: f64,
    pub completeness: f64,
    pub eigenvalue_floor: f64,
    pub chain: f64,
    /// Tolerance applied to this run's own slacks.
    pub check: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub inputs: Value,
    pub tolerances: Tolerances,
    pub results: Value,
    pub slacks: Vec<Slack>,
    pub min_slack: Option<f64>,
    pub holds: bool,
    /// Seed of the state behind the first violation, when one was drawn.
    pub violation_seed: Option<u64>,
    #[serde(skip)]
    pub table: Option<Table>,
}

struct Outcome {
    results: Value,
    slacks: Vec<Slack>,
    check: Option<f64>,
    seed: Option<u64>,
    table: Option<Table>,
}

impl Outcome {
    fn new(results: Value, slacks: Vec<Slack>, check: Option<f64>) -> Self {
        Self { results, slacks, check, seed: None, table: None }
    }

    fn seeded(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

pub fn run(command: &Command) -> Result<Report, CliError> {
    let outcome = match command {
        Command::Chi(a) => chi(a)?,
        Command::MutualInfo(a) => mutual_info(a)?,
        Command::Asymmetry(a) => asymmetry(a)?,
        Command::PhaseSim(a) => phase_sim(a)?,
        Command::RotationSim(a) => rotation_sim(a)?,
        Command::RotationBounds(a) => rotation_bounds(a)?,
        Command::MmodeBounds(a) => mmode_bounds(a)?,
        Command::EurSweep(a) => eur_sweep(a)?,
        Command::MowCheck(a) => mow_check(a)?,
        Command::RmsCheck(a) => rms_check(a)?,
    };
    let holds = outcome.slacks.iter().all(|s| s.holds);
    let min_slack = outcome.slacks.iter().map(|s| s.slack).reduce(f64::min);
    let inputs = match to_value(command) {
        Value::Object(mut m) => m.remove(command.name()).unwrap_or(Value::Null),
        v => v,
    };
    Ok(Report {
        tool: "holevo-limits",
        version: env!("CARGO_PKG_VERSION"),
        command: command.name(),
        inputs,
        tolerances: Tolerances {
            hermitian: HERMITIAN_TOL,
            trace: TRACE_TOL,
            psd: PSD_TOL,
            normalization: NORMALIZATION_TOL,
            completeness: COMPLETENESS_TOL,
            eigenvalue_floor: EIGEN_FLOOR,
            chain: CHAIN_TOL,
            check: outcome.check,
        },
        results: outcome.results,
        slacks: outcome.slacks,
        min_slack,
        holds,
        violation_seed: if holds { None } else { outcome.seed },
        table: outcome.table,
    })
}

fn check_dim(name: &str, value: usize, lo: usize, hi: usize) -> Result<(), CliError> {
    if value < lo || value > hi {
        return Err(CliError::Config(format!("`{name}` = {value} outside {lo}..={hi}")));
    }
    Ok(())
}

fn full_rank(rank: usize, dim: usize) -> usize {
    if rank == 0 {
        dim
    } else {
        rank
    }
}

fn ensemble(
    source: EnsembleSource,
    dim: usize,
    members: usize,
    rank: usize,
    seed: u64,
    file: &Option<PathBuf>,
) -> Result<LoadedEnsemble, CliError> {
    if source != EnsembleSource::File && source != EnsembleSource::Bb84 {
        check_dim("dim", dim, 1, 64)?;
        check_dim("members", members, 1, 256)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = match source {
        EnsembleSource::File => return load_ensemble(required_file(file)?),
        EnsembleSource::Random => (0..members)
            .map(|_| random_density_with(&mut rng, dim, full_rank(rank, dim)))
            .collect::<crate::Result<Vec<_>>>()?,
        EnsembleSource::Commuting => {
            let u = linalg::random_unitary(&mut rng, dim);
            (0..members)
                .map(|_| {
                    let diag = random_density_with(&mut rng, dim, full_rank(rank, dim))?.diagonal();
                    DensityOperator::from_diagonal(&diag)?.conjugate_by(&u)
                })
                .collect::<crate::Result<Vec<_>>>()?
        }
        EnsembleSource::Bb84 => {
            let s = FRAC_1_SQRT_2;
            [[(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (1.0, 0.0)], [(s, 0.0), (s, 0.0)], [(s, 0.0), (-s, 0.0)]]
                .iter()
                .map(|a| DensityOperator::pure_from_amplitudes(a))
                .collect::<crate::Result<Vec<_>>>()?
        }
    };
    let prior = Distribution::uniform(states.len())?;
    Ok(LoadedEnsemble { states, prior, povm: None })
}

fn ensemble_json(e: &LoadedEnsemble) -> Value {
    json!({
        "prior": e.prior.probs(),
        "states": e.states.iter().map(|s| matrix_to_json(s.matrix())).collect::<Vec<_>>(),
    })
}

fn chi(a: &ChiArgs) -> Result<Outcome, CliError> {
    let loaded = ensemble(a.source, a.dim, a.members, a.rank, a.seed, &a.file)?;
    let e = SignalEnsemble::new(loaded.states.clone(), loaded.prior.clone())?;
    let chi = holevo_chi(&e)?;
    let h_prior = shannon_entropy(e.prior());
    let log2_dim = (e.dim() as f64).log2();
    let slacks = vec![
        Slack::at_least("chi >= 0", chi, 0.0, a.tolerance),
        Slack::at_most("chi <= H(X)", chi, h_prior, a.tolerance),
        Slack::at_most("chi <= log2 d", chi, log2_dim, a.tolerance),
    ];
    let results = json!({
        "chi": chi,
        "prior_entropy": h_prior,
        "log2_dim": log2_dim,
        "ensemble": ensemble_json(&loaded),
    });
    Ok(Outcome::new(results, slacks, Some(a.tolerance)).seeded(a.seed))
}

fn mutual_info(a: &MutualInfoArgs) -> Result<Outcome, CliError> {
    let loaded = ensemble(a.source, a.dim, a.members, a.rank, a.seed, &a.file)?;
    let e = SignalEnsemble::new(loaded.states.clone(), loaded.prior.clone())?;
    let d = e.dim();
    let labels = || (0..d).map(|k| k as f64).collect::<Vec<_>>();
    let povm = match a.measurement {
        MeasurementChoice::Computational => Povm::computational(d, labels())?,
        MeasurementChoice::JointEigenbasis => joint_eigenbasis_povm(&e)?,
        MeasurementChoice::Random => {
            // A separate stream from the one that drew the states.
            let mut rng = ChaCha8Rng::seed_from_u64(super::trial_seed(a.seed, 0));
            Povm::projective(&linalg::random_unitary(&mut rng, d), labels())?
        }
        MeasurementChoice::Dft => Povm::projective(&crate::observables::dft_matrix(d), labels())?,
        MeasurementChoice::File => loaded
            .povm
            .clone()
            .ok_or_else(|| CliError::Config("ensemble file has no `povm`".into()))?,
    };
    let info = mutual_information(&e, &povm)?;
    let chi = holevo_chi(&e)?;
    let slacks = vec![Slack::at_most("I(X:Y) <= chi", info, chi, a.tolerance)];
    let results = json!({
        "mutual_information": info,
        "chi": chi,
        "gap": chi - info,
        "outcomes": povm.len(),
        "povm": povm.elements().iter().map(matrix_to_json).collect::<Vec<_>>(),
        "ensemble": ensemble_json(&loaded),
    });
    Ok(Outcome::new(results, slacks, Some(a.tolerance)).seeded(a.seed))
}

/// `(|n,0> + |0,n>)/sqrt2` on two modes of dimension `n + 1`.
pub(crate) fn noon_state(n: usize) -> crate::Result<(DensityOperator, Vec<usize>)> {
    let d = n + 1;
    let mut ket = CVector::zeros(d * d);
    ket[n * d] += c(FRAC_1_SQRT_2, 0.0);
    ket[n] += c(FRAC_1_SQRT_2, 0.0);
    Ok((DensityOperator::pure(&ket)?, vec![d, d]))
}

/// Spin-1/2 singlet with an unrotated qubit, spin factor first.
fn one_sided_singlet() -> crate::Result<DensityOperator> {
    let s = FRAC_1_SQRT_2;
    DensityOperator::pure_from_amplitudes(&[(0.0, 0.0), (s, 0.0), (-s, 0.0), (0.0, 0.0)])
}

fn asymmetry(a: &AsymmetryArgs) -> Result<Outcome, CliError> {
    let tol = a.tolerance;
    match a.group {
        Group::U1 => {
            let (rho, n) = match a.state {
                StateChoice::Noon => {
                    check_dim("n", a.n, 1, 40)?;
                    let (rho, dims) = noon_state(a.n)?;
                    (rho, NumberObservable::mode_number(&dims, 0)?)
                }
                StateChoice::Number => {
                    check_dim("n", a.n, 0, 255)?;
                    (DensityOperator::basis_state(a.n + 1, a.n), NumberObservable::number(a.n + 1))
                }
                StateChoice::Random => {
                    check_dim("modes", a.modes, 1, 4)?;
                    check_dim("dim", a.dim, 1, 64)?;
                    let dims = vec![a.dim; a.modes];
                    let total: usize = dims.iter().product();
                    check_dim("dim^modes", total, 1, 256)?;
                    (random_density(total, total, a.seed)?, NumberObservable::total_number(&dims))
                }
                StateChoice::File => {
                    let rho = load_state(required_file(&a.file)?)?;
                    let d = rho.dim();
                    (rho, NumberObservable::number(d))
                }
                other => return Err(CliError::Config(format!("state {other:?} is not a U(1) state"))),
            };
            let asym = g_asymmetry_u1(&rho, &n)?;
            let hn = n.entropy(&rho)?;
            let s = von_neumann_entropy(&rho)?;
            let mut slacks = vec![
                Slack::at_least("A_G >= 0", asym, 0.0, tol),
                Slack::at_most("A_G <= H(N)", asym, hn, tol),
            ];
            if !n.is_degenerate() {
                slacks.push(Slack::equal("A_G = H(N) - S(rho)", asym, hn - s, tol));
            }
            let results = json!({
                "group": "u1",
                "asymmetry": asym,
                "number_entropy": hn,
                "state_entropy": s,
                "dim": rho.dim(),
                "levels": n.levels(),
            });
            Ok(Outcome::new(results, slacks, Some(tol)).seeded(a.seed))
        }
        Group::So3 => {
            let (rho, s, expected) = match a.state {
                StateChoice::SpinPure => {
                    check_dim("two_j", a.two_j as usize, 0, 16)?;
                    let spin = Spin::from_twice(a.two_j);
                    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
                    let rho = random_pure_with(&mut rng, spin.dim());
                    (rho, SpinDecomposition::single(spin), Some((spin.dim() as f64).log2()))
                }
                StateChoice::Singlet => {
                    (one_sided_singlet()?, SpinDecomposition::one_sided(Spin::from_twice(1), 2), None)
                }
                StateChoice::Random => {
                    let s = if a.blocks.is_empty() {
                        SpinDecomposition::single(Spin::from_twice(a.two_j))
                    } else {
                        SpinDecomposition::from_pairs(&a.blocks)?
                    };
                    check_dim("dim", s.dim(), 1, 64)?;
                    (random_density(s.dim(), s.dim(), a.seed)?, s, None)
                }
                StateChoice::File => {
                    let rho = load_state(required_file(&a.file)?)?;
                    let s = if a.blocks.is_empty() {
                        SpinDecomposition::single(Spin::from_twice(a.two_j))
                    } else {
                        SpinDecomposition::from_pairs(&a.blocks)?
                    };
                    (rho, s, None)
                }
                other => return Err(CliError::Config(format!("state {other:?} is not an SO(3) state"))),
            };
            let asym = g_asymmetry_so3(&rho, &s)?;
            let direct = g_asymmetry_so3_direct(&rho, &s)?;
            let log2_dim = (s.dim() as f64).log2();
            let mut slacks = vec![
                Slack::at_least("A_G >= 0", asym, 0.0, tol),
                Slack::at_most("A_G <= 2 log2 d", asym, 2.0 * log2_dim, tol),
                Slack::equal("closed form = twirl", asym, direct, tol),
            ];
            if let Some(x) = expected {
                slacks.push(Slack::equal("A_G = log2(2j+1)", asym, x, tol));
            }
            let jmax = jmax_asymmetry_bound(&rho, &s, s.max_spin()).ok();
            if let Some(j) = &jmax {
                slacks.push(Slack::at_most("A_G <= 2 log2(j_max+1) - S", j.asymmetry, j.bound, tol));
            }
            let results = json!({
                "group": "so3",
                "asymmetry": asym,
                "twirl_asymmetry": direct,
                "state_entropy": von_neumann_entropy(&rho)?,
                "blocks": s.blocks().iter().map(|b| [b.spin.twice() as usize, b.multiplicity]).collect::<Vec<_>>(),
                "j_max_check": jmax.map(|j| to_value(&j)),
            });
            Ok(Outcome::new(results, slacks, Some(tol)).seeded(a.seed))
        }
    }
}

/// Pure probe with `p_n ∝ 4^{-n}` on photon numbers `2^n`, `n = 0..=truncate`.
pub(crate) fn geometric_probe(truncate: usize) -> crate::Result<(DensityOperator, NumberObservable)> {
    if truncate > 30 {
        return Err(crate::Error::InvalidParameter(format!("truncate {truncate} exceeds 30")));
    }
    let weights: Vec<f64> = (0..=truncate).map(|n| 0.25f64.powi(n as i32)).collect();
    let z: f64 = weights.iter().sum();
    let amps: Vec<(f64, f64)> = weights.iter().map(|w| ((w / z).sqrt(), 0.0)).collect();
    let levels = (0..=truncate).map(|n| 1i64 << n).collect();
    Ok((DensityOperator::pure_from_amplitudes(&amps)?, NumberObservable::new(levels)?))
}

fn phase_probe(probe: ProbeChoice, dim: usize, n: usize, truncate: usize, seed: u64) -> Result<(DensityOperator, NumberObservable), CliError> {
    Ok(match probe {
        ProbeChoice::Noon => {
            check_dim("n", n, 1, 30)?;
            let (rho, dims) = noon_state(n)?;
            (rho, NumberObservable::mode_number(&dims, 0)?)
        }
        ProbeChoice::Number => {
            check_dim("dim", dim, 1, 256)?;
            if n >= dim {
                return Err(CliError::Config(format!("`n` = {n} needs dim > n, got {dim}")));
            }
            (DensityOperator::basis_state(dim, n), NumberObservable::number(dim))
        }
        ProbeChoice::Random => {
            check_dim("dim", dim, 1, 64)?;
            (random_density(dim, dim, seed)?, NumberObservable::number(dim))
        }
        ProbeChoice::Geometric => geometric_probe(truncate)?,
    })
}

fn phase_sim(a: &PhaseSimArgs) -> Result<Outcome, CliError> {
    let (probe, generator) = phase_probe(a.probe, a.dim, a.n, a.truncate, a.seed)?;
    let prior = match a.prior {
        PriorChoice::Uniform => PhasePrior::Uniform,
        PriorChoice::Gaussian => PhasePrior::TruncatedGaussian { mean: a.mean, sigma: a.sigma },
    };
    let task = PhaseTask {
        probe: probe.clone(),
        generator: generator.clone(),
        prior,
        grid: a.grid,
        offset: a.offset,
        measurement: PhaseMeasurement::Covariant,
        estimator: a.estimator,
    };
    let report = simulate_phase_estimation(&task)?;
    let slacks = report.bound_chain.iter().map(Slack::from).collect();
    let rms = if report.uniform_prior { Some(rms_heisenberg_check(&report, &probe, &generator)?) } else { None };
    let results = json!({ "estimation": to_value(&report), "rms": rms.map(|r| to_value(&r)) });
    Ok(Outcome::new(results, slacks, None).seeded(a.seed))
}

fn spin_probe(spin: Spin, probe: SpinProbe, seed: u64) -> crate::Result<DensityOperator> {
    let d = spin.dim();
    Ok(match probe {
        SpinProbe::Pure => random_pure_with(&mut ChaCha8Rng::seed_from_u64(seed), d),
        SpinProbe::Highest => DensityOperator::basis_state(d, 0),
        SpinProbe::Random => random_density(d, d, seed)?,
        SpinProbe::Mixed => DensityOperator::maximally_mixed(d),
    })
}

fn rotation_sim(a: &RotationSimArgs) -> Result<Outcome, CliError> {
    let spin = Spin::from_twice(a.two_j);
    let task = RotationTask {
        spin,
        probe: spin_probe(spin, a.probe, a.seed)?,
        prior: match a.prior {
            RotationPriorChoice::Uniform => RotationPrior::Uniform,
            RotationPriorChoice::Concentrated => RotationPrior::Concentrated { kappa: a.kappa },
        },
        prior_grid: a.prior_grid,
        povm_grid: a.povm_grid,
        error_grid: a.error_grid,
        estimator: a.estimator,
    };
    let report = simulate_rotation_estimation(&task)?;
    let slacks = report.bound_chain.iter().map(Slack::from).collect();
    Ok(Outcome::new(json!({ "estimation": to_value(&report) }), slacks, None).seeded(a.seed))
}

fn rotation_bounds(a: &RotationBoundsArgs) -> Result<Outcome, CliError> {
    check_dim("two_j", a.two_j as usize, 0, 200)?;
    let spin = Spin::from_twice(a.two_j);
    let prior = match a.field_prior {
        FieldPriorChoice::Ball => FieldPrior::UniformBall { radius: a.radius },
        FieldPriorChoice::Gaussian => FieldPrior::TruncatedGaussian { sigma: a.sigma },
    };
    let field = MagneticFieldSpec::new(a.mu, a.t_int, prior)?;
    let s = SpinDecomposition::single(spin);
    let rho = spin_probe(spin, a.probe, a.seed)?;
    let bounds = rotation_bound_calculator(&s, &rho, &field)?;
    let j = jmax_asymmetry_bound(&rho, &s, spin)?;
    let slacks = vec![Slack::at_most("A_G <= 2 log2(j+1) - S", j.asymmetry, j.bound, a.tolerance)];
    let mut table = None;
    let scaling = if a.ms.is_empty() {
        None
    } else {
        let fit = m_spin_scaling(spin, &a.ms, &field)?;
        table = Some(Table {
            header: ["m", "asymmetry", "volume_bound", "t_err_bound"].map(String::from).to_vec(),
            rows: (0..fit.ms.len())
                .map(|i| {
                    vec![
                        fit.ms[i].to_string(),
                        fit.asymmetries[i].to_string(),
                        fit.volume_bounds[i].to_string(),
                        fit.t_err_bounds[i].to_string(),
                    ]
                })
                .collect(),
        });
        Some(to_value(&fit))
    };
    let results = json!({ "bounds": to_value(&bounds), "field": to_value(&field), "scaling": scaling });
    let mut out = Outcome::new(results, slacks, Some(a.tolerance)).seeded(a.seed);
    out.table = table;
    Ok(out)
}

fn mmode_bounds(a: &MmodeBoundsArgs) -> Result<Outcome, CliError> {
    check_dim("modes", a.modes, 1, 6)?;
    check_dim("dim", a.dim, 1, 16)?;
    let dims = vec![a.dim; a.modes];
    let total: usize = dims.iter().product();
    check_dim("dim^modes", total, 1, 256)?;
    let probe = match a.probe {
        MultimodeProbe::Random => random_density(total, total, a.seed)?,
        MultimodeProbe::Product => {
            let modes = (0..a.modes)
                .map(|i| random_density(a.dim, a.dim, super::trial_seed(a.seed, i as u64)))
                .collect::<crate::Result<Vec<_>>>()?;
            modes[1..].iter().fold(modes[0].clone(), |acc, m| acc.tensor(m))
        }
        MultimodeProbe::Noon => {
            if a.modes != 2 || a.dim < 2 {
                return Err(CliError::Config("noon needs modes = 2 and dim >= 2".into()));
            }
            noon_state(a.dim - 1)?.0
        }
    };
    let b = multimode_bounds(MultimodeInput::Joint { probe: &probe, mode_dims: &dims })?;
    let mut slacks = vec![Slack::at_least("2^-H(N_T) >= correlated bound", b.entropy_bound, b.correlated_bound, a.tolerance)];
    if b.product_applicable {
        slacks.push(Slack::at_least("2^-H(N_T) >= product bound", b.entropy_bound, b.product_bound, a.tolerance));
    }
    Ok(Outcome::new(json!({ "bounds": to_value(&b) }), slacks, Some(a.tolerance)).seeded(a.seed))
}

const PRIMES: [f64; 16] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0, 41.0, 43.0, 47.0, 53.0];

fn eur_sweep(a: &EurSweepArgs) -> Result<Outcome, CliError> {
    let d = a.dim;
    let tol = a.tolerance.unwrap_or(match a.pair {
        EurPair::AlmostPeriodic => 1e-2,
        _ => 1e-9,
    });
    check_dim("samples", a.samples, 1, 1_000_000)?;
    check_dim("dim", d, 1, 128)?;
    let rank = full_rank(a.rank, d);
    check_dim("rank", rank, 1, d)?;
    if matches!(a.pair, EurPair::NumberPhase | EurPair::Degenerate | EurPair::Oscillator) && a.grid < d {
        return Err(CliError::Config(format!("`grid` = {} must be at least dim = {d}", a.grid)));
    }
    type Eval = Box<dyn Fn(u64) -> crate::Result<f64> + Sync>;
    let (outcomes, eval): (usize, Eval) = match a.pair {
        EurPair::Mub => {
            check_dim("dim", d, 2, 128)?;
            let pair = mub_pair_dft(d)?;
            let (pa, pb) = (pair.povm_a(), pair.povm_b());
            let log2_c = (d as f64).log2();
            (d, Box::new(move |s| eur_slack(&random_density(d, rank, s)?, &pa, &pb, log2_c)))
        }
        EurPair::NumberPhase => {
            let n = NumberObservable::number(d);
            let m = a.grid;
            (m, Box::new(move |s| number_phase_slack(&random_density(d, rank, s)?, &n, m)))
        }
        EurPair::Qp => {
            let qp = qp_discretization(d, a.length, a.hbar)?;
            (d, Box::new(move |s| eur_slack(&random_density(d, rank, s)?, &qp.q, &qp.p, qp.log2_bound())))
        }
        EurPair::Degenerate => {
            let n = NumberObservable::new((0..d).map(|k| (k / 2) as i64).collect())?;
            let phase = covariant_phase_povm(&n, a.grid)?;
            (a.grid, Box::new(move |s| degenerate_eur_slack(&random_density(d, rank, s)?, &n, &phase)))
        }
        EurPair::Oscillator => {
            let (omega, m) = (a.omega, a.grid);
            (m, Box::new(move |s| oscillator_energy_time_slack(&random_density(d, rank, s)?, omega, m)))
        }
        EurPair::AlmostPeriodic => {
            check_dim("dim", d, 1, PRIMES.len())?;
            let energies: Vec<f64> = PRIMES[..d].iter().map(|p| p.sqrt()).collect();
            let (window, samples, hbar) = (a.window, a.time_samples, a.hbar);
            (
                samples,
                Box::new(move |s| {
                    let ket = linalg::random_ket(&mut ChaCha8Rng::seed_from_u64(s), d);
                    let amps: Vec<_> = ket.iter().copied().collect();
                    let he = shannon_entropy(&Distribution::from_probs(amps.iter().map(|z| z.norm_sqr()).collect())?);
                    Ok(he + almost_periodic_entropy(&amps, &energies, window, samples, hbar)?.value)
                }),
            )
        }
    };
    let seeds: Vec<u64> = (0..a.samples as u64).map(|t| super::trial_seed(a.seed, t)).collect();
    let values = par::map(&seeds, |&s| eval(s)).into_iter().collect::<crate::Result<Vec<f64>>>()?;
    let (worst, min) = values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(wi, wv), (i, &v)| if v < wv { (i, v) } else { (wi, wv) });
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let violations: Vec<u64> = seeds.iter().zip(&values).filter(|(_, &v)| v < -tol).map(|(&s, _)| s).collect();
    let slacks = vec![Slack::at_least("min slack >= 0", min, 0.0, tol)];
    let results = json!({
        "pair": to_value(&a.pair),
        "dim": d,
        "outcomes": outcomes,
        "samples": values.len(),
        "min_slack": min,
        "mean_slack": mean,
        "max_slack": max,
        "worst_seed": seeds[worst],
        "violations": violations.len(),
        "violating_seeds": violations.iter().take(16).collect::<Vec<_>>(),
    });
    let table = Table {
        header: ["seed", "d", "M", "slack"].map(String::from).to_vec(),
        rows: seeds
            .iter()
            .zip(&values)
            .map(|(s, v)| vec![s.to_string(), d.to_string(), outcomes.to_string(), v.to_string()])
            .collect(),
    };
    let mut out = Outcome::new(results, slacks, Some(tol));
    out.seed = violations.first().copied().or(Some(seeds[worst]));
    out.table = Some(table);
    Ok(out)
}

/// Integer distribution on `{0, .., d-1}`.
pub(crate) fn integer_distribution(kind: IntegerDistribution, d: usize, p: f64, at: usize) -> crate::Result<Distribution> {
    let labels: Vec<f64> = (0..d).map(|k| k as f64).collect();
    let weights: Vec<f64> = match kind {
        IntegerDistribution::Point => {
            if at >= d {
                return Err(crate::Error::InvalidParameter(format!("point mass at {at} outside 0..{d}")));
            }
            (0..d).map(|k| if k == at { 1.0 } else { 0.0 }).collect()
        }
        IntegerDistribution::Uniform => vec![1.0; d],
        IntegerDistribution::Binomial => {
            if !(0.0..=1.0).contains(&p) {
                return Err(crate::Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
            }
            let n = d - 1;
            if p == 0.0 || p == 1.0 {
                let at = if p == 0.0 { 0 } else { n };
                (0..d).map(|k| if k == at { 1.0 } else { 0.0 }).collect()
            } else {
                let mut log_choose = 0.0;
                (0..d)
                    .map(|k| {
                        if k > 0 {
                            log_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
                        }
                        (log_choose + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
                    })
                    .collect()
            }
        }
        IntegerDistribution::Geometric => {
            if !(p > 0.0 && p < 1.0) {
                return Err(crate::Error::InvalidParameter(format!("ratio {p} outside (0, 1)")));
            }
            (0..d).map(|k| p.powi(k as i32)).collect()
        }
    };
    Distribution::from_weights(weights, labels)
}

fn mow_check(a: &MowCheckArgs) -> Result<Outcome, CliError> {
    check_dim("d", a.d, 1, 1 << 20)?;
    let dist = integer_distribution(a.dist, a.d, a.p, a.at)?;
    let slack = mow_bound_check(&dist)?;
    let h = shannon_entropy(&dist);
    let var = dist.variance();
    let bound = h + slack;
    let slacks = vec![Slack::at_most("H <= 1/2 log2(2πe(Var + 1/12))", h, bound, a.tolerance)];
    let results = json!({ "entropy": h, "variance": var, "bound": bound, "slack": slack });
    Ok(Outcome::new(results, slacks, Some(a.tolerance)))
}

/// `H(N)` and `<N>` of `p_n = (3/4) 4^{-n}` on `2^n`, `n = 0..=terms`, renormalized.
pub(crate) fn geometric_number_statistics(terms: usize) -> crate::Result<(f64, f64)> {
    let weights: Vec<f64> = (0..=terms).map(|n| 0.75 * 0.25f64.powi(n as i32)).collect();
    let labels: Vec<f64> = (0..=terms).map(|n| 2f64.powi(n as i32)).collect();
    let d = Distribution::from_weights(weights, labels)?;
    Ok((shannon_entropy(&d), d.mean()))
}

fn rms_check(a: &RmsCheckArgs) -> Result<Outcome, CliError> {
    use crate::metrology::{rms_bounds, Estimator};
    let (probe, generator) = phase_probe(a.probe, a.dim, a.n, a.truncate, a.seed)?;
    let mut slacks = Vec::new();
    let mut per_estimator = Vec::new();
    for estimator in [Estimator::MaximumPosterior, Estimator::PosteriorMeanCircular, Estimator::IdentityOfOutcome] {
        let mut task = PhaseTask::covariant(probe.clone(), generator.clone(), a.grid);
        task.estimator = estimator;
        let report = simulate_phase_estimation(&task)?;
        let check = rms_heisenberg_check(&report, &probe, &generator)?;
        let tag = to_value(&estimator);
        let tag = tag.as_str().unwrap_or("estimator");
        slacks.push(Slack::at_least(&format!("{tag}: rmse >= entropy bound"), check.rmse, check.entropy_bound, 0.0));
        slacks.push(Slack::at_least(&format!("{tag}: rmse >= mean bound"), check.rmse, check.mean_bound, 0.0));
        slacks.extend(report.bound_chain.iter().map(|l| {
            let mut s = Slack::from(l);
            s.name = format!("{tag}: {}", s.name);
            s
        }));
        per_estimator.push(json!({ "estimator": tag, "rms": to_value(&check), "rmse": report.rmse, "saturation_gap": report.saturation_gap }));
    }
    let closed_form = if a.probe == ProbeChoice::Geometric {
        let (h, mean) = geometric_number_statistics(a.terms)?;
        let (eb, mb) = rms_bounds(h, mean);
        Some(json!({ "terms": a.terms, "number_entropy": h, "mean_number": mean, "entropy_bound": eb, "mean_bound": mb }))
    } else {
        None
    };
    let pn = generator.distribution(&probe)?;
    let results = json!({
        "probe_number_entropy": shannon_entropy(&pn),
        "probe_mean_number": pn.mean(),
        "closed_form": closed_form,
        "estimators": per_estimator,
    });
    Ok(Outcome::new(results, slacks, Some(0.0)).seeded(a.seed))
}
