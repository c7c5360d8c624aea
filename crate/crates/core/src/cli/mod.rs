//! Experiment runner behind the `holevo-limits` binary.
//!
//! Every subcommand can also be given as a JSON config (`run --config`), and
//! every run produces one JSON report with the inputs echoed, the tolerances
//! in force and each checked inequality as a slack. Sweeps can also emit CSV
//! rows. Exit status: 0 when every slack clears its tolerance, 2 on a
//! violation, 1 on bad input.

mod experiments;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::metrology::Estimator;

pub use io::{matrix_from_json, matrix_to_json, ComplexEntries};

/// Environment variable naming the default directory for reports.
pub const OUTPUT_DIR_ENV: &str = "HOLEVO_LIMITS_OUTPUT_DIR";

/// The experiment manifest shipped with the binary.
pub const MANIFEST: &str = include_str!("../../experiments.json");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Compute(#[from] crate::Error),
}

#[derive(Debug, Parser)]
#[command(name = "holevo-limits", version, about = "Holevo bounds, asymmetry and entropic Heisenberg limits")]
pub struct Cli {
    /// Print the bundled experiment manifest and exit.
    #[arg(long)]
    pub list_experiments: bool,
    /// Worker threads for grid evaluations.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Report path. Defaults to `$HOLEVO_LIMITS_OUTPUT_DIR/<command>.json`, else stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// CSV path for sweep rows.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Invocation>,
}

#[derive(Debug, Subcommand)]
pub enum Invocation {
    #[command(flatten)]
    Experiment(Command),
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

/// A JSON experiment config.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Command,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    /// Parses a config, reporting the offending field path with line and column.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::Config(format!(
                "line {} column {}, field `{}`: {}",
                inner.line(),
                inner.column(),
                path,
                inner
            ))
        })
    }
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Holevo quantity of a signal ensemble.
    Chi(ChiArgs),
    /// Mutual information of an ensemble and a measurement, against χ.
    MutualInfo(MutualInfoArgs),
    /// G-asymmetry for U(1) or SO(3).
    Asymmetry(AsymmetryArgs),
    /// Exact phase-estimation simulation with its bound chain.
    PhaseSim(PhaseSimArgs),
    /// Exact SO(3) estimation simulation on Euler grids.
    RotationSim(RotationSimArgs),
    /// Magnetic-field Heisenberg limits and their scaling with spin count.
    RotationBounds(RotationBoundsArgs),
    /// Multimode phase-resolution bounds.
    MmodeBounds(MmodeBoundsArgs),
    /// Uncertainty-relation slacks over seeded random states.
    EurSweep(EurSweepArgs),
    /// Entropy-variance inequality for an integer distribution.
    MowCheck(MowCheckArgs),
    /// RMSE Heisenberg limits against simulated estimators.
    RmsCheck(RmsCheckArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Chi(_) => "chi",
            Command::MutualInfo(_) => "mutual-info",
            Command::Asymmetry(_) => "asymmetry",
            Command::PhaseSim(_) => "phase-sim",
            Command::RotationSim(_) => "rotation-sim",
            Command::RotationBounds(_) => "rotation-bounds",
            Command::MmodeBounds(_) => "mmode-bounds",
            Command::EurSweep(_) => "eur-sweep",
            Command::MowCheck(_) => "mow-check",
            Command::RmsCheck(_) => "rms-check",
        }
    }
}

// Config fields fall back to the same defaults as the flags.
macro_rules! flag_defaults {
    ($($t:ty),* $(,)?) => {$(
        impl Default for $t {
            fn default() -> Self {
                <$t as Parser>::parse_from(["holevo-limits"])
            }
        }
    )*};
}

flag_defaults!(
    ChiArgs,
    MutualInfoArgs,
    AsymmetryArgs,
    PhaseSimArgs,
    RotationSimArgs,
    RotationBoundsArgs,
    MmodeBoundsArgs,
    EurSweepArgs,
    MowCheckArgs,
    RmsCheckArgs,
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleSource {
    /// Ginibre states, uniform prior.
    Random,
    /// Random states diagonal in one random basis.
    Commuting,
    /// The four BB84 qubit states.
    Bb84,
    /// States (and optionally a POVM) from `--file`.
    File,
}

#[derive(Debug, Clone, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChiArgs {
    #[arg(long, value_enum, default_value = "random")]
    pub source: EnsembleSource,
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    #[arg(long, default_value_t = 4)]
    pub members: usize,
    /// Rank of each random state; 0 means full rank.
    #[arg(long, default_value_t = 0)]
    pub rank: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9, allow_hyphen_values = true)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementChoice {
    Computational,
    /// Eigenbasis of the average state; saturates χ for commuting ensembles.
    JointEigenbasis,
    /// Rank-one projective measurement in a random basis.
    Random,
    Dft,
    /// The `povm` entry of the ensemble file.
    File,
}

#[derive(Debug, Clone, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MutualInfoArgs {
    #[arg(long, value_enum, default_value = "random")]
    pub source: EnsembleSource,
    #[arg(long, value_enum, default_value = "computational")]
    pub measurement: MeasurementChoice,
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    #[arg(long, default_value_t = 4)]
    pub members: usize,
    #[arg(long, default_value_t = 0)]
    pub rank: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9, allow_hyphen_values = true)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Group {
    U1,
    So3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateChoice {
    /// `(|n,0> + |0,n>)/sqrt2`, generator the first mode's number.
    Noon,
    /// Number eigenstate `|n>`.
    Number,
    /// Ginibre state.
    Random,
    /// Random pure state of one spin-j irrep.
    SpinPure,
    /// Singlet of a spin-1/2 and an unrotated qubit.
    Singlet,
    /// Density matrix from `--file`.
    File,
}

#[derive(Debug, Clone, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsymmetryArgs {
    #[arg(long, value_enum, default_value = "u1")]
    pub group: Group,
    #[arg(long, value_enum, default_value = "noon")]
    pub state: StateChoice,
    /// Photon number for `noon` and `number`.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Per-mode dimension of random states.
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    /// Number of modes of random U(1) states; the generator is the total number.
    #[arg(long, default_value_t = 1)]
    pub modes: usize,
    #[arg(long, default_value_t = 1)]
    pub two_j: u32,
    /// SO(3) blocks as `2j:multiplicity`, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_block)]
    pub blocks: Vec<(u32, usize)>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9, allow_hyphen_values = true)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeChoice {
    Noon,
    Number,
    Random,
    /// Pure state with `p_n ∝ 4^{-n}` on photon numbers `2^n`, `n <= truncate`.
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorChoice {
    Uniform,
    Gaussian,
}

#[derive(Debug, Clone, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseSimArgs {
    #[arg(long, value_enum, default_value = "random")]
    pub probe: ProbeChoice,
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub truncate: usize,
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    #[arg(long, value_enum, default_value = "uniform")]
    pub prior: PriorChoice,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mean: f64,
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub offset: f64,
    #[arg(long, value_enum, default_value = "maximum-posterior")]
    pub estimator: Estimator,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpinProbe {
    /// Random pure state.
    Pure,
    /// `|j, j>`.
    Highest,
    /// Ginibre state.
    Random,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RotationPriorChoice {
    Uniform,
    Concentrated,
}

#[derive(Debug, Clone, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RotationSimArgs {
    #[arg(long, default_value_t = 1)]
    pub two_j: u32,
    #[arg(long, value_enum, default_value = "pure")]
    pub probe: SpinProbe,
    #[arg(long, value_enum, default_value = "uniform")]
    pub prior: RotationPriorChoice,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 8)]
    pub prior_grid: usize,
    #[arg(long, default_value_t = 8)]
    pub povm_grid: usize,
    #[arg(long, default_value_t = 8)]
    pub error_grid: usize,
    #[arg(long, value_enum, default_value = "identity-of-outcome")]
    pub estimator: Estimator,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldPriorChoice {
    Ball,
    Gaussian,
}

#[derive(Debug, Clone, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RotationBoundsArgs {
    #[arg(long, default_value_t = 1)]
    pub two_j: u32,
    #[arg(long, value_enum, default_value = "pure")]
    pub probe: SpinProbe,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_int: f64,
    #[arg(long, value_enum, default_value = "ball")]
    pub field_prior: FieldPriorChoice,
    /// Ball radius; the aliasing radius when absent.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Spin counts for the scaling fit, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ms: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9, allow_hyphen_values = true)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultimodeProbe {
    Random,
    /// Product of independent random modes.
    Product,
    /// Two-mode NOON state; `--dim` is `n + 1`.
    Noon,
}

#[derive(Debug, Clone, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MmodeBoundsArgs {
    #[arg(long, value_enum, default_value = "random")]
    pub probe: MultimodeProbe,
    #[arg(long, default_value_t = 2)]
    pub modes: usize,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9, allow_hyphen_values = true)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EurPair {
    /// Computational and DFT bases.
    Mub,
    /// Number and covariant phase on `--grid` outcomes.
    NumberPhase,
    /// Discretized position and momentum, odd `--dim`.
    Qp,
    /// Phase against a doubly degenerate number observable.
    Degenerate,
    /// Oscillator energy and time.
    Oscillator,
    /// Random pure states on incommensurate levels, long-time average.
    AlmostPeriodic,
}

#[derive(Debug, Clone, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EurSweepArgs {
    #[arg(long, value_enum, default_value = "mub")]
    pub pair: EurPair,
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rank of the random states; 0 means full rank.
    #[arg(long, default_value_t = 0)]
    pub rank: usize,
    /// Phase or time outcomes for the phase-type pairs.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    #[arg(long, default_value_t = 1.0)]
    pub length: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Half-width of the averaging window for `almost-periodic`.
    #[arg(long, default_value_t = 200.0)]
    pub window: f64,
    #[arg(long, default_value_t = 20_000)]
    pub time_samples: usize,
    /// Allowed negative slack; `1e-9`, or `1e-2` for `almost-periodic`, when absent.
    /// A negative value demands a margin instead.
    #[arg(long, allow_hyphen_values = true)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegerDistribution {
    Point,
    Uniform,
    Binomial,
    Geometric,
}

#[derive(Debug, Clone, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MowCheckArgs {
    #[arg(long, value_enum, default_value = "uniform")]
    pub dist: IntegerDistribution,
    /// Support size `{0, .., d-1}`.
    #[arg(long, default_value_t = 1024)]
    pub d: usize,
    /// Success probability (binomial) or ratio (geometric).
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Location of the point mass.
    #[arg(long, default_value_t = 0)]
    pub at: usize,
    #[arg(long, default_value_t = 1e-9, allow_hyphen_values = true)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RmsCheckArgs {
    #[arg(long, value_enum, default_value = "geometric")]
    pub probe: ProbeChoice,
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Largest `n` of the simulated geometric probe.
    #[arg(long, default_value_t = 10)]
    pub truncate: usize,
    /// Largest `n` in the closed-form geometric values.
    #[arg(long, default_value_t = 40)]
    pub terms: usize,
    #[arg(long, default_value_t = 2048)]
    pub grid: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_block(s: &str) -> Result<(u32, usize), String> {
    let (j, m) = s.split_once(':').ok_or_else(|| format!("block `{s}` is not `2j:multiplicity`"))?;
    Ok((j.trim().parse().map_err(|e| format!("{e}"))?, m.trim().parse().map_err(|e| format!("{e}"))?))
}

/// Parses the process arguments and runs.
pub fn main() -> ExitCode {
    execute(Cli::parse())
}

pub fn execute(cli: Cli) -> ExitCode {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    if cli.list_experiments {
        print!("{}", io::render_manifest()?);
        return Ok(ExitCode::SUCCESS);
    }
    let (command, out, csv, threads) = match cli.command {
        None => return Err(CliError::Config("no subcommand; see --help or --list-experiments".into())),
        Some(Invocation::Experiment(c)) => (c, cli.out, cli.csv, cli.threads),
        Some(Invocation::Run { config }) => {
            let text = std::fs::read_to_string(&config).map_err(|source| CliError::Io { path: config.clone(), source })?;
            let cfg = ExperimentConfig::from_json(&text)?;
            (cfg.experiment, cli.out.or(cfg.output), cli.csv.or(cfg.csv), cli.threads.or(cfg.threads))
        }
    };
    configure_threads(threads)?;
    let report = experiments::run(&command)?;
    let json = io::render_report(&report)?;
    let target = out.or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(|d| PathBuf::from(d).join(format!("{}.json", command.name()))));
    match target {
        Some(path) => io::write_atomic(&path, json.as_bytes())?,
        None => print!("{json}"),
    }
    if let Some(path) = csv {
        let table = report.table.as_ref().ok_or_else(|| CliError::Config(format!("`{}` emits no CSV rows", command.name())))?;
        io::write_atomic(&path, &io::render_csv(table)?)?;
    }
    if report.holds {
        Ok(ExitCode::SUCCESS)
    } else {
        let worst = report.slacks.iter().filter(|s| !s.holds).map(|s| s.name.as_str()).collect::<Vec<_>>().join(", ");
        match report.violation_seed {
            Some(seed) => eprintln!("violation in {worst} (seed {seed})"),
            None => eprintln!("violation in {worst}"),
        }
        Ok(ExitCode::from(2))
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    match threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        _ => Ok(()),
    }
}

/// Seed of trial `trial` in a sweep started from `seed` (SplitMix64).
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed.wrapping_add(trial.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub use experiments::{Report, Slack, Table};
