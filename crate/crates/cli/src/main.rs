//! `mlurn`: maximal lotteries, urn simulations and mean-field dynamics from the command line.

mod commands;
mod figures;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mlurn::chain_exact::DEFAULT_STATE_CAP;
use mlurn::Error;

/// Exit status for invalid input (also what clap uses for usage errors).
const EXIT_INVALID: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_NONCONVERGENCE: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "mlurn", version, about = "Maximal lotteries, urn Markov chains and replicator dynamics")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Global {
    /// Profile file, or one of the built-in names: condorcet-winner, condorcet-cycle, cycle-with-loser.
    #[arg(long, global = true)]
    pub profile: Option<String>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output file (directory for `figures`); a `.manifest.json` sidecar is written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Exact maximal lottery with a uniqueness diagnostic.
    Solve,
    /// Monte Carlo run(s) of the urn process.
    Simulate(SimulateArgs),
    /// Stationary distribution of the urn chain.
    Stationary(StationaryArgs),
    /// Level-set masses of the Condorcet winner's label.
    Levelsets(LevelsetsArgs),
    /// Integrate the mean-field ODE.
    Ode(OdeArgs),
    /// Fixed point of the mean-field dynamics, optionally along a rate schedule.
    Fixedpoint(FixedpointArgs),
    /// Certified (N, r) recipe for a profile with a Condorcet winner.
    Bounds(BoundsArgs),
    /// Approximate population- or Condorcet-consistency checks.
    Axioms(AxiomsArgs),
    /// Data behind the reference figures, as CSV.
    Figures(FiguresArgs),
    /// Rerun the command recorded in a manifest.
    Replay { manifest: PathBuf },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingArg {
    With,
    Without,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub balls: u32,
    /// Mutation rate, decimal or fraction such as 1/60.
    #[arg(long, value_parser = parse_rate)]
    pub mutation: f64,
    #[arg(long)]
    pub rounds: u64,
    /// uniform, degenerate:<alt> or counts:<c1>,<c2>,...
    #[arg(long, default_value = "uniform")]
    pub init: String,
    #[arg(long, value_enum, default_value_t = SamplingArg::With)]
    pub sampling: SamplingArg,
    /// Keep every k-th round in the trajectory.
    #[arg(long, default_value_t = 1)]
    pub stride: u64,
    #[arg(long, default_value_t = 1)]
    pub winner_period: u64,
    /// Independent runs with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    /// Also report the sojourn fraction in the open L1 ball of this radius around the maximal lottery.
    #[arg(long)]
    pub sojourn_delta: Option<f64>,
    /// Refuse to write trajectories with more rows than this.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_rows: u64,
    /// Refuse runs whose total round count (rounds × runs) exceeds this.
    #[arg(long, default_value_t = 1_000_000_000)]
    pub max_work: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct StationaryArgs {
    #[arg(long)]
    pub balls: usize,
    #[arg(long, value_parser = parse_rate)]
    pub mutation: f64,
    /// Report the stationary mass of the open L1 ball of this radius around the maximal lottery.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    pub cap: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LevelsetsArgs {
    #[arg(long)]
    pub balls: usize,
    #[arg(long, value_parser = parse_rate)]
    pub mutation: f64,
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    pub cap: usize,
    /// Level masses below this are too close to rounding to judge ratios.
    #[arg(long, default_value_t = 1e-10)]
    pub floor: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OdeArgs {
    #[arg(long, value_parser = parse_rate)]
    pub mutation: f64,
    #[arg(long, default_value_t = 200.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = mlurn::replicator::DEFAULT_STEP)]
    pub step: f64,
    /// uniform, degenerate:<alt> or a lottery p1,p2,...
    #[arg(long, default_value = "uniform")]
    pub start: String,
    /// Write every k-th grid point.
    #[arg(long, default_value_t = 1)]
    pub every: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FixedpointArgs {
    #[arg(long, value_parser = parse_rate, required_unless_present = "schedule")]
    pub mutation: Option<f64>,
    /// Strictly decreasing comma-separated rates.
    #[arg(long, value_delimiter = ',', value_parser = parse_rate)]
    pub schedule: Option<Vec<f64>>,
    /// Random interior starts used to confirm uniqueness.
    #[arg(long, default_value_t = 10)]
    pub starts: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BoundsArgs {
    /// Ball-fraction tolerance, decimal or fraction.
    #[arg(long)]
    pub delta: String,
    /// Time-fraction tolerance, decimal or fraction.
    #[arg(long)]
    pub tau: String,
    /// Solve the exact chain at the recipe and report the achieved mass.
    #[arg(long)]
    pub certify: bool,
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    pub cap: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Population,
    Condorcet,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleArg {
    Exact,
    Perturbed,
    Urn,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct AxiomsArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.2)]
    pub epsilon: f64,
    /// Declared approximation radius of the rule.
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = RuleArg::Perturbed)]
    pub rule: RuleArg,
    /// Number of alternatives in sampled profiles.
    #[arg(long, default_value_t = 3)]
    pub alternatives: usize,
    #[arg(long, default_value_t = 99)]
    pub max_voters: u64,
    #[arg(long, default_value_t = 70)]
    pub urn_balls: u32,
    #[arg(long, value_parser = parse_rate, default_value = "1/60")]
    pub urn_mutation: f64,
    #[arg(long, default_value_t = 100_000)]
    pub urn_rounds: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum FigureName {
    #[value(name = "fig2-left")]
    #[serde(rename = "fig2-left")]
    Fig2Left,
    #[value(name = "fig2-right")]
    #[serde(rename = "fig2-right")]
    Fig2Right,
    #[value(name = "fig3")]
    #[serde(rename = "fig3")]
    Fig3,
    #[value(name = "fig4")]
    #[serde(rename = "fig4")]
    Fig4,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FiguresArgs {
    #[arg(value_enum)]
    pub name: FigureName,
    /// Multiplies ball and round counts of the urn figures (e.g. 0.1).
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Refuse urn figures whose round count exceeds this.
    #[arg(long, default_value_t = 100_000_000)]
    pub max_rounds: u64,
}

/// Resource guard tripped before any work was done.
#[derive(Debug)]
pub struct ResourceGuard(pub String);

impl std::fmt::Display for ResourceGuard {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "resource guard: {}", self.0)
    }
}

impl std::error::Error for ResourceGuard {}

fn parse_rate(s: &str) -> Result<f64, String> {
    let r = mlurn::prefs::parse_rational(s).map_err(|e| e.to_string())?;
    let x = mlurn::prefs::rational_to_f64(&r);
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("rate {s} outside [0, 1]"))
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ResourceGuard>().is_some() {
        return EXIT_RESOURCE;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::StateCap { .. }) => EXIT_RESOURCE,
        Some(Error::NonConvergence { .. } | Error::Numerical(_)) => EXIT_NONCONVERGENCE,
        Some(_) => EXIT_INVALID,
        None if err.downcast_ref::<std::io::Error>().is_some() => EXIT_INVALID,
        None if err.downcast_ref::<serde_json::Error>().is_some() => EXIT_INVALID,
        None => 1,
    }
}

fn run(cli: Cli, argv: Vec<String>) -> Result<()> {
    if let Command::Replay { manifest } = &cli.command {
        let text = std::fs::read_to_string(manifest).with_context(|| format!("reading {}", manifest.display()))?;
        let recorded: output::RunManifest = serde_json::from_str(&text)?;
        let replayed = Cli::try_parse_from(&recorded.argv).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        if matches!(replayed.command, Command::Replay { .. }) {
            return Err(Error::InvalidArgument("manifest records a replay".into()).into());
        }
        return run(replayed, recorded.argv);
    }
    if let Some(jobs) = cli.global.jobs {
        // Ignore a second initialization within one process (replay).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global();
    }
    let mut ctx = output::RunContext {
        subcommand: String::new(),
        argv,
        config: serde_json::json!({ "global": cli.global, "args": cli.command }),
        seed: Some(cli.global.seed),
        input_digest: None,
        started: output::now_unix(),
        json: cli.global.json,
    };
    let g = &cli.global;
    match &cli.command {
        Command::Solve => commands::solve(&mut ctx, g),
        Command::Simulate(a) => commands::simulate(&mut ctx, g, a),
        Command::Stationary(a) => commands::stationary(&mut ctx, g, a),
        Command::Levelsets(a) => commands::levelsets(&mut ctx, g, a),
        Command::Ode(a) => commands::ode(&mut ctx, g, a),
        Command::Fixedpoint(a) => commands::fixedpoint(&mut ctx, g, a),
        Command::Bounds(a) => commands::bounds(&mut ctx, g, a),
        Command::Axioms(a) => commands::axioms(&mut ctx, g, a),
        Command::Figures(a) => figures::figures(&mut ctx, g, a),
        Command::Replay { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse_from(&argv);
    match run(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
