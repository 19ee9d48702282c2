use std::path::Path;

use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;

use mlurn::bounds::{self, CondorcetBoundInput};
use mlurn::chain_exact::{self, StationaryDist};
use mlurn::consistency::{self, ApproxRule, ConsistencyReport, Perturbed, TemporalAverage};
use mlurn::lottery::{self, MlResult, Uniqueness};
use mlurn::prefs::{parse_profile, parse_rational, rational_to_f64, Profile};
use mlurn::replicator::{self, FixedPoint, VectorField};
use mlurn::urn::{self, Duels, Init, RunRecord, Sampling, SimConfig, SojournQuery};
use mlurn::{catalog, Error, Rational};

use crate::output::{csv_bytes, fmt_vec, fnum, numbered, sha256_hex, RunContext};
use crate::{
    AxiomsArgs, BoundsArgs, FixedpointArgs, Global, LevelsetsArgs, OdeArgs, ResourceGuard, RuleArg, SamplingArg,
    SimulateArgs, StationaryArgs, Suite,
};

/// Loads `--profile` (file path or built-in name) and records its digest.
pub fn load_profile(ctx: &mut RunContext, g: &Global) -> Result<Profile> {
    let name = g.profile.as_deref().ok_or_else(|| {
        Error::InvalidArgument(format!("--profile is required (a file or one of {})", catalog::NAMES.join(", ")))
    })?;
    let text = match catalog::text_by_name(name) {
        Some(t) => t.to_string(),
        None => std::fs::read_to_string(name).map_err(|e| Error::InvalidArgument(format!("reading {name}: {e}")))?,
    };
    ctx.input_digest = Some(sha256_hex(text.as_bytes()));
    Ok(parse_profile(&text)?)
}

/// Parses `uniform`, `degenerate:<alt>` (1-based) or `counts:<c1>,...`.
pub fn parse_init(s: &str, d: usize) -> Result<Init> {
    if s == "uniform" {
        return Ok(Init::Uniform);
    }
    if let Some(alt) = s.strip_prefix("degenerate:") {
        return Ok(Init::Degenerate(parse_alternative(alt, d)?));
    }
    if let Some(list) = s.strip_prefix("counts:") {
        let counts = list
            .split(',')
            .map(|c| c.trim().parse::<u32>().map_err(|_| Error::InvalidArgument(format!("bad count {c:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(Init::Counts(counts));
    }
    Err(Error::InvalidArgument(format!("unknown initialization {s:?}")).into())
}

fn parse_alternative(s: &str, d: usize) -> Result<usize> {
    match s.trim().parse::<usize>() {
        Ok(i) if (1..=d).contains(&i) => Ok(i - 1),
        _ => Err(Error::InvalidArgument(format!("alternative {s:?} not in 1..={d}")).into()),
    }
}

/// Parses `uniform`, `degenerate:<alt>` or a comma-separated lottery.
pub fn parse_start(s: &str, d: usize) -> Result<Vec<f64>> {
    if s == "uniform" {
        return Ok(lottery::uniform(d));
    }
    if let Some(alt) = s.strip_prefix("degenerate:") {
        return Ok(lottery::degenerate(d, parse_alternative(alt, d)?));
    }
    let p = s
        .split(',')
        .map(|x| Ok(rational_to_f64(&parse_rational(x.trim())?)))
        .collect::<Result<Vec<f64>, Error>>()?;
    if p.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: p.len() }.into());
    }
    let sum: f64 = p.iter().sum();
    if p.iter().any(|&x| x < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("start {s:?} is not a lottery")).into());
    }
    Ok(p)
}

fn fmt_winner(w: Option<usize>) -> String {
    w.map(|w| (w + 1).to_string()).unwrap_or_default()
}

fn fmt_opt(v: Option<&Vec<f64>>, d: usize) -> Vec<String> {
    match v {
        Some(v) => v.iter().copied().map(fnum).collect(),
        None => vec![String::new(); d],
    }
}

fn unique_ml(profile: &Profile) -> Result<(MlResult, Option<Vec<f64>>)> {
    let ml = lottery::maximal_lottery(&profile.margin_matrix())?;
    let f = (ml.uniqueness == Uniqueness::Unique).then(|| ml.to_f64());
    Ok((ml, f))
}

#[derive(Serialize)]
struct SolveReport {
    d: usize,
    voters: u64,
    lottery: Vec<String>,
    lottery_f64: Vec<f64>,
    uniqueness: Uniqueness,
    support: Vec<usize>,
    condorcet_winner: Option<usize>,
}

pub fn solve(ctx: &mut RunContext, g: &Global) -> Result<()> {
    ctx.subcommand = "solve".into();
    let profile = load_profile(ctx, g)?;
    let m = profile.margin_matrix();
    let ml = lottery::maximal_lottery(&m)?;
    let report = SolveReport {
        d: profile.d(),
        voters: profile.voters(),
        lottery: ml.lottery.iter().map(ToString::to_string).collect(),
        lottery_f64: ml.to_f64(),
        uniqueness: ml.uniqueness,
        support: ml.support.iter().map(|i| i + 1).collect(),
        condorcet_winner: lottery::condorcet_winner(&m).map(|w| w + 1),
    };
    if let Some(out) = &g.out {
        let mut text = serde_json::to_vec_pretty(&report)?;
        text.push(b'\n');
        ctx.write_artifact(out, &text)?;
    }
    ctx.emit(&report, || {
        let mut s = format!("maximal lottery: {}\n", lottery::format_exact(&ml.lottery));
        s += &format!("approx:          {}\n", fmt_vec(&report.lottery_f64));
        s += &format!("uniqueness:      {:?}\n", report.uniqueness).to_lowercase();
        if let Some(w) = report.condorcet_winner {
            s += &format!("condorcet winner: {w}\n");
        }
        s
    })
}

#[derive(Serialize)]
struct RunSummary {
    seed: u64,
    final_counts: Vec<u32>,
    temporal_average: Option<Vec<f64>>,
    distance_to_ml: Option<f64>,
    sojourn_fraction: Option<f64>,
    winner_distribution: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct SimulateReport {
    maximal_lottery: Option<Vec<f64>>,
    runs: Vec<RunSummary>,
}

fn summarize(rec: &RunRecord, seed: u64, ml: Option<&Vec<f64>>) -> RunSummary {
    RunSummary {
        seed,
        final_counts: rec.final_state.counts().to_vec(),
        distance_to_ml: ml.zip(rec.temporal_average.as_ref()).map(|(m, z)| lottery::l1_distance(m, z)),
        temporal_average: rec.temporal_average.clone(),
        sojourn_fraction: rec.sojourn.first().map(|(_, f)| *f),
        winner_distribution: rec.empirical_winner_dist.clone(),
    }
}

/// CSV of a kept trajectory: round, counts, winner and running average.
pub fn trajectory_csv(rec: &RunRecord, d: usize) -> Result<Vec<u8>> {
    let header: Vec<String> = std::iter::once("round".to_string())
        .chain(numbered("n_", d))
        .chain(std::iter::once("winner".to_string()))
        .chain(numbered("z_", d))
        .collect();
    let rows = rec.trajectory.iter().map(|s| {
        let mut row = vec![s.round.to_string()];
        row.extend(s.counts.iter().map(u32::to_string));
        row.push(fmt_winner(s.winner));
        row.extend(fmt_opt(s.temporal_average.as_ref(), d));
        row
    });
    csv_bytes(&header, rows)
}

pub fn simulate(ctx: &mut RunContext, g: &Global, a: &SimulateArgs) -> Result<()> {
    ctx.subcommand = "simulate".into();
    let profile = load_profile(ctx, g)?;
    let d = profile.d();
    let work = a.rounds.saturating_mul(a.runs as u64);
    if work > a.max_work {
        return Err(ResourceGuard(format!("{work} total rounds exceed --max-work {}", a.max_work)).into());
    }
    let rows = a.rounds / a.stride.max(1) + 2;
    if g.out.is_some() && a.runs == 1 && rows > a.max_rows {
        return Err(ResourceGuard(format!("trajectory of ~{rows} rows exceeds --max-rows {}", a.max_rows)).into());
    }
    let (_, ml) = unique_ml(&profile)?;
    let mut cfg = SimConfig::new(a.balls, a.mutation, a.rounds, g.seed);
    cfg.init = parse_init(&a.init, d)?;
    cfg.sampling = match a.sampling {
        SamplingArg::With => Sampling::WithReplacement,
        SamplingArg::Without => Sampling::WithoutReplacement,
    };
    // Without an output file only the summary is needed.
    cfg.stride = if g.out.is_some() { a.stride } else { a.rounds.max(1) };
    cfg.winner_period = a.winner_period;
    if let Some(delta) = a.sojourn_delta {
        let center = ml.clone().ok_or_else(|| Error::InvalidArgument("sojourn needs a unique maximal lottery".into()))?;
        cfg.sojourn.push(SojournQuery { center, delta });
    }
    let duels = Duels::from_majority(&profile.majority_matrix());
    let seeds: Vec<u64> = (0..a.runs).map(|k| urn::run_seed(g.seed, k)).collect();
    let records = if a.runs == 1 { vec![urn::run(&cfg, &duels)?] } else { urn::run_many(&cfg, &duels, &seeds)? };
    let report = SimulateReport {
        runs: records.iter().zip(&seeds).map(|(r, &s)| summarize(r, s, ml.as_ref())).collect(),
        maximal_lottery: ml.clone(),
    };
    if let Some(out) = &g.out {
        let bytes = if a.runs == 1 {
            trajectory_csv(&records[0], d)?
        } else {
            let header: Vec<String> = ["run", "seed"]
                .into_iter()
                .map(String::from)
                .chain(numbered("n_", d))
                .chain(numbered("z_", d))
                .chain(std::iter::once("distance_to_ml".into()))
                .collect();
            let rows = report.runs.iter().enumerate().map(|(k, r)| {
                let mut row = vec![k.to_string(), r.seed.to_string()];
                row.extend(r.final_counts.iter().map(u32::to_string));
                row.extend(fmt_opt(r.temporal_average.as_ref(), d));
                row.push(r.distance_to_ml.map(fnum).unwrap_or_default());
                row
            });
            csv_bytes(&header, rows)?
        };
        ctx.write_artifact(out, &bytes)?;
    }
    ctx.emit(&report, || {
        let mut s = String::new();
        if let Some(m) = &report.maximal_lottery {
            s += &format!("maximal lottery:  {}\n", fmt_vec(m));
        }
        for r in &report.runs {
            s += &format!("seed {}: final counts {:?}", r.seed, r.final_counts);
            if let Some(z) = &r.temporal_average {
                s += &format!(", temporal average {}", fmt_vec(z));
            }
            if let Some(dist) = r.distance_to_ml {
                s += &format!(", L1 distance to ML {dist:.4}");
            }
            if let Some(f) = r.sojourn_fraction {
                s += &format!(", sojourn {f:.4}");
            }
            s.push('\n');
        }
        s
    })
}

#[derive(Serialize)]
struct StationaryReport {
    states: usize,
    residual: f64,
    mean_state: Vec<f64>,
    maximal_lottery: Option<Vec<f64>>,
    ball_mass: Option<f64>,
}

fn solve_chain(profile: &Profile, balls: usize, rate: f64, cap: usize) -> Result<(chain_exact::Kernel<f64>, StationaryDist)> {
    let kernel = chain_exact::build_kernel(balls, rate, &profile.majority_matrix(), cap)?;
    let dist = chain_exact::stationary(&kernel)?;
    Ok((kernel, dist))
}

pub fn stationary(ctx: &mut RunContext, g: &Global, a: &StationaryArgs) -> Result<()> {
    ctx.subcommand = "stationary".into();
    let profile = load_profile(ctx, g)?;
    let (_, ml) = unique_ml(&profile)?;
    let (_, dist) = solve_chain(&profile, a.balls, a.mutation, a.cap)?;
    let ball_mass = match (a.delta, &ml) {
        (Some(delta), Some(m)) => Some(dist.ball_mass(m, delta)),
        (Some(_), None) => return Err(Error::InvalidArgument("ball mass needs a unique maximal lottery".into()).into()),
        _ => None,
    };
    let report = StationaryReport {
        states: dist.index.count(),
        residual: dist.residual,
        mean_state: dist.mean_state(),
        maximal_lottery: ml,
        ball_mass,
    };
    if let Some(out) = &g.out {
        let d = profile.d();
        let header: Vec<String> = numbered("n_", d).chain(std::iter::once("pi".into())).collect();
        let rows = dist.pi.iter().enumerate().map(|(k, w)| {
            let mut row: Vec<String> = dist.index.unrank(k).iter().map(u32::to_string).collect();
            row.push(fnum(*w));
            row
        });
        ctx.write_artifact(out, &csv_bytes(&header, rows)?)?;
    }
    ctx.emit(&report, || {
        let mut s = format!("states: {}  residual: {:.2e}\n", report.states, report.residual);
        s += &format!("mean state: {}\n", fmt_vec(&report.mean_state));
        if let (Some(m), Some(mass)) = (&report.maximal_lottery, report.ball_mass) {
            s += &format!("maximal lottery: {}\nball mass: {mass:.6}\n", fmt_vec(m));
        }
        s
    })
}

#[derive(Serialize)]
struct LevelsetsReport {
    winner: usize,
    #[serde(serialize_with = "mlurn::serialize_rational")]
    alpha: Rational,
    beta: f64,
    decay_limit: u64,
    floor: f64,
    violations: Vec<(usize, f64)>,
    residual: f64,
}

pub fn levelsets(ctx: &mut RunContext, g: &Global, a: &LevelsetsArgs) -> Result<()> {
    ctx.subcommand = "levelsets".into();
    let profile = load_profile(ctx, g)?;
    let majority = profile.majority_matrix();
    let (winner, alpha) = bounds::alpha_of(&majority).ok_or(Error::NoCondorcetWinner)?;
    let (kernel, dist) = solve_chain(&profile, a.balls, a.mutation, a.cap)?;
    let _ = kernel;
    let sigma = chain_exact::level_set_masses(&dist, winner);
    let beta = rational_to_f64(&bounds::beta(&alpha));
    let rate = Rational::from_float(a.mutation).ok_or_else(|| Error::InvalidArgument("mutation rate".into()))?;
    let limit = bounds::decay_limit(a.balls as u64, &rate, &alpha);
    let violations = bounds::ratio_violations(&sigma, beta, limit as usize, a.floor);
    let alpha_f = rational_to_f64(&alpha);
    if let Some(out) = &g.out {
        let header: Vec<String> = ["k", "sigma", "ratio", "u_k", "d_k", "bound_ratio"].map(String::from).to_vec();
        let rows = (0..sigma.len()).map(|k| {
            let (u, dn) = chain_exact::updown_bounds(profile.d(), a.balls, a.mutation, alpha_f, k);
            let ratio = if k > 0 && sigma[k] > 0.0 { fnum(sigma[k - 1] / sigma[k]) } else { String::new() };
            let bound = if k > 0 {
                let (u_prev, _) = chain_exact::updown_bounds(profile.d(), a.balls, a.mutation, alpha_f, k - 1);
                fnum(dn / u_prev)
            } else {
                String::new()
            };
            vec![k.to_string(), fnum(sigma[k]), ratio, fnum(u), fnum(dn), bound]
        });
        ctx.write_artifact(out, &csv_bytes(&header, rows)?)?;
    }
    let report = LevelsetsReport {
        winner: winner + 1,
        alpha,
        beta,
        decay_limit: limit,
        floor: a.floor,
        violations,
        residual: dist.residual,
    };
    ctx.emit(&report, || {
        let mut s = format!(
            "condorcet winner {} with alpha {}; beta {:.6}; geometric decay checked for k <= {}\n",
            report.winner, report.alpha, report.beta, report.decay_limit
        );
        if report.violations.is_empty() {
            s += "no level with sigma_(k-1)/sigma_k above beta\n";
        } else {
            for (k, r) in &report.violations {
                s += &format!("k = {k}: ratio {r:.6} exceeds beta\n");
            }
        }
        s
    })
}

#[derive(Serialize)]
struct OdeReport {
    reference: Vec<f64>,
    reference_kind: &'static str,
    nudged: bool,
    final_state: Vec<f64>,
    final_entropy_bits: Option<f64>,
    halvings: u32,
    step: f64,
}

pub struct OdeRun {
    pub rows: Vec<Vec<String>>,
    pub header: Vec<String>,
    report: OdeReport,
}

/// Integrates from `start` and tabulates `t, y, D(y‖reference)` in bits.
/// The reference is the fixed point for `r > 0` and the maximal lottery at `r = 0`.
pub fn ode_table(profile: &Profile, rate: f64, start: &[f64], t_end: f64, step: f64, every: usize) -> Result<OdeRun> {
    let m = profile.margin_matrix();
    let vf = VectorField::new(&m, rate)?;
    let (reference, reference_kind) = if rate > 0.0 {
        (replicator::fixed_point(&vf)?.lottery, "fixed point")
    } else {
        let (_, ml) = unique_ml(profile)?;
        (ml.ok_or_else(|| Error::InvalidArgument("maximal lottery is not unique".into()))?, "maximal lottery")
    };
    // Entropy against a reference is finite only where the state is positive.
    let nudged = start.iter().zip(&reference).any(|(&y, &q)| y == 0.0 && q > 0.0);
    let start = if nudged { replicator::nudge_interior(start, 1e-9) } else { start.to_vec() };
    let traj = replicator::integrate(&vf, &start, t_end, step)?;
    let d = profile.d();
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain(numbered("y_", d))
        .chain(std::iter::once("entropy".into()))
        .collect();
    let mut rows = Vec::new();
    let last = traj.times.len() - 1;
    let mut final_entropy = None;
    for (k, (t, y)) in traj.times.iter().zip(&traj.states).enumerate() {
        if k % every.max(1) != 0 && k != last {
            continue;
        }
        let e = replicator::relative_entropy_bits(&reference, y).ok();
        if k == last {
            final_entropy = e;
        }
        let mut row = vec![fnum(*t)];
        row.extend(y.iter().copied().map(fnum));
        row.push(e.map(fnum).unwrap_or_default());
        rows.push(row);
    }
    Ok(OdeRun {
        rows,
        header,
        report: OdeReport {
            reference,
            reference_kind,
            nudged,
            final_state: traj.last().to_vec(),
            final_entropy_bits: final_entropy,
            halvings: traj.halvings,
            step: traj.step,
        },
    })
}

pub fn ode(ctx: &mut RunContext, g: &Global, a: &OdeArgs) -> Result<()> {
    ctx.subcommand = "ode".into();
    let profile = load_profile(ctx, g)?;
    let start = parse_start(&a.start, profile.d())?;
    let run = ode_table(&profile, a.mutation, &start, a.t_end, a.step, a.every)?;
    if let Some(out) = &g.out {
        ctx.write_artifact(out, &csv_bytes(&run.header, run.rows.iter().cloned())?)?;
    }
    let report = &run.report;
    ctx.emit(report, || {
        let mut s = format!("{}: {}\n", report.reference_kind, fmt_vec(&report.reference));
        s += &format!("state at t = {}: {}\n", a.t_end, fmt_vec(&report.final_state));
        if let Some(e) = report.final_entropy_bits {
            s += &format!("relative entropy: {e:.3e} bits\n");
        }
        if report.nudged {
            s += "start moved into the interior by 1e-9 so the entropy is finite\n";
        }
        if report.halvings > 0 {
            s += &format!("step halved {} times to {}\n", report.halvings, report.step);
        }
        s
    })
}

#[derive(Serialize)]
struct FixedpointReport {
    maximal_lottery: Option<Vec<f64>>,
    points: Vec<FixedPoint>,
    distances_to_ml: Vec<Option<f64>>,
}

pub fn fixedpoint(ctx: &mut RunContext, g: &Global, a: &FixedpointArgs) -> Result<()> {
    ctx.subcommand = "fixedpoint".into();
    let profile = load_profile(ctx, g)?;
    let m = profile.margin_matrix();
    let (_, ml) = unique_ml(&profile)?;
    let points = match (&a.schedule, a.mutation) {
        (Some(schedule), _) => replicator::ml_limit_path(&m, schedule)?,
        (None, Some(rate)) => vec![replicator::fixed_point_checked(&VectorField::new(&m, rate)?, a.starts, g.seed)?],
        (None, None) => return Err(Error::InvalidArgument("give --mutation or --schedule".into()).into()),
    };
    let distances_to_ml = points.iter().map(|p| ml.as_ref().map(|m| lottery::l1_distance(&p.lottery, m))).collect();
    let report = FixedpointReport { maximal_lottery: ml, points, distances_to_ml };
    if let Some(out) = &g.out {
        let d = profile.d();
        let header: Vec<String> = std::iter::once("rate".to_string())
            .chain(numbered("p_", d))
            .chain(["residual", "distance_to_ml"].map(String::from))
            .collect();
        let rows = report.points.iter().zip(&report.distances_to_ml).map(|(p, dist)| {
            let mut row = vec![fnum(p.rate)];
            row.extend(p.lottery.iter().copied().map(fnum));
            row.push(fnum(p.residual));
            row.push(dist.map(fnum).unwrap_or_default());
            row
        });
        ctx.write_artifact(out, &csv_bytes(&header, rows)?)?;
    }
    ctx.emit(&report, || {
        let mut s = String::new();
        for (p, dist) in report.points.iter().zip(&report.distances_to_ml) {
            s += &format!("r = {}: {}  residual {:.1e}", p.rate, fmt_vec(&p.lottery), p.residual);
            if let Some(dist) = dist {
                s += &format!("  L1 to ML {dist:.3e}");
            }
            if let Some(spread) = p.start_spread {
                s += &format!("  start spread {spread:.1e}");
            }
            s.push('\n');
        }
        s
    })
}

#[derive(Serialize)]
struct BoundsReport {
    winner: usize,
    recipe: bounds::CondorcetRecipe,
    certification: Option<bounds::Certification>,
}

pub fn bounds(ctx: &mut RunContext, g: &Global, a: &BoundsArgs) -> Result<()> {
    ctx.subcommand = "bounds".into();
    let profile = load_profile(ctx, g)?;
    let majority = profile.majority_matrix();
    let (winner, alpha) = bounds::alpha_of(&majority).ok_or(Error::NoCondorcetWinner)?;
    let input = CondorcetBoundInput { alpha, delta: parse_rational(&a.delta)?, tau: parse_rational(&a.tau)?, d: profile.d() };
    let recipe = bounds::recipe(&input)?;
    let certification = if a.certify { Some(bounds::certify(&recipe, &majority, a.cap)?.0) } else { None };
    let report = BoundsReport { winner: winner + 1, recipe, certification };
    if let Some(out) = &g.out {
        let mut text = serde_json::to_vec_pretty(&report)?;
        text.push(b'\n');
        ctx.write_artifact(out, &text)?;
    }
    ctx.emit(&report, || {
        let r = &report.recipe;
        let mut s = format!("condorcet winner {} with alpha {}\n", report.winner, r.input.alpha);
        s += &format!("beta = {}  k0 = {}  r = {}  N_min = {}\n", r.beta, r.k0, r.rate, r.n_min);
        s += &format!(
            "side conditions: balls {} (needs N >= {}), rate {}\n",
            if r.side_balls_ok { "ok" } else { "NOT met" },
            r.side_balls_min,
            if r.side_rate_ok { "ok" } else { "NOT met" }
        );
        s += &format!(
            "heuristic (not certified): N = {}, r in [{:.4}, {:.4}]\n",
            r.heuristic.balls, r.heuristic.rate_low, r.heuristic.rate_high
        );
        if let Some(c) = &report.certification {
            s += &format!(
                "certification at N = {}, r = {}: tail mass {:.6} vs target {:.6}: {}\n",
                c.balls,
                c.rate,
                c.tail_mass,
                c.target,
                if c.passed { "passed" } else { "FAILED" }
            );
        }
        s
    })
}

#[derive(Serialize)]
struct PopulationSummary {
    rule: String,
    checked: usize,
    antecedent_held: usize,
    failures: usize,
    worst_witness: f64,
    passed: bool,
}

#[derive(Serialize)]
#[serde(untagged)]
enum AxiomsReport {
    Population { summary: PopulationSummary, cases: Vec<ConsistencyReport> },
    Condorcet(consistency::CondorcetReport),
}

pub fn axioms(ctx: &mut RunContext, g: &Global, a: &AxiomsArgs) -> Result<()> {
    ctx.subcommand = "axioms".into();
    let rule: Box<dyn ApproxRule> = match a.rule {
        RuleArg::Exact => Box::new(consistency::ExactMl),
        RuleArg::Perturbed => Box::new(Perturbed { delta: a.delta, seed: g.seed }),
        RuleArg::Urn => Box::new(TemporalAverage {
            balls: a.urn_balls,
            rate: a.urn_mutation,
            rounds: a.urn_rounds,
            seed: g.seed,
            delta: a.delta,
        }),
    };
    let report = match a.suite {
        Suite::Population => {
            let pairs = consistency::sample_pairs(a.alternatives, a.samples, a.max_voters, g.seed)?;
            let cases = pairs
                .par_iter()
                .map(|(r1, r2)| consistency::check_population_consistency(rule.as_ref(), r1, r2, a.epsilon))
                .collect::<mlurn::Result<Vec<_>>>()?;
            let summary = PopulationSummary {
                rule: rule.name(),
                checked: cases.len(),
                antecedent_held: cases.iter().filter(|c| c.antecedent).count(),
                failures: cases.iter().filter(|c| !c.passed).count(),
                worst_witness: cases.iter().filter(|c| c.antecedent).map(|c| c.witness).fold(0.0, f64::max),
                passed: cases.iter().all(|c| c.passed),
            };
            AxiomsReport::Population { summary, cases }
        }
        Suite::Condorcet => {
            let profiles = if g.profile.is_some() {
                vec![load_profile(ctx, g)?.to_fractional()]
            } else {
                consistency::sample_condorcet_profiles(a.alternatives, a.samples, a.max_voters, g.seed)
            };
            AxiomsReport::Condorcet(consistency::check_condorcet_consistency(rule.as_ref(), &profiles, a.epsilon)?)
        }
    };
    if let Some(out) = &g.out {
        let mut text = serde_json::to_vec_pretty(&report)?;
        text.push(b'\n');
        ctx.write_artifact(out, &text)?;
    }
    let verdict = |ok: bool| if ok { "passed" } else { "FAILED" };
    ctx.emit(&report, || match &report {
        AxiomsReport::Population { summary: s, .. } => format!(
            "population consistency of {} at epsilon {}: {} pairs, antecedent held in {}, worst witness {:.4}, {} failures: {}\n",
            s.rule,
            a.epsilon,
            s.checked,
            s.antecedent_held,
            s.worst_witness,
            s.failures,
            verdict(s.passed)
        ),
        AxiomsReport::Condorcet(c) => format!(
            "condorcet consistency of {} at epsilon {}: {} profiles, {} failures: {}\n",
            c.rule,
            c.epsilon,
            c.checked,
            c.failures.len(),
            verdict(c.passed)
        ),
    })
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::InvalidArgument(format!("creating {}: {e}", path.display())).into())
}
