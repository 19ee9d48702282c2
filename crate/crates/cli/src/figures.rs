//! Data for the reference plots: urn trajectories with running averages, and
//! entropy curves of the mean-field ODE. Seeds of the original runs are not
//! known, so reruns agree statistically rather than point by point.

use std::path::PathBuf;

use anyhow::Result;
use serde::Serialize;

use mlurn::lottery;
use mlurn::urn::{self, Duels, Init, SimConfig};
use mlurn::{catalog, Error};

use crate::commands::{ensure_dir, ode_table, trajectory_csv};
use crate::output::{csv_bytes, fmt_vec, sha256_hex, RunContext};
use crate::{FigureName, FiguresArgs, Global, ResourceGuard};

/// Rows kept per urn trajectory, whatever the round count.
const TARGET_ROWS: u64 = 2000;
const ODE_START: [f64; 4] = [0.1, 0.2, 0.3, 0.4];
const ODE_T_END: f64 = 1000.0;
/// Keep every 100th RK4 point, one per time unit at the default step.
const ODE_EVERY: usize = 100;

struct UrnFigure {
    profile: &'static str,
    balls: u32,
    rounds: u64,
    rate: f64,
    init: Init,
}

fn urn_setup(name: FigureName) -> Option<UrnFigure> {
    match name {
        FigureName::Fig2Left => {
            Some(UrnFigure { profile: "condorcet-winner", balls: 50, rounds: 1000, rate: 0.02, init: Init::Uniform })
        }
        FigureName::Fig2Right => Some(UrnFigure {
            profile: "condorcet-cycle",
            balls: 5000,
            rounds: 500_000,
            rate: 0.04,
            init: Init::Degenerate(1),
        }),
        FigureName::Fig3 => Some(UrnFigure {
            profile: "cycle-with-loser",
            balls: 50_000,
            rounds: 10_000_000,
            rate: 0.01,
            init: Init::Uniform,
        }),
        FigureName::Fig4 => None,
    }
}

#[derive(Serialize)]
struct Artifact {
    file: PathBuf,
    summary: serde_json::Value,
}

#[derive(Serialize)]
struct FiguresReport {
    name: FigureName,
    artifacts: Vec<Artifact>,
}

fn figure_name(name: FigureName) -> &'static str {
    match name {
        FigureName::Fig2Left => "fig2-left",
        FigureName::Fig2Right => "fig2-right",
        FigureName::Fig3 => "fig3",
        FigureName::Fig4 => "fig4",
    }
}

fn num(v: &serde_json::Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

pub fn figures(ctx: &mut RunContext, g: &Global, a: &FiguresArgs) -> Result<()> {
    ctx.subcommand = "figures".into();
    if !(a.scale > 0.0 && a.scale <= 1.0) {
        return Err(Error::InvalidArgument(format!("--scale {} must lie in (0, 1]", a.scale)).into());
    }
    let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("figures"));
    ensure_dir(&dir)?;
    let name = figure_name(a.name);
    let artifacts = match urn_setup(a.name) {
        Some(fig) => {
            let rounds = ((fig.rounds as f64 * a.scale).round() as u64).max(1);
            let balls = ((fig.balls as f64 * a.scale).round() as u32).max(2);
            if rounds > a.max_rounds {
                return Err(ResourceGuard(format!(
                    "{name} needs {rounds} rounds, above --max-rounds {}; lower --scale",
                    a.max_rounds
                ))
                .into());
            }
            let text = catalog::text_by_name(fig.profile).expect("built-in profile");
            ctx.input_digest = Some(sha256_hex(text.as_bytes()));
            let profile = catalog::by_name(fig.profile).expect("built-in profile");
            let ml = lottery::maximal_lottery(&profile.margin_matrix())?.to_f64();
            let mut cfg = SimConfig::new(balls, fig.rate, rounds, g.seed);
            cfg.init = fig.init;
            cfg.stride = (rounds / TARGET_ROWS).max(1);
            let record = urn::run(&cfg, &Duels::from_majority(&profile.majority_matrix()))?;
            let file = dir.join(format!("{name}.csv"));
            ctx.write_artifact(&file, &trajectory_csv(&record, profile.d())?)?;
            let z = record.temporal_average.clone().unwrap_or_default();
            let summary = serde_json::json!({
                "profile": fig.profile,
                "balls": balls,
                "rounds": rounds,
                "rate": fig.rate,
                "maximal_lottery": ml,
                "temporal_average": z,
                "distance_to_ml": lottery::l1_distance(&z, &ml),
            });
            vec![Artifact { file, summary }]
        }
        None => {
            let profile = catalog::cycle_with_loser();
            ctx.input_digest = Some(sha256_hex(catalog::CYCLE_WITH_LOSER.as_bytes()));
            let mut out = Vec::new();
            for (side, rate) in [("left", 0.01), ("right", 0.0)] {
                let run = ode_table(&profile, rate, &ODE_START, ODE_T_END, mlurn::replicator::DEFAULT_STEP, ODE_EVERY)?;
                let file = dir.join(format!("{name}-{side}.csv"));
                ctx.write_artifact(&file, &csv_bytes(&run.header, run.rows.iter().cloned())?)?;
                let entropy: Vec<f64> = run.rows.iter().filter_map(|r| r.last()?.parse().ok()).collect();
                let tail = &entropy[entropy.len() / 2..];
                let summary = serde_json::json!({
                    "rate": rate,
                    "final_entropy_bits": entropy.last(),
                    "late_entropy_min": tail.iter().copied().fold(f64::INFINITY, f64::min),
                    "late_entropy_max": tail.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                });
                out.push(Artifact { file, summary });
            }
            out
        }
    };
    let report = FiguresReport { name: a.name, artifacts };
    ctx.emit(&report, || {
        let mut s = String::new();
        for art in &report.artifacts {
            s += &format!("wrote {}\n", art.file.display());
            let sm = &art.summary;
            if let Some(z) = sm.get("temporal_average").and_then(|z| serde_json::from_value::<Vec<f64>>(z.clone()).ok()) {
                s += &format!("  final temporal average {}, L1 distance to ML {:.4}\n", fmt_vec(&z), num(&sm["distance_to_ml"]));
            }
            if let Some(e) = sm.get("final_entropy_bits").and_then(|e| e.as_f64()) {
                s += &format!(
                    "  r = {}: final entropy {e:.3e} bits, second half in [{:.4e}, {:.4e}]\n",
                    sm["rate"],
                    num(&sm["late_entropy_min"]),
                    num(&sm["late_entropy_max"])
                );
            }
        }
        s
    })
}
