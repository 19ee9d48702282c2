use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn mlurn(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlurn")).args(args).current_dir(dir).output().expect("binary runs")
}

fn json(args: &[&str], dir: &Path) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = mlurn(&all, dir);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn last_row(csv: &str) -> Vec<String> {
    csv.lines().last().unwrap().split(',').map(String::from).collect()
}

#[test]
fn solve_reports_exact_lottery() {
    let tmp = tempfile::tempdir().unwrap();
    let v = json(&["--profile", "cycle-with-loser", "solve"], tmp.path());
    assert_eq!(v["result"]["lottery"], serde_json::json!(["1/3", "1/6", "1/2", "0"]));
    assert_eq!(v["result"]["uniqueness"], "unique");
    assert_eq!(v["manifest"]["subcommand"], "solve");
}

#[test]
fn profile_file_digest_lands_in_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "d=3\n2: 1 2 3\n1: 2 3 1\n";
    std::fs::write(tmp.path().join("p.txt"), text).unwrap();
    let out = mlurn(&["--profile", "p.txt", "--out", "ml.json", "solve"], tmp.path());
    assert_eq!(code(&out), 0);
    let manifest: Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("ml.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["input_digest"], hex::encode(Sha256::digest(text.as_bytes())));
    let result: Value = serde_json::from_slice(&std::fs::read(tmp.path().join("ml.json")).unwrap()).unwrap();
    assert_eq!(result["condorcet_winner"], 1);
}

#[test]
fn replay_reproduces_csv_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "--profile", "condorcet-cycle", "--seed", "9", "--out", "run.csv", "simulate", "--balls", "60", "--mutation",
        "1/25", "--rounds", "5000", "--stride", "10",
    ];
    assert_eq!(code(&mlurn(&args, tmp.path())), 0);
    let first = std::fs::read(tmp.path().join("run.csv")).unwrap();
    let manifest: Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("run.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["output_digest"], hex::encode(Sha256::digest(&first)));
    assert_eq!(manifest["seed"], 9);

    std::fs::remove_file(tmp.path().join("run.csv")).unwrap();
    assert_eq!(code(&mlurn(&["replay", "run.csv.manifest.json"], tmp.path())), 0);
    assert_eq!(std::fs::read(tmp.path().join("run.csv")).unwrap(), first);

    let other = mlurn(&["--seed", "10", "--out", "b.csv", "--profile", "condorcet-cycle", "simulate", "--balls", "60", "--mutation", "1/25", "--rounds", "5000", "--stride", "10"], tmp.path());
    assert_eq!(code(&other), 0);
    assert_ne!(std::fs::read(tmp.path().join("b.csv")).unwrap(), first);
}

#[test]
fn simulate_trajectory_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mlurn(
        &["--profile", "condorcet-winner", "--out", "t.csv", "simulate", "--balls", "20", "--mutation", "0.1", "--rounds", "100", "--init", "counts:5,5,10"],
        tmp.path(),
    );
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(tmp.path().join("t.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "round,n_1,n_2,n_3,winner,z_1,z_2,z_3");
    assert_eq!(csv.lines().nth(1).unwrap(), "0,5,5,10,,,,");
    assert_eq!(csv.lines().count(), 102);
    let row = last_row(&csv);
    let counts: u32 = row[1..4].iter().map(|c| c.parse::<u32>().unwrap()).sum();
    assert_eq!(counts, 20);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path();
    std::fs::write(p.join("bad.txt"), "d=3\n1: 1 1 2\n").unwrap();
    assert_eq!(code(&mlurn(&["solve"], p)), 2, "missing profile");
    assert_eq!(code(&mlurn(&["--profile", "bad.txt", "solve"], p)), 2, "malformed profile");
    assert_eq!(code(&mlurn(&["--profile", "nope.txt", "solve"], p)), 2, "missing file");
    assert_eq!(code(&mlurn(&["--profile", "condorcet-cycle", "bounds", "--delta", "0.1", "--tau", "0.1"], p)), 2);
    assert_eq!(code(&mlurn(&["--profile", "condorcet-winner", "stationary", "--balls", "10", "--mutation", "0"], p)), 2);
    assert_eq!(code(&mlurn(&["--profile", "condorcet-winner", "simulate", "--balls", "10", "--mutation", "2", "--rounds", "5"], p)), 2);
    assert_eq!(
        code(&mlurn(&["--profile", "condorcet-winner", "stationary", "--balls", "2000", "--mutation", "0.1"], p)),
        3,
        "state cap"
    );
    assert_eq!(
        code(&mlurn(
            &["--profile", "condorcet-winner", "--out", "x.csv", "simulate", "--balls", "10", "--mutation", "0.1", "--rounds", "1000", "--max-rows", "10"],
            p
        )),
        3,
        "row guard"
    );
    assert_eq!(code(&mlurn(&["--out", "figs", "figures", "fig3", "--max-rounds", "1000"], p)), 3);
}

#[test]
fn unknown_figure_lists_valid_names() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mlurn(&["figures", "fig9"], tmp.path());
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    for name in ["fig2-left", "fig2-right", "fig3", "fig4"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn fig2_right_temporal_average_near_uniform() {
    let tmp = tempfile::tempdir().unwrap();
    let v = json(&["--seed", "1", "--out", "figs", "figures", "fig2-right"], tmp.path());
    let summary = &v["result"]["artifacts"][0]["summary"];
    assert!(summary["distance_to_ml"].as_f64().unwrap() < 0.05, "{summary}");
    let csv = std::fs::read_to_string(tmp.path().join("figs/fig2-right.csv")).unwrap();
    // The first kept row starts from the degenerate urn on alternative 2.
    assert_eq!(csv.lines().nth(1).unwrap(), "0,0,5000,0,,,,");
    let z: Vec<f64> = last_row(&csv)[5..8].iter().map(|x| x.parse().unwrap()).collect();
    let dist: f64 = z.iter().map(|x| (x - 1.0 / 3.0).abs()).sum();
    assert!(dist < 0.05, "{z:?}");
    assert!(tmp.path().join("figs/fig2-right.csv.manifest.json").exists());
}

fn entropy_column(path: &Path) -> Vec<(f64, f64)> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f.last().unwrap().parse().unwrap())
        })
        .collect()
}

#[test]
fn fig4_entropy_converges_only_with_mutation() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&mlurn(&["--out", "figs", "figures", "fig4"], tmp.path())), 0);
    let left = entropy_column(&tmp.path().join("figs/fig4-left.csv"));
    assert!(left.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12));
    assert!(left.last().unwrap().1 < 1e-6);
    let right = entropy_column(&tmp.path().join("figs/fig4-right.csv"));
    let late: Vec<f64> = right.iter().filter(|(t, _)| *t >= 50.0).map(|(_, e)| *e).collect();
    let (lo, hi) = late.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    assert!(lo > 1e-3, "entropy should not vanish without mutation");
    assert!(hi - lo < 1e-3 * lo, "band [{lo}, {hi}]");
}

#[test]
fn bounds_text_labels_heuristic() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mlurn(&["--profile", "condorcet-winner", "bounds", "--delta", "1/5", "--tau", "1/10"], tmp.path());
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("N_min = 70"), "{text}");
    assert!(text.contains("heuristic (not certified)"));
    assert!(text.contains("NOT met"), "side condition at N = 70 fails");
}

#[test]
fn fixedpoint_schedule_approaches_ml() {
    let tmp = tempfile::tempdir().unwrap();
    let v = json(&["--profile", "cycle-with-loser", "fixedpoint", "--schedule", "0.1,0.01,0.001"], tmp.path());
    let d: Vec<f64> =
        v["result"]["distances_to_ml"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    assert!(d[2] < 0.01);
}

#[test]
fn axioms_suites_pass_for_perturbed_rule() {
    let tmp = tempfile::tempdir().unwrap();
    let v = json(&["--jobs", "2", "axioms", "--suite", "population", "--samples", "40"], tmp.path());
    assert_eq!(v["result"]["summary"]["passed"], true);
    let v = json(&["axioms", "--suite", "condorcet", "--samples", "40", "--alternatives", "4"], tmp.path());
    assert_eq!(v["result"]["passed"], true);
}

#[test]
fn levelsets_csv_has_every_level() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mlurn(&["--profile", "condorcet-winner", "--out", "l.csv", "levelsets", "--balls", "40", "--mutation", "0.02"], tmp.path());
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(tmp.path().join("l.csv")).unwrap();
    assert_eq!(csv.lines().count(), 42);
    let total: f64 = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}
