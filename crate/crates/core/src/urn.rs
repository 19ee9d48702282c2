//! Monte Carlo simulation of the urn process.
//!
//! Each round flips a coin with probability `1 − r` of a duel. A duel draws
//! two balls and asks a random voter which of the two labels they prefer; the
//! other ball is relabelled with the preferred label, which is the round's
//! winner. Otherwise one uniformly drawn ball is relabelled with a uniformly
//! drawn alternative and no winner is emitted.
//!
//! Voter judgments are sampled as a Bernoulli draw with success probability
//! `M(i, j)` instead of drawing a voter explicitly; both have the same law.
//!
//! All randomness comes from [`ChaCha8Rng`] seeded with
//! `ChaCha8Rng::seed_from_u64(seed)`, which produces the same stream on every
//! platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::lottery::{l1_distance, margin_payoffs};
use crate::prefs::{MajorityMatrix, MarginMatrix};
use crate::{Error, Result};

/// Duel outcome probabilities, row-major `f64` copy of the majority matrix.
#[derive(Clone, Debug)]
pub struct Duels {
    d: usize,
    majority: Vec<f64>,
}

impl Duels {
    pub fn from_majority(m: &MajorityMatrix) -> Self {
        Self { d: m.d(), majority: m.to_f64() }
    }

    /// Assumes no voter abstains, so `M = (M̃ + 1) / 2` off the diagonal.
    pub fn from_margins(m: &MarginMatrix) -> Self {
        Self::from_majority(&m.complete_majority())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Fraction of voters preferring `i` to `j`.
    pub fn prefer(&self, i: usize, j: usize) -> f64 {
        self.majority[i * self.d + j]
    }
}

/// Ball counts per alternative.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct UrnState {
    counts: Vec<u32>,
    balls: u32,
}

impl UrnState {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        let balls: u32 = counts.iter().sum();
        if counts.is_empty() || balls == 0 {
            return Err(Error::InvalidArgument("urn must contain at least one ball".into()));
        }
        Ok(Self { counts, balls })
    }

    /// `N` balls spread as evenly as possible; leftovers go to the lowest labels.
    pub fn uniform(d: usize, balls: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("d must be at least 1".into()));
        }
        let base = balls / d as u32;
        let extra = (balls % d as u32) as usize;
        Self::new((0..d).map(|i| base + u32::from(i < extra)).collect())
    }

    pub fn degenerate(d: usize, balls: u32, alt: usize) -> Result<Self> {
        if alt >= d {
            return Err(Error::InvalidArgument(format!("alternative {} out of range", alt + 1)));
        }
        let mut counts = vec![0; d];
        counts[alt] = balls;
        Self::new(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn balls(&self) -> u32 {
        self.balls
    }

    pub fn d(&self) -> usize {
        self.counts.len()
    }

    pub fn lottery(&self) -> Vec<f64> {
        let n = f64::from(self.balls);
        self.counts.iter().map(|&c| f64::from(c) / n).collect()
    }

    pub fn is_degenerate(&self) -> bool {
        self.counts.contains(&self.balls)
    }

    /// Label of the ball at position `pos` in label order, skipping `skip`
    /// (one ball already taken out of that label).
    fn label_at(&self, mut pos: u32, skip: Option<usize>) -> usize {
        for (label, &c) in self.counts.iter().enumerate() {
            let c = c - u32::from(skip == Some(label));
            if pos < c {
                return label;
            }
            pos -= c;
        }
        unreachable!("ball position beyond urn size")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    WithReplacement,
    WithoutReplacement,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    Uniform,
    Degenerate(usize),
    Counts(Vec<u32>),
}

/// What happened in one round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    /// Duel between two balls; `None` when the sampled voter had no preference.
    Duel { winner: Option<usize> },
    Mutation,
}

/// Advances the urn by one round and reports what happened.
pub fn step<R: Rng + ?Sized>(state: &mut UrnState, duels: &Duels, rate: f64, sampling: Sampling, rng: &mut R) -> Round {
    let n = state.balls;
    if rng.random::<f64>() < rate {
        let from = state.label_at(rng.random_range(0..n), None);
        let to = rng.random_range(0..state.d());
        state.counts[from] -= 1;
        state.counts[to] += 1;
        return Round::Mutation;
    }
    let first = state.label_at(rng.random_range(0..n), None);
    let second = match sampling {
        Sampling::WithReplacement => state.label_at(rng.random_range(0..n), None),
        Sampling::WithoutReplacement => state.label_at(rng.random_range(0..n - 1), Some(first)),
    };
    if first == second {
        return Round::Duel { winner: Some(first) };
    }
    let u = rng.random::<f64>();
    let first_wins = duels.prefer(first, second);
    let winner = if u < first_wins {
        Some((first, second))
    } else if u < first_wins + duels.prefer(second, first) {
        Some((second, first))
    } else {
        None
    };
    match winner {
        Some((w, l)) => {
            state.counts[l] -= 1;
            state.counts[w] += 1;
            Round::Duel { winner: Some(w) }
        }
        None => Round::Duel { winner: None },
    }
}

/// Probability that each alternative wins the duel of a round in state `p`,
/// `w_i = p_i (1 + (M̃ p)_i)`.
pub fn winner_distribution(p: &[f64], margins: &[f64]) -> Vec<f64> {
    let mp = margin_payoffs(margins, p);
    let w: Vec<f64> = p.iter().zip(&mp).map(|(pi, x)| pi * (1.0 + x)).collect();
    debug_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    w
}

/// Open L1 ball whose sojourn fraction is tracked during a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SojournQuery {
    pub center: Vec<f64>,
    pub delta: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimConfig {
    pub balls: u32,
    pub rate: f64,
    pub rounds: u64,
    pub seed: u64,
    pub init: Init,
    pub sampling: Sampling,
    /// Winners are drawn only in rounds whose index is a multiple of this.
    pub winner_period: u64,
    /// Keep every `stride`-th state in the trajectory (the final state is always kept).
    pub stride: u64,
    pub sojourn: Vec<SojournQuery>,
}

impl SimConfig {
    pub fn new(balls: u32, rate: f64, rounds: u64, seed: u64) -> Self {
        Self {
            balls,
            rate,
            rounds,
            seed,
            init: Init::Uniform,
            sampling: Sampling::WithReplacement,
            winner_period: 1,
            stride: 1,
            sojourn: Vec::new(),
        }
    }

    pub fn initial_state(&self, d: usize) -> Result<UrnState> {
        match &self.init {
            Init::Uniform => UrnState::uniform(d, self.balls),
            Init::Degenerate(i) => UrnState::degenerate(d, self.balls, *i),
            Init::Counts(c) => {
                if c.len() != d {
                    return Err(Error::DimensionMismatch { expected: d, found: c.len() });
                }
                let s = UrnState::new(c.clone())?;
                if s.balls != self.balls {
                    return Err(Error::InvalidArgument(format!(
                        "initial counts hold {} balls, configuration says {}",
                        s.balls, self.balls
                    )));
                }
                Ok(s)
            }
        }
    }

    fn validate(&self, d: usize) -> Result<UrnState> {
        if !(0.0..=1.0).contains(&self.rate) {
            return Err(Error::InvalidArgument(format!("mutation rate {} outside [0, 1]", self.rate)));
        }
        if self.balls == 0 {
            return Err(Error::InvalidArgument("urn needs at least one ball".into()));
        }
        if self.sampling == Sampling::WithoutReplacement && self.balls < 2 {
            return Err(Error::InvalidArgument("sampling without replacement needs two balls".into()));
        }
        if self.winner_period == 0 || self.stride == 0 {
            return Err(Error::InvalidArgument("winner period and stride must be positive".into()));
        }
        for q in &self.sojourn {
            if q.center.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: q.center.len() });
            }
        }
        self.initial_state(d)
    }
}

/// One kept row of a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Snapshot {
    pub round: u64,
    pub counts: Vec<u32>,
    pub winner: Option<usize>,
    /// Temporal average of the states before this round; `None` at round 0.
    pub temporal_average: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub rounds: u64,
    pub balls: u32,
    pub trajectory: Vec<Snapshot>,
    pub final_state: UrnState,
    /// `Z(n) = (1/n) Σ_{k<n} X(k)`; `None` when no round was played.
    pub temporal_average: Option<Vec<f64>>,
    /// Fraction of rounds `1..=n` spent in each configured ball.
    pub sojourn: Vec<(SojournQuery, f64)>,
    pub winner_counts: Vec<u64>,
    pub empirical_winner_dist: Option<Vec<f64>>,
}

impl RunRecord {
    pub fn winners(&self) -> impl Iterator<Item = (u64, usize)> + '_ {
        self.trajectory.iter().filter_map(|s| s.winner.map(|w| (s.round, w)))
    }
}

struct Accumulator {
    sums: Vec<u64>,
    inside: Vec<u64>,
    winners: Vec<u64>,
}

/// Simulates `cfg.rounds` rounds. Deterministic given the configuration.
pub fn run(cfg: &SimConfig, duels: &Duels) -> Result<RunRecord> {
    run_with(cfg, duels, |_, _| {})
}

/// Like [`run`], calling `observe(round, state)` after every round.
pub fn run_with(cfg: &SimConfig, duels: &Duels, mut observe: impl FnMut(u64, &UrnState)) -> Result<RunRecord> {
    let d = duels.d();
    let mut state = cfg.validate(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = f64::from(cfg.balls);
    let mut acc = Accumulator { sums: vec![0; d], inside: vec![0; cfg.sojourn.len()], winners: vec![0; d] };
    let average = |sums: &[u64], rounds: u64| -> Vec<f64> {
        sums.iter().map(|&s| s as f64 / (rounds as f64 * n)).collect()
    };
    let mut trajectory = vec![Snapshot { round: 0, counts: state.counts.clone(), winner: None, temporal_average: None }];
    for round in 1..=cfg.rounds {
        for (s, &c) in acc.sums.iter_mut().zip(&state.counts) {
            *s += u64::from(c);
        }
        let outcome = step(&mut state, duels, cfg.rate, cfg.sampling, &mut rng);
        let winner = match outcome {
            Round::Duel { winner: Some(w) } if round % cfg.winner_period == 0 => Some(w),
            _ => None,
        };
        if let Some(w) = winner {
            acc.winners[w] += 1;
        }
        if !cfg.sojourn.is_empty() {
            let p = state.lottery();
            for (hits, q) in acc.inside.iter_mut().zip(&cfg.sojourn) {
                if l1_distance(&p, &q.center) < q.delta {
                    *hits += 1;
                }
            }
        }
        observe(round, &state);
        if round % cfg.stride == 0 || round == cfg.rounds {
            trajectory.push(Snapshot {
                round,
                counts: state.counts.clone(),
                winner,
                temporal_average: Some(average(&acc.sums, round)),
            });
        }
    }
    let total_winners: u64 = acc.winners.iter().sum();
    Ok(RunRecord {
        rounds: cfg.rounds,
        balls: cfg.balls,
        trajectory,
        final_state: state,
        temporal_average: (cfg.rounds > 0).then(|| average(&acc.sums, cfg.rounds)),
        sojourn: cfg
            .sojourn
            .iter()
            .zip(&acc.inside)
            .map(|(q, &hits)| (q.clone(), if cfg.rounds == 0 { 0.0 } else { hits as f64 / cfg.rounds as f64 }))
            .collect(),
        empirical_winner_dist: (total_winners > 0)
            .then(|| acc.winners.iter().map(|&w| w as f64 / total_winners as f64).collect()),
        winner_counts: acc.winners,
    })
}

/// Runs one chain per seed in parallel.
pub fn run_many(cfg: &SimConfig, duels: &Duels, seeds: &[u64]) -> Result<Vec<RunRecord>> {
    seeds
        .par_iter()
        .map(|&seed| run(&SimConfig { seed, ..cfg.clone() }, duels))
        .collect()
}

/// Fraction of rounds `1..=n` the chain spent in the open L1 ball of radius
/// `delta` around `center`.
///
/// Uses the counter tracked during the run when the ball was configured;
/// otherwise falls back to the trajectory, which requires `stride = 1`.
pub fn sojourn_fraction(record: &RunRecord, center: &[f64], delta: f64) -> Result<f64> {
    if record.rounds == 0 {
        return Err(Error::InvalidArgument("empty run record".into()));
    }
    if let Some((_, frac)) = record.sojourn.iter().find(|(q, _)| q.center == center && q.delta == delta) {
        return Ok(*frac);
    }
    if record.trajectory.len() as u64 != record.rounds + 1 {
        return Err(Error::InvalidArgument(
            "ball was not tracked during the run and the trajectory is strided".into(),
        ));
    }
    let n = f64::from(record.balls);
    let hits = record.trajectory[1..]
        .iter()
        .filter(|s| {
            let p: Vec<f64> = s.counts.iter().map(|&c| f64::from(c) / n).collect();
            l1_distance(&p, center) < delta
        })
        .count();
    Ok(hits as f64 / record.rounds as f64)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationRow {
    pub rounds: u64,
    pub failures: usize,
    pub frequency: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationTable {
    /// Value the sojourn fractions are compared against.
    pub reference: f64,
    pub runs: usize,
    pub epsilon: f64,
    pub rows: Vec<ConcentrationRow>,
}

/// Seed of the `run`-th independent chain in multi-run experiments.
pub fn run_seed(base: u64, run: usize) -> u64 {
    base.wrapping_add(run as u64)
}

/// For each round count `n`, the fraction of independent runs whose sojourn
/// fraction in `B_δ(center)` after `n` rounds deviates from `reference` by
/// more than `epsilon`. Without a reference, the mean over runs at the
/// largest `n` is used. Each run is one chain read at every `n` in the grid.
#[allow(clippy::too_many_arguments)]
pub fn concentration_experiment(
    cfg: &SimConfig,
    duels: &Duels,
    center: &[f64],
    delta: f64,
    epsilon: f64,
    n_grid: &[u64],
    runs: usize,
    reference: Option<f64>,
) -> Result<ConcentrationTable> {
    if runs < 30 {
        return Err(Error::InvalidArgument(format!("need at least 30 runs, got {runs}")));
    }
    if n_grid.is_empty() || n_grid.contains(&0) {
        return Err(Error::InvalidArgument("round grid must be nonempty and positive".into()));
    }
    let horizon = *n_grid.iter().max().expect("nonempty");
    let base = SimConfig {
        rounds: horizon,
        stride: horizon,
        sojourn: vec![SojournQuery { center: center.to_vec(), delta }],
        ..cfg.clone()
    };
    let fractions: Vec<Vec<f64>> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let cfg = SimConfig { seed: run_seed(cfg.seed, r), ..base.clone() };
            let mut hits = 0u64;
            let mut at = Vec::with_capacity(n_grid.len());
            let mut sorted: Vec<(usize, u64)> = n_grid.iter().copied().enumerate().collect();
            sorted.sort_by_key(|&(_, n)| n);
            let mut next = 0;
            let mut out = vec![0.0; n_grid.len()];
            run_with(&cfg, duels, |round, state| {
                if l1_distance(&state.lottery(), center) < delta {
                    hits += 1;
                }
                while next < sorted.len() && sorted[next].1 == round {
                    at.push((sorted[next].0, hits as f64 / round as f64));
                    next += 1;
                }
            })?;
            for (slot, frac) in at {
                out[slot] = frac;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let reference = reference.unwrap_or_else(|| {
        let last = n_grid.iter().position(|&n| n == horizon).expect("horizon in grid");
        fractions.iter().map(|f| f[last]).sum::<f64>() / runs as f64
    });
    let rows = n_grid
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let failures = fractions.iter().filter(|f| (f[k] - reference).abs() > epsilon).count();
            ConcentrationRow { rounds: n, failures, frequency: failures as f64 / runs as f64 }
        })
        .collect();
    Ok(ConcentrationTable { reference, runs, epsilon, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::prefs::parse_profile;
    use crate::{rational, Rational};

    fn cw() -> (Duels, Vec<f64>) {
        let p = catalog::condorcet_winner();
        (Duels::from_majority(&p.majority_matrix()), p.margin_matrix().to_f64())
    }

    /// Enumerates ordered ball pairs and duel outcomes exactly.
    fn winner_oracle(p: &[Rational], m: &MajorityMatrix) -> Vec<Rational> {
        let d = p.len();
        let mut w = vec![rational(0, 1); d];
        for i in 0..d {
            for j in 0..d {
                let pair = &p[i] * &p[j];
                if i == j {
                    w[i] += pair;
                } else {
                    w[i] += &pair * m.get(i, j);
                    w[j] += &pair * m.get(j, i);
                }
            }
        }
        w
    }

    #[test]
    fn winner_formula_matches_enumeration() {
        let profile = catalog::condorcet_winner();
        let p = [rational(1, 2), rational(1, 2), rational(0, 1)];
        let oracle = winner_oracle(&p, &profile.majority_matrix());
        assert_eq!(oracle, vec![rational(7, 12), rational(5, 12), rational(0, 1)]);
        let w = winner_distribution(&[0.5, 0.5, 0.0], &profile.margin_matrix().to_f64());
        assert!((w[0] - 7.0 / 12.0).abs() < 1e-15 && (w[1] - 5.0 / 12.0).abs() < 1e-15 && w[2] == 0.0);
    }

    #[test]
    fn winner_formula_fixed_points() {
        let cyc = catalog::condorcet_cycle().margin_matrix().to_f64();
        let u = [1.0 / 3.0; 3];
        let w = winner_distribution(&u, &cyc);
        assert!(w.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        let (_, m) = cw();
        assert_eq!(winner_distribution(&[1.0, 0.0, 0.0], &m), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_rate_degenerate_state_is_absorbing() {
        let (duels, _) = cw();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut s = UrnState::degenerate(3, 20, 1).unwrap();
        for _ in 0..1000 {
            assert_eq!(step(&mut s, &duels, 0.0, Sampling::WithReplacement, &mut rng), Round::Duel { winner: Some(1) });
        }
        assert_eq!(s.counts(), &[0, 20, 0]);
    }

    #[test]
    fn pure_mutation_two_alternatives() {
        let duels = Duels::from_majority(&parse_profile("d=2\n1: 1 2").unwrap().majority_matrix());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trials = 200_000;
        let mut up = 0;
        for _ in 0..trials {
            let mut s = UrnState::new(vec![5, 5]).unwrap();
            assert_eq!(step(&mut s, &duels, 1.0, Sampling::WithReplacement, &mut rng), Round::Mutation);
            if s.counts() == [6, 4] {
                up += 1;
            }
        }
        let freq = up as f64 / trials as f64;
        let sigma = (0.25f64 * 0.75 / trials as f64).sqrt();
        assert!((freq - 0.25).abs() < 4.0 * sigma, "{freq}");
    }

    #[test]
    fn ball_conservation_and_single_relabel() {
        let (duels, _) = cw();
        for sampling in [Sampling::WithReplacement, Sampling::WithoutReplacement] {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let mut s = UrnState::uniform(3, 7).unwrap();
            for _ in 0..10_000 {
                let before = s.clone();
                step(&mut s, &duels, 0.3, sampling, &mut rng);
                assert_eq!(s.counts().iter().sum::<u32>(), 7);
                let moved: u32 = before.counts().iter().zip(s.counts()).map(|(a, b)| a.abs_diff(*b)).sum();
                assert!(moved == 0 || moved == 2);
            }
        }
    }

    #[test]
    fn without_replacement_never_self_duels_on_singletons() {
        // One ball of each label: drawing without replacement always gives distinct labels.
        let duels = Duels::from_margins(&catalog::condorcet_cycle().margin_matrix());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..2000 {
            let mut s = UrnState::new(vec![1, 1, 1]).unwrap();
            step(&mut s, &duels, 0.0, Sampling::WithoutReplacement, &mut rng);
            assert!(s.counts().contains(&2), "{:?}", s.counts());
        }
    }

    #[test]
    fn abstentions_produce_no_winner() {
        let duels = Duels::from_majority(&parse_profile("d=2\n1: pairs").unwrap().majority_matrix());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = UrnState::new(vec![1, 1]).unwrap();
        for _ in 0..100 {
            match step(&mut s, &duels, 0.0, Sampling::WithoutReplacement, &mut rng) {
                Round::Duel { winner } => assert_eq!(winner, None),
                Round::Mutation => unreachable!(),
            }
        }
    }

    #[test]
    fn zero_rounds() {
        let (duels, _) = cw();
        let rec = run(&SimConfig::new(10, 0.1, 0, 1), &duels).unwrap();
        assert_eq!(rec.trajectory.len(), 1);
        assert_eq!(rec.trajectory[0].counts, vec![4, 3, 3]);
        assert!(rec.temporal_average.is_none());
        assert!(rec.empirical_winner_dist.is_none());
        assert!(sojourn_fraction(&rec, &[1.0, 0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn zero_rate_absorbs() {
        let duels = Duels::from_majority(&parse_profile("d=2\n2: 1 2\n1: 2 1").unwrap().majority_matrix());
        let mut cfg = SimConfig::new(10, 0.0, 100_000, 17);
        cfg.stride = 1;
        let rec = run(&cfg, &duels).unwrap();
        let absorbed = rec.trajectory.iter().position(|s| s.counts.contains(&10)).expect("absorbed");
        let frozen = &rec.trajectory[absorbed].counts;
        assert!(rec.trajectory[absorbed..].iter().all(|s| &s.counts == frozen));
    }

    #[test]
    fn sojourn_edge_cases() {
        let (duels, _) = cw();
        let mut cfg = SimConfig::new(12, 0.1, 500, 4);
        cfg.init = Init::Degenerate(0);
        let rec = run(&cfg, &duels).unwrap();
        assert_eq!(sojourn_fraction(&rec, &[1.0, 0.0, 0.0], 3.0).unwrap(), 1.0);
        assert_eq!(sojourn_fraction(&rec, &[1.0, 0.0, 0.0], 0.0).unwrap(), 0.0);
        cfg.sojourn = vec![SojournQuery { center: vec![1.0, 0.0, 0.0], delta: 0.5 }];
        cfg.stride = 50;
        let tracked = run(&cfg, &duels).unwrap();
        assert_eq!(
            sojourn_fraction(&tracked, &[1.0, 0.0, 0.0], 0.5).unwrap(),
            sojourn_fraction(&rec, &[1.0, 0.0, 0.0], 0.5).unwrap()
        );
        assert!(sojourn_fraction(&tracked, &[1.0, 0.0, 0.0], 0.4).is_err());
    }

    #[test]
    fn deterministic_and_stride_independent_statistics() {
        let (duels, _) = cw();
        let mut cfg = SimConfig::new(30, 0.05, 5_000, 99);
        cfg.sojourn = vec![SojournQuery { center: vec![1.0, 0.0, 0.0], delta: 0.3 }];
        let a = run(&cfg, &duels).unwrap();
        let b = run(&cfg, &duels).unwrap();
        assert_eq!(a, b);
        cfg.stride = 333;
        let c = run(&cfg, &duels).unwrap();
        assert_eq!(a.temporal_average, c.temporal_average);
        assert_eq!(a.sojourn, c.sojourn);
        assert_eq!(a.final_state, c.final_state);
        assert_eq!(c.trajectory.last().unwrap().round, 5_000);
        let z = a.temporal_average.unwrap();
        assert!((z.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let w = a.empirical_winner_dist.unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn winner_period_thins_winners() {
        let (duels, _) = cw();
        let mut cfg = SimConfig::new(30, 0.0, 1_000, 2);
        cfg.winner_period = 10;
        let rec = run(&cfg, &duels).unwrap();
        assert_eq!(rec.winner_counts.iter().sum::<u64>(), 100);
        assert!(rec.winners().all(|(round, _)| round % 10 == 0));
    }

    #[test]
    fn config_validation() {
        let (duels, _) = cw();
        let mut cfg = SimConfig::new(10, 1.5, 10, 0);
        assert!(run(&cfg, &duels).is_err());
        cfg.rate = 0.1;
        cfg.init = Init::Degenerate(3);
        assert!(run(&cfg, &duels).is_err());
        cfg.init = Init::Counts(vec![5, 5]);
        assert!(run(&cfg, &duels).is_err());
        cfg.init = Init::Counts(vec![5, 4, 0]);
        assert!(run(&cfg, &duels).is_err());
        cfg.init = Init::Counts(vec![5, 5, 0]);
        assert!(run(&cfg, &duels).is_ok());
    }

    #[test]
    fn concentration_determinism_and_whole_simplex() {
        let duels = Duels::from_margins(&catalog::condorcet_cycle().margin_matrix());
        let cfg = SimConfig::new(20, 0.05, 0, 8);
        let u = [1.0 / 3.0; 3];
        let t = concentration_experiment(&cfg, &duels, &u, 0.3, 0.1, &[200, 200], 30, None).unwrap();
        assert_eq!(t.rows[0].failures, t.rows[1].failures);
        let t = concentration_experiment(&cfg, &duels, &u, 3.0, 0.1, &[50, 100, 200], 30, None).unwrap();
        assert_eq!(t.reference, 1.0);
        assert!(t.rows.iter().all(|r| r.failures == 0));
        assert!(concentration_experiment(&cfg, &duels, &u, 0.3, 0.1, &[10], 29, None).is_err());
    }
}
