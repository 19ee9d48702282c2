//! Approximate axioms for rules that approximate maximal lotteries.
//!
//! A rule is single-valued here, so "the outcomes at `R′` and `R″` intersect"
//! is read as "the two outputs are within `2δ` in L1", where `δ` is the rule's
//! declared approximation radius. Sampled profiles have an odd number of
//! voters with strict rankings, which makes the maximal lottery unique; only
//! that regime is checked.

use std::collections::BTreeMap;
use std::hash::{DefaultHasher, Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::alpha_of;
use crate::lottery::{l1_distance, maximal_lottery, Uniqueness};
use crate::prefs::{FractionalProfile, PreferenceRelation, Profile};
use crate::urn::{self, Duels, SimConfig};
use crate::{rational, Error, Rational, Result};

/// A procedure mapping profiles to lotteries, declared to stay within `δ`
/// (L1) of the maximal lottery.
pub trait ApproxRule: Sync {
    fn name(&self) -> String;

    fn delta(&self) -> f64;

    fn apply(&self, profile: &FractionalProfile) -> Result<Vec<f64>>;
}

fn unique_ml(profile: &FractionalProfile) -> Result<Vec<f64>> {
    let ml = maximal_lottery(&profile.margin_matrix())?;
    if ml.uniqueness != Uniqueness::Unique {
        return Err(Error::InvalidProfile("maximal lottery is not unique".into()));
    }
    Ok(ml.to_f64())
}

/// The exact maximal lottery.
pub struct ExactMl;

impl ApproxRule for ExactMl {
    fn name(&self) -> String {
        "exact".into()
    }

    fn delta(&self) -> f64 {
        0.0
    }

    fn apply(&self, profile: &FractionalProfile) -> Result<Vec<f64>> {
        unique_ml(profile)
    }
}

/// The maximal lottery moved towards a pseudo-random lottery by less than
/// `δ`; the move is a deterministic function of the profile and the seed.
pub struct Perturbed {
    pub delta: f64,
    pub seed: u64,
}

impl ApproxRule for Perturbed {
    fn name(&self) -> String {
        format!("perturbed(δ={})", self.delta)
    }

    fn delta(&self) -> f64 {
        self.delta
    }

    fn apply(&self, profile: &FractionalProfile) -> Result<Vec<f64>> {
        let ml = unique_ml(profile)?;
        let mut h = DefaultHasher::new();
        self.seed.hash(&mut h);
        profile.to_string().hash(&mut h);
        let mut rng = ChaCha8Rng::seed_from_u64(h.finish());
        let target = crate::replicator::random_interior(ml.len(), &mut rng);
        // |(1−t)p + tq − p|₁ = t|q − p|₁ ≤ 2t < δ
        let t = rng.random::<f64>() * self.delta / 2.0;
        Ok(ml.iter().zip(&target).map(|(p, q)| (1.0 - t) * p + t * q).collect())
    }
}

/// Always returns the same lottery.
pub struct Constant(pub Vec<f64>);

impl ApproxRule for Constant {
    fn name(&self) -> String {
        format!("constant{:?}", self.0)
    }

    fn delta(&self) -> f64 {
        2.0
    }

    fn apply(&self, profile: &FractionalProfile) -> Result<Vec<f64>> {
        if profile.d() != self.0.len() {
            return Err(Error::DimensionMismatch { expected: self.0.len(), found: profile.d() });
        }
        Ok(self.0.clone())
    }
}

/// Temporal average of one urn run on the profile's majority matrix.
pub struct TemporalAverage {
    pub balls: u32,
    pub rate: f64,
    pub rounds: u64,
    pub seed: u64,
    pub delta: f64,
}

impl ApproxRule for TemporalAverage {
    fn name(&self) -> String {
        format!("urn(N={}, r={}, n={})", self.balls, self.rate, self.rounds)
    }

    fn delta(&self) -> f64 {
        self.delta
    }

    fn apply(&self, profile: &FractionalProfile) -> Result<Vec<f64>> {
        let duels = Duels::from_majority(&profile.majority_matrix());
        let mut cfg = SimConfig::new(self.balls, self.rate, self.rounds, self.seed);
        cfg.stride = self.rounds.max(1);
        urn::run(&cfg, &duels)?
            .temporal_average
            .ok_or_else(|| Error::InvalidArgument("temporal average needs at least one round".into()))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub rule: String,
    #[serde(skip)]
    pub profiles: [FractionalProfile; 3],
    /// Outputs at `R′`, `R″` and `½R′ + ½R″`.
    pub outputs: [Vec<f64>; 3],
    pub epsilon: f64,
    pub delta: f64,
    /// Whether the outputs at `R′` and `R″` are within `2δ`.
    pub antecedent: bool,
    /// Largest distance from an endpoint output to the mixture's output.
    pub witness: f64,
    /// Whether each output lies within `δ` of the maximal lottery (exact rule: equal to it).
    pub within_delta: [bool; 3],
    pub passed: bool,
}

/// Checks `ψ(R′) ≈ ψ(R″) ⇒ ψ(R′), ψ(R″) ∈ B_ε(ψ(½R′ + ½R″))` for one pair.
pub fn check_population_consistency(
    rule: &dyn ApproxRule,
    r1: &FractionalProfile,
    r2: &FractionalProfile,
    epsilon: f64,
) -> Result<ConsistencyReport> {
    if r1.d() != r2.d() {
        return Err(Error::DimensionMismatch { expected: r1.d(), found: r2.d() });
    }
    let mixed = r1.mix(r2, &rational(1, 2))?;
    let profiles = [r1.clone(), r2.clone(), mixed];
    let outputs = [rule.apply(&profiles[0])?, rule.apply(&profiles[1])?, rule.apply(&profiles[2])?];
    let delta = rule.delta();
    let mut within_delta = [false; 3];
    for (slot, (p, out)) in within_delta.iter_mut().zip(profiles.iter().zip(&outputs)) {
        let dist = l1_distance(&unique_ml(p)?, out);
        *slot = if delta == 0.0 { dist == 0.0 } else { dist < delta };
    }
    let antecedent = l1_distance(&outputs[0], &outputs[1]) <= 2.0 * delta;
    let witness = l1_distance(&outputs[0], &outputs[2]).max(l1_distance(&outputs[1], &outputs[2]));
    Ok(ConsistencyReport {
        rule: rule.name(),
        profiles,
        outputs,
        epsilon,
        delta,
        antecedent,
        witness,
        within_delta,
        passed: !antecedent || witness <= epsilon,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CondorcetFailure {
    pub index: usize,
    pub winner: usize,
    pub mass: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CondorcetReport {
    pub rule: String,
    pub epsilon: f64,
    pub checked: usize,
    pub failures: Vec<CondorcetFailure>,
    pub passed: bool,
}

/// Checks that the rule puts at least `1 − ε` on the Condorcet winner of every profile.
pub fn check_condorcet_consistency(
    rule: &dyn ApproxRule,
    profiles: &[FractionalProfile],
    epsilon: f64,
) -> Result<CondorcetReport> {
    let winners = profiles
        .iter()
        .map(|p| alpha_of(&p.majority_matrix()).map(|(w, _)| w).ok_or(Error::NoCondorcetWinner))
        .collect::<Result<Vec<_>>>()?;
    let masses = profiles.par_iter().zip(&winners).map(|(p, &w)| Ok(rule.apply(p)?[w])).collect::<Result<Vec<f64>>>()?;
    let failures: Vec<CondorcetFailure> = masses
        .iter()
        .zip(&winners)
        .enumerate()
        .filter(|(_, (&mass, _))| mass < 1.0 - epsilon)
        .map(|(index, (&mass, &winner))| CondorcetFailure { index, winner, mass })
        .collect();
    Ok(CondorcetReport { rule: rule.name(), epsilon, checked: profiles.len(), passed: failures.is_empty(), failures })
}

/// All `d!` strict rankings.
pub fn all_rankings(d: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, left: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..left.len() {
            let a = left.remove(k);
            prefix.push(a);
            extend(prefix, left, out);
            prefix.pop();
            left.insert(k, a);
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), &mut (0..d).collect(), &mut out);
    out
}

/// Odd number of voters (at most `max_voters`), each with a uniform strict ranking.
pub fn random_profile<R: Rng + ?Sized>(d: usize, max_voters: u64, rng: &mut R) -> Profile {
    let rankings = all_rankings(d);
    let voters = 2 * rng.random_range(0..max_voters.div_ceil(2)) + 1;
    let mut counts = vec![0u64; rankings.len()];
    for _ in 0..voters {
        counts[rng.random_range(0..rankings.len())] += 1;
    }
    let groups = rankings
        .iter()
        .zip(counts)
        .filter(|(_, c)| *c > 0)
        .map(|(r, c)| (c, PreferenceRelation::from_ranking(d, r).expect("valid ranking")))
        .collect();
    Profile::new(d, groups).expect("nonempty profile")
}

/// Every strict ranking with equal weight; its margin matrix is zero.
pub fn balanced_profile(d: usize) -> FractionalProfile {
    let rankings = all_rankings(d);
    let w = rational(1, rankings.len() as i64);
    let weights: BTreeMap<PreferenceRelation, Rational> = rankings
        .iter()
        .map(|r| (PreferenceRelation::from_ranking(d, r).expect("valid ranking"), w.clone()))
        .collect();
    FractionalProfile::new(d, weights).expect("weights sum to one")
}

/// Profile pairs for population-consistency checks.
///
/// Even-numbered pairs are independent random profiles, resampled until both
/// have the same maximal lottery (possible in practice only with a common
/// Condorcet winner). Odd-numbered pairs take `R″ = λR′ + (1−λ)U` with `U`
/// [`balanced_profile`], which shares `R′`'s maximal lottery whatever it is.
/// Every returned triple (including the mixture) has a unique maximal lottery.
pub fn sample_pairs(d: usize, count: usize, max_voters: u64, seed: u64) -> Result<Vec<(FractionalProfile, FractionalProfile)>> {
    if d < 2 {
        return Err(Error::InvalidArgument("need at least two alternatives".into()));
    }
    let balanced = balanced_profile(d);
    (0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            for _ in 0..10_000 {
                let r1 = random_profile(d, max_voters, &mut rng).to_fractional();
                let ml1 = maximal_lottery(&r1.margin_matrix())?;
                let r2 = if k % 2 == 1 {
                    let lambda = rational(rng.random_range(1..=20), 20);
                    r1.mix(&balanced, &lambda)?
                } else {
                    let mut found = None;
                    for _ in 0..200 {
                        let cand = random_profile(d, max_voters, &mut rng).to_fractional();
                        if maximal_lottery(&cand.margin_matrix())?.lottery == ml1.lottery {
                            found = Some(cand);
                            break;
                        }
                    }
                    match found {
                        Some(c) => c,
                        None => continue,
                    }
                };
                let mixed = r1.mix(&r2, &rational(1, 2))?;
                let unique = [&r1, &r2, &mixed]
                    .iter()
                    .all(|p| maximal_lottery(&p.margin_matrix()).map(|m| m.uniqueness == Uniqueness::Unique).unwrap_or(false));
                if unique {
                    return Ok((r1, r2));
                }
            }
            Err(Error::NonConvergence { what: "profile sampling", detail: format!("pair {k}") })
        })
        .collect()
}

/// Random profiles with a Condorcet winner.
pub fn sample_condorcet_profiles(d: usize, count: usize, max_voters: u64, seed: u64) -> Vec<FractionalProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = random_profile(d, max_voters, &mut rng).to_fractional();
        if alpha_of(&p.majority_matrix()).is_some() {
            out.push(p);
        }
    }
    out
}
