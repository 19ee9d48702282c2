//! Parameter recipes for profiles with a Condorcet winner.
//!
//! With `α` the winner's smallest majority above one half, stationary mass on
//! the level sets `S_k` (exactly `k` winner balls) decays geometrically with
//! ratio `β = (1−α)/(1+2α)` away from the top. Given a ball-fraction
//! tolerance `δ` and a time-fraction tolerance `τ`, [`recipe`] returns a
//! mutation rate and ball count under which at least `1 − τ` of the
//! stationary mass has more than `(1−δ)N` winner balls; [`certify`] checks
//! that claim on the exact chain.

use num::{BigInt, One, Signed, ToPrimitive};
use serde::Serialize;

use crate::chain_exact::{build_kernel, level_set_masses, stationary, StationaryDist};
use crate::prefs::{rational_to_f64, MajorityMatrix};
use crate::{rational, Error, Rational, Result};

/// The Condorcet winner and its margin advantage `α = min_j M(i, j) − 1/2`.
pub fn alpha_of(m: &MajorityMatrix) -> Option<(usize, Rational)> {
    let d = m.d();
    let half = rational(1, 2);
    (0..d).find_map(|i| {
        let worst = (0..d).filter(|&j| j != i).map(|j| m.get(i, j)).min()?.clone();
        (worst > half).then(|| (i, worst - &half))
    })
    .or_else(|| (d == 1).then(|| (0, rational(1, 2))))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CondorcetBoundInput {
    #[serde(serialize_with = "crate::serialize_rational")]
    pub alpha: Rational,
    #[serde(serialize_with = "crate::serialize_rational")]
    pub delta: Rational,
    #[serde(serialize_with = "crate::serialize_rational")]
    pub tau: Rational,
    pub d: usize,
}

/// Rule-of-thumb parameters; not covered by the certification argument.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Heuristic {
    /// `⌈−ln(τ)/δ⌉`.
    pub balls: u64,
    /// Suggested rate interval `[1/N, δ]` at that ball count.
    pub rate_low: f64,
    pub rate_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CondorcetRecipe {
    pub input: CondorcetBoundInput,
    #[serde(serialize_with = "crate::serialize_rational")]
    pub beta: Rational,
    pub k0: u64,
    #[serde(serialize_with = "crate::serialize_rational")]
    pub rate: Rational,
    pub n_min: u64,
    /// `r/(N d) ≥ 2(1−r)/N²` at `N = n_min`.
    pub side_balls_ok: bool,
    /// `r ≤ 1/d`.
    pub side_rate_ok: bool,
    /// Smallest `N` satisfying the ball side condition at this rate.
    pub side_balls_min: u64,
    pub heuristic: Heuristic,
}

fn ceil_to_u64(x: &Rational) -> Result<u64> {
    x.ceil()
        .to_integer()
        .to_u64()
        .ok_or_else(|| Error::InvalidArgument(format!("{x} does not fit a ball count")))
}

fn check_open_unit(name: &str, x: &Rational) -> Result<()> {
    if !x.is_positive() || *x >= Rational::one() {
        return Err(Error::InvalidArgument(format!("{name} = {x} must lie in (0, 1)")));
    }
    Ok(())
}

/// `β = (1−α)/(1+2α)`.
pub fn beta(alpha: &Rational) -> Rational {
    (Rational::one() - alpha) / (Rational::one() + rational(2, 1) * alpha)
}

/// Smallest `k ≥ 0` with `β^k ≤ τ(1−β)`, the ceiling of `log(τ(1−β))/log β`
/// evaluated exactly.
pub fn tail_length(beta: &Rational, tau: &Rational) -> u64 {
    let target = tau * (Rational::one() - beta);
    let mut power = Rational::one();
    let mut k = 0;
    while power > target {
        power *= beta;
        k += 1;
    }
    k
}

pub fn recipe(input: &CondorcetBoundInput) -> Result<CondorcetRecipe> {
    check_open_unit("delta", &input.delta)?;
    check_open_unit("tau", &input.tau)?;
    if !input.alpha.is_positive() || input.alpha > rational(1, 2) {
        return Err(Error::InvalidArgument(format!("alpha = {} must lie in (0, 1/2]", input.alpha)));
    }
    if input.d < 2 {
        return Err(Error::InvalidArgument("need at least two alternatives".into()));
    }
    let beta = beta(&input.alpha);
    let k0 = tail_length(&beta, &input.tau);
    let rate = &input.alpha * &input.delta / rational(2, 1);
    let slack = &input.delta - &rate / &input.alpha;
    let n_min = ceil_to_u64(&(Rational::from_integer(k0.into()) / slack))?.max(1);

    let d = Rational::from_integer(input.d.into());
    // r/(N d) ≥ 2(1−r)/N²  ⇔  N ≥ 2d(1−r)/r
    let side_balls_min = ceil_to_u64(&(rational(2, 1) * &d * (Rational::one() - &rate) / &rate))?;
    let side_rate_ok = rate <= Rational::one() / &d;

    let delta = rational_to_f64(&input.delta);
    let heuristic_balls = (-rational_to_f64(&input.tau).ln() / delta).ceil().max(1.0) as u64;
    Ok(CondorcetRecipe {
        beta,
        k0,
        rate,
        n_min,
        side_balls_ok: n_min >= side_balls_min,
        side_rate_ok,
        side_balls_min,
        heuristic: Heuristic { balls: heuristic_balls, rate_low: 1.0 / heuristic_balls as f64, rate_high: delta },
        input: input.clone(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Certification {
    pub balls: u64,
    pub rate: f64,
    pub winner: usize,
    /// Smallest winner-ball count counted towards the tail, `⌈N(1−δ)⌉`.
    pub threshold: u64,
    pub tail_mass: f64,
    pub target: f64,
    pub passed: bool,
    pub side_balls_ok: bool,
    pub side_rate_ok: bool,
    pub states: usize,
    pub residual: f64,
}

/// Solves the stationary distribution at `(n_min, r)` and checks that the
/// level sets `k ≥ ⌈N(1−δ)⌉` carry at least `1 − τ` of the mass.
///
/// Side conditions are reported, not enforced.
pub fn certify(recipe: &CondorcetRecipe, m: &MajorityMatrix, cap: usize) -> Result<(Certification, StationaryDist)> {
    let (winner, alpha) = alpha_of(m).ok_or(Error::NoCondorcetWinner)?;
    if m.d() != recipe.input.d {
        return Err(Error::DimensionMismatch { expected: recipe.input.d, found: m.d() });
    }
    if alpha < recipe.input.alpha {
        return Err(Error::InvalidArgument(format!(
            "profile margin {alpha} is below the recipe's alpha {}",
            recipe.input.alpha
        )));
    }
    let n = usize::try_from(recipe.n_min).map_err(|_| Error::InvalidArgument("ball count too large".into()))?;
    let rate = rational_to_f64(&recipe.rate);
    let kernel = build_kernel(n, rate, m, cap)?;
    let dist = stationary(&kernel)?;
    let keep = Rational::one() - &recipe.input.delta;
    let threshold = ceil_to_u64(&(Rational::from_integer(BigInt::from(n)) * keep))?;
    let sigma = level_set_masses(&dist, winner);
    let tail_mass: f64 = sigma[threshold as usize..].iter().sum();
    let target = 1.0 - rational_to_f64(&recipe.input.tau);
    Ok((
        Certification {
            balls: recipe.n_min,
            rate,
            winner,
            threshold,
            tail_mass,
            target,
            passed: tail_mass >= target,
            side_balls_ok: recipe.side_balls_ok,
            side_rate_ok: recipe.side_rate_ok,
            states: kernel.index().count(),
            residual: dist.residual,
        },
        dist,
    ))
}

/// Level indices `k ≤ k_max` where `σ_{k−1}/σ_k > β`, ignoring levels whose
/// mass is below `floor` (ratios there are dominated by rounding).
pub fn ratio_violations(sigma: &[f64], beta: f64, k_max: usize, floor: f64) -> Vec<(usize, f64)> {
    (1..=k_max.min(sigma.len() - 1))
        .filter(|&k| sigma[k - 1] >= floor && sigma[k] >= floor)
        .map(|k| (k, sigma[k - 1] / sigma[k]))
        .filter(|&(_, ratio)| ratio > beta)
        .collect()
}

/// `⌊N(1 − r/α)⌋`, the last level covered by the geometric decay argument.
pub fn decay_limit(n: u64, rate: &Rational, alpha: &Rational) -> u64 {
    let x = Rational::from_integer(n.into()) * (Rational::one() - rate / alpha);
    let f = x.floor().to_integer();
    if f.is_negative() {
        0
    } else {
        f.to_u64().unwrap_or(u64::MAX)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::chain_exact::{updown_bounds, DEFAULT_STATE_CAP};
    use crate::prefs::parse_profile;

    fn input(alpha: Rational, delta: Rational, tau: Rational) -> CondorcetBoundInput {
        CondorcetBoundInput { alpha, delta, tau, d: 3 }
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_of(&catalog::condorcet_winner().majority_matrix()), Some((0, rational(1, 6))));
        assert_eq!(alpha_of(&catalog::condorcet_cycle().majority_matrix()), None);
        assert_eq!(alpha_of(&parse_profile("d=2\n5: 2 1").unwrap().majority_matrix()), Some((1, rational(1, 2))));
        // an exact majority tie is not a win
        assert_eq!(alpha_of(&parse_profile("d=2\n1: 2 1\n1: 1 2").unwrap().majority_matrix()), None);
    }

    #[test]
    fn worked_recipe() {
        let r = recipe(&input(rational(1, 6), rational(1, 5), rational(1, 10))).unwrap();
        assert_eq!(r.beta, rational(5, 8));
        assert_eq!(r.k0, 7);
        assert_eq!(r.rate, rational(1, 60));
        assert_eq!(r.n_min, 70);
        assert!(r.side_rate_ok);
        assert!(!r.side_balls_ok);
        assert_eq!(r.side_balls_min, 354);
        assert_eq!(r.heuristic.balls, 12);
    }

    #[test]
    fn tail_length_matches_log_formula() {
        for (a, t) in [((1, 6), (1, 10)), ((1, 4), (1, 100)), ((1, 20), (1, 3)), ((1, 2), (1, 2))] {
            let beta = beta(&rational(a.0, a.1));
            let tau = rational(t.0, t.1);
            let x = (rational_to_f64(&tau) * (1.0 - rational_to_f64(&beta))).ln() / rational_to_f64(&beta).ln();
            assert_eq!(tail_length(&beta, &tau), x.ceil().max(0.0) as u64);
        }
        // α = 1/2 gives β = 1/4
        assert_eq!(beta(&rational(1, 2)), rational(1, 4));
    }

    #[test]
    fn monotonicity() {
        let grid: Vec<Rational> = (1..10).map(|k| rational(k, 10)).collect();
        for alpha in [rational(1, 20), rational(1, 6), rational(1, 3)] {
            for w in grid.windows(2) {
                let (lo, hi) = (&w[0], &w[1]);
                let n = |delta: &Rational, tau: &Rational| recipe(&input(alpha.clone(), delta.clone(), tau.clone())).unwrap().n_min;
                for fixed in &grid {
                    assert!(n(hi, fixed) <= n(lo, fixed));
                    assert!(n(fixed, hi) <= n(fixed, lo));
                }
                let k = |tau: &Rational| tail_length(&beta(&alpha), tau);
                assert!(k(hi) <= k(lo));
            }
        }
        for w in grid.windows(2) {
            let (a, b) = (&w[0] / rational(2, 1), &w[1] / rational(2, 1));
            assert!(beta(&b) < beta(&a));
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(recipe(&input(rational(0, 1), rational(1, 5), rational(1, 10))).is_err());
        assert!(recipe(&input(rational(3, 5), rational(1, 5), rational(1, 10))).is_err());
        assert!(recipe(&input(rational(1, 6), rational(1, 1), rational(1, 10))).is_err());
        assert!(recipe(&input(rational(1, 6), rational(1, 5), rational(0, 1))).is_err());
    }

    #[test]
    fn two_alternatives_birth_death() {
        // With d = 2 and a unanimous winner the level flows are exactly u_k and d_k,
        // so σ_k ∝ Π_{j<k} u_j / d_{j+1}.
        let m = parse_profile("d=2\n3: 1 2").unwrap().majority_matrix();
        for (n, rate) in [(4usize, 0.3), (9, 0.1), (15, 0.05)] {
            let dist = stationary(&build_kernel(n, rate, &m, DEFAULT_STATE_CAP).unwrap()).unwrap();
            let sigma = level_set_masses(&dist, 0);
            let mut oracle = vec![1.0];
            for k in 1..=n {
                let up = updown_bounds(2, n, rate, 0.5, k - 1).0;
                let down = updown_bounds(2, n, rate, 0.5, k).1;
                oracle.push(oracle[k - 1] * up / down);
            }
            let z: f64 = oracle.iter().sum();
            for (s, o) in sigma.iter().zip(&oracle) {
                assert!((s - o / z).abs() < 1e-12, "{s} vs {}", o / z);
            }
        }
    }

    #[test]
    fn whole_simplex_is_trivially_certified() {
        let m = parse_profile("d=2\n3: 1 2").unwrap().majority_matrix();
        let r = recipe(&CondorcetBoundInput { alpha: rational(1, 2), delta: rational(99, 100), tau: rational(1, 2), d: 2 }).unwrap();
        let (cert, _) = certify(&r, &m, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(cert.threshold, (cert.balls as f64 * 0.01).ceil() as u64);
        assert!(cert.passed);
        let cyc = catalog::condorcet_cycle().majority_matrix();
        assert!(matches!(certify(&r, &cyc, DEFAULT_STATE_CAP), Err(Error::NoCondorcetWinner)));
    }

    #[test]
    fn decay_limit_floor() {
        assert_eq!(decay_limit(70, &rational(1, 60), &rational(1, 6)), 63);
        assert_eq!(decay_limit(10, &rational(1, 2), &rational(1, 10)), 0);
    }
}
