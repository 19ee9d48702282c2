//! Exact finite-state analysis of the urn chain.
//!
//! States are compositions of `N` balls into `d` labels. They are indexed by
//! the combinatorial number system: the composition `(c_1, …, c_d)` is mapped
//! to the bar positions `b_k = c_1 + … + c_k + (k − 1)`, `k = 1..d−1`, of its
//! stars-and-bars word and ranked as `Σ_k C(b_k, k)`. This ordering does not
//! depend on the platform, so state indices written to CSV are portable.

use nalgebra::{DMatrix, DVector};
use num::{FromPrimitive, Num, One, Signed, Zero};
use rayon::prelude::*;

use crate::prefs::{rational_to_f64, MajorityMatrix};
use crate::{Error, Rational, Result};

pub const DEFAULT_STATE_CAP: usize = 200_000;
/// Largest chain solved with exact rational elimination.
pub const EXACT_SOLVE_LIMIT: usize = 120;
/// Largest chain solved by dense LU before switching to power iteration.
pub const DENSE_SOLVE_LIMIT: usize = 500;
pub const POWER_TOLERANCE: f64 = 1e-12;
pub const POWER_MAX_ITERATIONS: usize = 1_000_000;

/// Number of compositions of `n` into `d` parts, `C(n + d − 1, d − 1)`.
pub fn multiset_coefficient(d: usize, n: usize) -> Option<usize> {
    if d == 0 {
        return Some(usize::from(n == 0));
    }
    binomial(n + d - 1, d - 1)
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

/// Bijection between ball compositions and `0..count`.
#[derive(Clone, Debug)]
pub struct StateIndex {
    d: usize,
    n: usize,
    count: usize,
    // binom[m][k] = C(m, k) for m < n + d, k < d
    binom: Vec<Vec<usize>>,
}

impl StateIndex {
    pub fn new(d: usize, n: usize, cap: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("d must be at least 1".into()));
        }
        let count = multiset_coefficient(d, n).filter(|&c| c <= cap).ok_or(Error::StateCap {
            states: multiset_coefficient(d, n).unwrap_or(usize::MAX),
            cap,
        })?;
        let binom = (0..n + d)
            .map(|m| (0..d).map(|k| binomial(m, k).expect("bounded by count")).collect())
            .collect();
        Ok(Self { d, n, count, binom })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn balls(&self) -> usize {
        self.n
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn rank(&self, counts: &[u32]) -> usize {
        debug_assert_eq!(counts.len(), self.d);
        let mut pos = 0usize;
        let mut rank = 0usize;
        for (k, &c) in counts[..self.d - 1].iter().enumerate() {
            pos += c as usize;
            rank += self.binom[pos + k][k + 1];
        }
        rank
    }

    pub fn unrank(&self, mut rank: usize) -> Vec<u32> {
        let d = self.d;
        let mut bars = vec![0usize; d.saturating_sub(1)];
        let mut upper = self.n + d - 1;
        for k in (1..d).rev() {
            let mut b = upper - 1;
            while self.binom[b][k] > rank {
                b -= 1;
            }
            bars[k - 1] = b;
            rank -= self.binom[b][k];
            upper = b;
        }
        let mut counts = Vec::with_capacity(d);
        let mut prev: isize = -1;
        for &b in &bars {
            counts.push((b as isize - prev - 1) as u32);
            prev = b as isize;
        }
        counts.push((self.n as isize + d as isize - 2 - prev) as u32);
        counts
    }

    pub fn states(&self) -> impl Iterator<Item = Vec<u32>> + '_ {
        (0..self.count).map(|k| self.unrank(k))
    }
}

/// Row-stochastic sparse transition matrix.
#[derive(Clone, Debug)]
pub struct Kernel<T> {
    index: StateIndex,
    rate: T,
    rows: Vec<Vec<(usize, T)>>,
}

impl<T> Kernel<T> {
    pub fn index(&self) -> &StateIndex {
        &self.index
    }

    pub fn rate(&self) -> &T {
        &self.rate
    }

    pub fn row(&self, state: usize) -> &[(usize, T)] {
        &self.rows[state]
    }

    pub fn entry(&self, from: usize, to: usize) -> Option<&T> {
        self.rows[from].iter().find(|(c, _)| *c == to).map(|(_, v)| v)
    }
}

pub type ExactKernel = Kernel<Rational>;

fn kernel_row<T>(counts: &[u32], n: usize, rate: &T, majority: &[T], from_u64: &dyn Fn(u64) -> T) -> Vec<(Vec<u32>, T)>
where
    T: Num + Clone,
{
    let d = counts.len();
    let nn = from_u64((n * n) as u64);
    let duel = T::one() - rate.clone();
    let mutation = rate.clone() / from_u64(d as u64);
    let two = from_u64(2);
    let mut out = Vec::new();
    let mut stay = T::one();
    for j in 0..d {
        if counts[j] == 0 {
            continue;
        }
        let p_j = from_u64(counts[j] as u64) / from_u64(n as u64);
        for i in 0..d {
            if i == j {
                continue;
            }
            // a ball labelled j is relabelled i
            let duel_term = two.clone() * from_u64(counts[i] as u64 * counts[j] as u64) / nn.clone()
                * majority[i * d + j].clone();
            let prob = duel.clone() * duel_term + mutation.clone() * p_j.clone();
            if prob.is_zero() {
                continue;
            }
            stay = stay - prob.clone();
            let mut next = counts.to_vec();
            next[i] += 1;
            next[j] -= 1;
            out.push((next, prob));
        }
    }
    out.push((counts.to_vec(), stay));
    out
}

fn build<T>(index: StateIndex, rate: T, majority: Vec<T>, from_u64: &(dyn Fn(u64) -> T + Sync)) -> Kernel<T>
where
    T: Num + Clone + Send + Sync,
{
    let n = index.balls();
    let rows = (0..index.count())
        .into_par_iter()
        .map(|k| {
            let counts = index.unrank(k);
            let mut row: Vec<(usize, T)> = kernel_row(&counts, n, &rate, &majority, from_u64)
                .into_iter()
                .map(|(c, p)| (index.rank(&c), p))
                .collect();
            row.sort_by_key(|(c, _)| *c);
            row
        })
        .collect();
    Kernel { index, rate, rows }
}

fn check_inputs(majority: &MajorityMatrix, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("urn needs at least one ball".into()));
    }
    if majority.d() == 0 {
        return Err(Error::InvalidArgument("empty majority matrix".into()));
    }
    Ok(())
}

/// Transition kernel with exact rational entries. The diagonal is
/// `1 − Σ off-diagonal`, which equals `(1 − r) Σ p_k² + r/d` whenever no
/// voter abstains on any pair.
pub fn build_kernel_exact(n: usize, rate: &Rational, majority: &MajorityMatrix, cap: usize) -> Result<ExactKernel> {
    check_inputs(majority, n)?;
    if rate.is_negative() || *rate > Rational::one() {
        return Err(Error::InvalidArgument(format!("mutation rate {rate} outside [0, 1]")));
    }
    let index = StateIndex::new(majority.d(), n, cap)?;
    let entries = (0..majority.d() * majority.d())
        .map(|k| majority.get(k / majority.d(), k % majority.d()).clone())
        .collect();
    Ok(build(index, rate.clone(), entries, &|x| Rational::from_u64(x).expect("integer")))
}

/// Transition kernel with `f64` entries.
pub fn build_kernel(n: usize, rate: f64, majority: &MajorityMatrix, cap: usize) -> Result<Kernel<f64>> {
    check_inputs(majority, n)?;
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::InvalidArgument(format!("mutation rate {rate} outside [0, 1]")));
    }
    let index = StateIndex::new(majority.d(), n, cap)?;
    Ok(build(index, rate, majority.to_f64(), &|x| x as f64))
}

impl ExactKernel {
    pub fn to_f64(&self) -> Kernel<f64> {
        Kernel {
            index: self.index.clone(),
            rate: rational_to_f64(&self.rate),
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(|(c, v)| (*c, rational_to_f64(v))).collect())
                .collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StationaryDist {
    pub index: StateIndex,
    pub pi: Vec<f64>,
    /// `|πᵀP − πᵀ|₁`
    pub residual: f64,
}

impl StationaryDist {
    /// Total mass of states whose normalized composition satisfies `pred`.
    pub fn mass_where(&self, mut pred: impl FnMut(&[f64]) -> bool) -> f64 {
        let n = self.index.balls() as f64;
        self.pi
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let p: Vec<f64> = self.index.unrank(*k).iter().map(|&c| c as f64 / n).collect();
                pred(&p)
            })
            .map(|(_, w)| w)
            .sum()
    }

    /// Stationary mass of the open L1 ball of radius `delta` around `center`.
    pub fn ball_mass(&self, center: &[f64], delta: f64) -> f64 {
        self.mass_where(|p| crate::lottery::l1_distance(p, center) < delta)
    }

    /// Expected urn composition under π.
    pub fn mean_state(&self) -> Vec<f64> {
        let n = self.index.balls() as f64;
        let mut mean = vec![0.0; self.index.d()];
        for (k, w) in self.pi.iter().enumerate() {
            for (m, c) in mean.iter_mut().zip(self.index.unrank(k)) {
                *m += w * c as f64 / n;
            }
        }
        mean
    }
}

fn left_multiply(kernel: &Kernel<f64>, pi: &[f64]) -> Vec<f64> {
    let mut next = vec![0.0; pi.len()];
    for (from, row) in kernel.rows.iter().enumerate() {
        let w = pi[from];
        if w == 0.0 {
            continue;
        }
        for &(to, p) in row {
            next[to] += w * p;
        }
    }
    next
}

pub fn residual(kernel: &Kernel<f64>, pi: &[f64]) -> f64 {
    left_multiply(kernel, pi).iter().zip(pi).map(|(a, b)| (a - b).abs()).sum()
}

fn ensure_irreducible(rate_is_zero: bool) -> Result<()> {
    if rate_is_zero {
        Err(Error::Reducible)
    } else {
        Ok(())
    }
}

/// Stationary distribution: dense LU for small chains, power iteration above
/// [`DENSE_SOLVE_LIMIT`] states. Either way the result is accepted only when
/// the L1 residual is at most [`POWER_TOLERANCE`].
pub fn stationary(kernel: &Kernel<f64>) -> Result<StationaryDist> {
    ensure_irreducible(kernel.rate == 0.0)?;
    let states = kernel.index.count();
    let mut pi = if states <= DENSE_SOLVE_LIMIT { dense_solve(kernel)? } else { uniform_start(states) };
    let mut res = residual(kernel, &pi);
    let mut iterations = 0;
    while res > POWER_TOLERANCE {
        if iterations == POWER_MAX_ITERATIONS {
            return Err(Error::NonConvergence {
                what: "power iteration",
                detail: format!("residual {res:e} after {iterations} iterations"),
            });
        }
        pi = left_multiply(kernel, &pi);
        normalize(&mut pi);
        iterations += 1;
        if iterations % 16 == 0 || states <= DENSE_SOLVE_LIMIT {
            res = residual(kernel, &pi);
        }
    }
    Ok(StationaryDist { index: kernel.index.clone(), pi, residual: res })
}

/// Power iteration only, from an arbitrary start vector.
pub fn stationary_power(kernel: &Kernel<f64>, start: Vec<f64>) -> Result<StationaryDist> {
    ensure_irreducible(kernel.rate == 0.0)?;
    let mut pi = start;
    normalize(&mut pi);
    for iteration in 0..=POWER_MAX_ITERATIONS {
        let next = left_multiply(kernel, &pi);
        let res: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        if res <= POWER_TOLERANCE {
            return Ok(StationaryDist { index: kernel.index.clone(), pi, residual: res });
        }
        if iteration == POWER_MAX_ITERATIONS {
            return Err(Error::NonConvergence {
                what: "power iteration",
                detail: format!("residual {res:e} after {iteration} iterations"),
            });
        }
        pi = next;
        normalize(&mut pi);
    }
    unreachable!()
}

fn uniform_start(states: usize) -> Vec<f64> {
    vec![1.0 / states as f64; states]
}

fn normalize(pi: &mut [f64]) {
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= total);
}

fn dense_solve(kernel: &Kernel<f64>) -> Result<Vec<f64>> {
    let s = kernel.index.count();
    // (Pᵀ − I) π = 0 with the last equation replaced by Σ π = 1.
    let mut a = DMatrix::<f64>::zeros(s, s);
    for (from, row) in kernel.rows.iter().enumerate() {
        for &(to, p) in row {
            a[(to, from)] += p;
        }
        a[(from, from)] -= 1.0;
    }
    for col in 0..s {
        a[(s - 1, col)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(s);
    b[s - 1] = 1.0;
    let x = a.lu().solve(&b).ok_or_else(|| Error::Numerical("singular stationary system".into()))?;
    let mut pi: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    normalize(&mut pi);
    Ok(pi)
}

/// Exact stationary distribution by rational elimination; only for chains
/// with at most [`EXACT_SOLVE_LIMIT`] states.
pub fn stationary_exact(kernel: &ExactKernel) -> Result<Vec<Rational>> {
    ensure_irreducible(kernel.rate.is_zero())?;
    let s = kernel.index.count();
    if s > EXACT_SOLVE_LIMIT {
        return Err(Error::StateCap { states: s, cap: EXACT_SOLVE_LIMIT });
    }
    let mut a = vec![vec![Rational::zero(); s + 1]; s];
    for (from, row) in kernel.rows.iter().enumerate() {
        for (to, p) in row {
            a[*to][from] += p;
        }
        a[from][from] -= Rational::one();
    }
    for x in a[s - 1].iter_mut() {
        *x = Rational::one();
    }
    for col in 0..s {
        let pivot = (col..s)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::Numerical("singular stationary system".into()))?;
        a.swap(col, pivot);
        let inv = Rational::one() / &a[col][col];
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                if !p.is_zero() {
                    *x -= &factor * p;
                }
            }
        }
    }
    Ok(a.into_iter().map(|row| row[s].clone()).collect())
}

/// Stationary mass `σ_k` of the level set with exactly `k` balls labelled `alt`.
pub fn level_set_masses(dist: &StationaryDist, alt: usize) -> Vec<f64> {
    let mut sigma = vec![0.0; dist.index.balls() + 1];
    for (k, w) in dist.pi.iter().enumerate() {
        sigma[dist.index.unrank(k)[alt] as usize] += w;
    }
    sigma
}

/// Probability mass of moving one level up and one level down (in the
/// number of `alt` balls) from `state`, read off the kernel.
pub fn level_flows(kernel: &Kernel<f64>, state: usize, alt: usize) -> (f64, f64) {
    let here = kernel.index.unrank(state)[alt];
    let (mut up, mut down) = (0.0, 0.0);
    for &(to, p) in kernel.row(state) {
        let there = kernel.index.unrank(to)[alt];
        if there > here {
            up += p;
        } else if there < here {
            down += p;
        }
    }
    (up, down)
}

/// Closed-form bounds `(u_k, d_k)` on the up- and down-flow out of any state
/// with `k` balls of a Condorcet winner whose smallest majority is `1/2 + α`.
pub fn updown_bounds(d: usize, n: usize, rate: f64, alpha: f64, k: usize) -> (f64, f64) {
    let (nf, kf, df) = (n as f64, k as f64, d as f64);
    let mix = 2.0 * (1.0 - rate) * kf * (nf - kf) / (nf * nf);
    let up = mix * (0.5 + alpha) + rate / df * (nf - kf) / nf;
    let down = mix * (0.5 - alpha) + rate * (df - 1.0) / df * kf / nf;
    (up, down)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::prefs::parse_profile;
    use crate::rational;

    #[test]
    fn index_roundtrip_and_count() {
        for (d, n) in [(1, 4), (2, 5), (3, 5), (4, 6), (5, 3)] {
            let idx = StateIndex::new(d, n, DEFAULT_STATE_CAP).unwrap();
            assert_eq!(idx.count(), multiset_coefficient(d, n).unwrap());
            let mut seen = std::collections::HashSet::new();
            for k in 0..idx.count() {
                let c = idx.unrank(k);
                assert_eq!(c.iter().sum::<u32>() as usize, n);
                assert_eq!(idx.rank(&c), k);
                assert!(seen.insert(c));
            }
        }
        assert_eq!(StateIndex::new(3, 5, DEFAULT_STATE_CAP).unwrap().count(), 21);
        assert!(matches!(StateIndex::new(3, 1000, 1000), Err(Error::StateCap { .. })));
    }

    #[test]
    fn kernel_entry_matches_worked_example() {
        let maj = catalog::condorcet_winner().majority_matrix();
        let k = build_kernel_exact(5, &rational(1, 10), &maj, DEFAULT_STATE_CAP).unwrap();
        let from = k.index().rank(&[1, 2, 2]);
        let to = k.index().rank(&[2, 1, 2]);
        assert_eq!(k.entry(from, to), Some(&rational(41, 375)));
    }

    #[test]
    fn exact_rows_sum_to_one_and_support() {
        let maj = catalog::cycle_with_loser().majority_matrix();
        let k = build_kernel_exact(4, &rational(1, 7), &maj, DEFAULT_STATE_CAP).unwrap();
        for s in 0..k.index().count() {
            let total: Rational = k.row(s).iter().map(|(_, v)| v.clone()).sum();
            assert_eq!(total, Rational::one());
            assert!(k.row(s).len() <= 4 * 3 + 1);
            let here = k.index().unrank(s);
            for (t, v) in k.row(s) {
                assert!(!v.is_negative());
                let there = k.index().unrank(*t);
                let moved: u32 = here.iter().zip(&there).map(|(a, b)| a.abs_diff(*b)).sum();
                assert!(moved == 0 || moved == 2);
            }
        }
    }

    #[test]
    fn diagonal_matches_stay_formula_without_abstentions() {
        let maj = catalog::condorcet_cycle().majority_matrix();
        let r = rational(1, 10);
        let k = build_kernel_exact(5, &r, &maj, DEFAULT_STATE_CAP).unwrap();
        for s in 0..k.index().count() {
            let c = k.index().unrank(s);
            let sq: Rational = c.iter().map(|&x| rational(x as i64 * x as i64, 25)).sum();
            let expect = (Rational::one() - &r) * sq + &r / rational(3, 1);
            assert_eq!(k.entry(s, s), Some(&expect));
        }
    }

    #[test]
    fn two_state_symmetric_chain() {
        let maj = parse_profile("d=2\n1: 1 2").unwrap().majority_matrix();
        let k = build_kernel(1, 1.0, &maj, DEFAULT_STATE_CAP).unwrap();
        let pi = stationary(&k).unwrap();
        assert!((pi.pi[0] - 0.5).abs() < 1e-15 && (pi.pi[1] - 0.5).abs() < 1e-15);
        let exact = stationary_exact(&build_kernel_exact(1, &Rational::one(), &maj, 10).unwrap()).unwrap();
        assert_eq!(exact, vec![rational(1, 2), rational(1, 2)]);
    }

    #[test]
    fn zero_rate_is_refused() {
        let maj = catalog::condorcet_winner().majority_matrix();
        let k = build_kernel(4, 0.0, &maj, DEFAULT_STATE_CAP).unwrap();
        assert!(matches!(stationary(&k), Err(Error::Reducible)));
    }

    #[test]
    fn dense_power_and_exact_agree() {
        let maj = catalog::cycle_with_loser().majority_matrix();
        let ek = build_kernel_exact(4, &rational(1, 20), &maj, DEFAULT_STATE_CAP).unwrap();
        let k = ek.to_f64();
        let dense = stationary(&k).unwrap();
        let power = stationary_power(&k, vec![1.0; k.index().count()]).unwrap();
        let exact = stationary_exact(&ek).unwrap();
        assert!(dense.residual <= 1e-12);
        for ((a, b), c) in dense.pi.iter().zip(&power.pi).zip(&exact) {
            assert!((a - b).abs() < 1e-10);
            assert!((a - rational_to_f64(c)).abs() < 1e-13);
        }
    }

    #[test]
    fn level_sets_partition_mass() {
        let maj = parse_profile("d=2\n3: 1 2\n1: 2 1").unwrap().majority_matrix();
        let k = build_kernel(6, 0.1, &maj, DEFAULT_STATE_CAP).unwrap();
        let pi = stationary(&k).unwrap();
        let sigma = level_set_masses(&pi, 0);
        assert!((sigma.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // d = 2: level sets are single states
        for (k_balls, s) in sigma.iter().enumerate() {
            let state = pi.index.rank(&[k_balls as u32, 6 - k_balls as u32]);
            assert_eq!(*s, pi.pi[state]);
        }
        let k1 = build_kernel(1, 0.3, &maj, DEFAULT_STATE_CAP).unwrap();
        let s1 = level_set_masses(&stationary(&k1).unwrap(), 1);
        assert!((s1[0] + s1[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn updown_edge_cases() {
        let (u0, _) = updown_bounds(3, 10, 0.1, 1.0 / 6.0, 0);
        assert!((u0 - 0.1 / 3.0).abs() < 1e-15);
        let (un, _) = updown_bounds(3, 10, 0.1, 1.0 / 6.0, 10);
        assert_eq!(un, 0.0);
    }
}
