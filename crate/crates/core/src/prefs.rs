//! Preference profiles and the majority / margin matrices derived from them.
//!
//! Alternatives are 0-indexed in memory and 1-indexed in profile files.
//!
//! Profile file grammar (UTF-8, `#` starts a comment, whitespace tolerant):
//!
//! ```text
//! d=3
//! 300: 1 2 3            # complete ranking, most preferred first
//! 2: pairs 1>2, 3>2     # explicit asymmetric relation
//! 1: pairs              # voter without any strict preference
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::{BigInt, One, Signed, ToPrimitive, Zero};

use crate::{Error, Rational, Result};

/// An asymmetric binary relation over `d` alternatives. Transitivity is not
/// required.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PreferenceRelation {
    d: usize,
    // row-major; prefers[i * d + j] means i is strictly preferred to j
    prefers: Vec<bool>,
}

impl PreferenceRelation {
    pub fn new(d: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut prefers = vec![false; d * d];
        for (i, j) in pairs {
            if i >= d || j >= d {
                return Err(Error::InvalidProfile(format!(
                    "pair ({}, {}) out of range for d = {d}",
                    i + 1,
                    j + 1
                )));
            }
            if i == j {
                return Err(Error::InvalidProfile(format!("self-pair ({0}, {0})", i + 1)));
            }
            if prefers[j * d + i] {
                return Err(Error::InvalidProfile(format!(
                    "relation is not asymmetric on {{{}, {}}}",
                    i + 1,
                    j + 1
                )));
            }
            prefers[i * d + j] = true;
        }
        Ok(Self { d, prefers })
    }

    /// Strict linear order, most preferred first.
    pub fn from_ranking(d: usize, ranking: &[usize]) -> Result<Self> {
        if ranking.len() != d {
            return Err(Error::InvalidProfile(format!(
                "ranking lists {} alternatives, expected {d}",
                ranking.len()
            )));
        }
        let mut seen = vec![false; d];
        for &a in ranking {
            if a >= d {
                return Err(Error::InvalidProfile(format!("alternative {} out of range", a + 1)));
            }
            if std::mem::replace(&mut seen[a], true) {
                return Err(Error::InvalidProfile(format!("alternative {} ranked twice", a + 1)));
            }
        }
        let pairs = ranking
            .iter()
            .enumerate()
            .flat_map(|(pos, &a)| ranking[pos + 1..].iter().map(move |&b| (a, b)));
        Self::new(d, pairs)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn prefers(&self, i: usize, j: usize) -> bool {
        self.prefers[i * self.d + j]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let d = self.d;
        self.prefers
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(k, _)| (k / d, k % d))
    }

    /// Returns the ranking if the relation is a strict linear order.
    pub fn as_ranking(&self) -> Option<Vec<usize>> {
        let d = self.d;
        if self.pairs().count() != d * (d - 1) / 2 {
            return None;
        }
        // In a linear order the number of beaten alternatives is distinct per alternative.
        let mut order: Vec<(usize, usize)> = (0..d)
            .map(|i| ((0..d).filter(|&j| self.prefers(i, j)).count(), i))
            .collect();
        order.sort_unstable_by(|a, b| b.cmp(a));
        let ranking: Vec<usize> = order.into_iter().map(|(_, i)| i).collect();
        let linear = ranking
            .iter()
            .enumerate()
            .all(|(pos, &a)| ranking[pos + 1..].iter().all(|&b| self.prefers(a, b)));
        linear.then_some(ranking)
    }
}

impl fmt::Display for PreferenceRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.d > 0 {
            if let Some(ranking) = self.as_ranking() {
                let items: Vec<String> = ranking.iter().map(|a| (a + 1).to_string()).collect();
                return write!(f, "{}", items.join(" "));
            }
        }
        let items: Vec<String> = self.pairs().map(|(i, j)| format!("{}>{}", i + 1, j + 1)).collect();
        if items.is_empty() {
            write!(f, "pairs")
        } else {
            write!(f, "pairs {}", items.join(", "))
        }
    }
}

/// A multiset of preference relations with positive integer multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile {
    d: usize,
    groups: Vec<(u64, PreferenceRelation)>,
}

impl Profile {
    pub fn new(d: usize, groups: Vec<(u64, PreferenceRelation)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidProfile("d must be at least 1".into()));
        }
        if groups.is_empty() {
            return Err(Error::InvalidProfile("profile has no voters".into()));
        }
        for (count, rel) in &groups {
            if *count == 0 {
                return Err(Error::InvalidProfile("voter count must be positive".into()));
            }
            if rel.d != d {
                return Err(Error::DimensionMismatch { expected: d, found: rel.d });
            }
        }
        Ok(Self { d, groups })
    }

    /// Convenience constructor from `(count, ranking)` pairs with 0-indexed alternatives.
    pub fn from_rankings(d: usize, rankings: &[(u64, &[usize])]) -> Result<Self> {
        let groups = rankings
            .iter()
            .map(|&(c, r)| Ok((c, PreferenceRelation::from_ranking(d, r)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(d, groups)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn groups(&self) -> &[(u64, PreferenceRelation)] {
        &self.groups
    }

    pub fn voters(&self) -> u64 {
        self.groups.iter().map(|(c, _)| c).sum()
    }

    pub fn majority_matrix(&self) -> MajorityMatrix {
        let d = self.d;
        let total = BigInt::from(self.voters());
        let mut counts = vec![0u64; d * d];
        for (c, rel) in &self.groups {
            for (i, j) in rel.pairs() {
                counts[i * d + j] += c;
            }
        }
        let entries = counts
            .into_iter()
            .map(|c| Rational::new(BigInt::from(c), total.clone()))
            .collect();
        MajorityMatrix { d, entries }
    }

    pub fn margin_matrix(&self) -> MarginMatrix {
        self.majority_matrix().margins()
    }

    pub fn to_fractional(&self) -> FractionalProfile {
        let total = BigInt::from(self.voters());
        let mut weights: BTreeMap<PreferenceRelation, Rational> = BTreeMap::new();
        for (c, rel) in &self.groups {
            *weights.entry(rel.clone()).or_insert_with(Rational::zero) +=
                Rational::new(BigInt::from(*c), total.clone());
        }
        FractionalProfile { d: self.d, weights }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "d={}", self.d)?;
        for (c, rel) in &self.groups {
            writeln!(f, "{c}: {rel}")?;
        }
        Ok(())
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_profile(s)
    }
}

/// Parses the textual profile format described in the module docs.
pub fn parse_profile(text: &str) -> Result<Profile> {
    let err = |line: usize, msg: String| Error::Parse { line, msg };
    let mut d: Option<usize> = None;
    let mut groups = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some(dim) = d else {
            let value = line
                .strip_prefix('d')
                .map(str::trim_start)
                .and_then(|rest| rest.strip_prefix('='))
                .ok_or_else(|| err(line_no, format!("expected `d=<int>`, found `{line}`")))?;
            let value: usize = value
                .trim()
                .parse()
                .map_err(|_| err(line_no, format!("invalid alternative count `{}`", value.trim())))?;
            if value == 0 {
                return Err(err(line_no, "d must be at least 1".into()));
            }
            d = Some(value);
            continue;
        };
        let (count, body) = line
            .split_once(':')
            .ok_or_else(|| err(line_no, format!("expected `<count>: ...`, found `{line}`")))?;
        let count: i64 = count
            .trim()
            .parse()
            .map_err(|_| err(line_no, format!("invalid voter count `{}`", count.trim())))?;
        if count <= 0 {
            return Err(err(line_no, format!("voter count must be positive, found {count}")));
        }
        let body = body.trim();
        let parse_alt = |tok: &str| -> Result<usize> {
            let a: usize = tok
                .trim()
                .parse()
                .map_err(|_| err(line_no, format!("invalid alternative `{}`", tok.trim())))?;
            if a == 0 || a > dim {
                return Err(err(line_no, format!("alternative {a} out of range 1..={dim}")));
            }
            Ok(a - 1)
        };
        let relation = if let Some(rest) = body.strip_prefix("pairs") {
            let mut pairs = Vec::new();
            for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (a, b) = item
                    .split_once('>')
                    .ok_or_else(|| err(line_no, format!("expected `i>j`, found `{item}`")))?;
                pairs.push((parse_alt(a)?, parse_alt(b)?));
            }
            PreferenceRelation::new(dim, pairs)
        } else {
            let ranking = body.split_whitespace().map(parse_alt).collect::<Result<Vec<_>>>()?;
            PreferenceRelation::from_ranking(dim, &ranking)
        }
        .map_err(|e| err(line_no, e.to_string()))?;
        groups.push((count as u64, relation));
    }
    let d = d.ok_or_else(|| err(0, "missing `d=<int>` header".into()))?;
    Profile::new(d, groups)
}

/// Fractions of voters per preference relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalProfile {
    d: usize,
    weights: BTreeMap<PreferenceRelation, Rational>,
}

impl FractionalProfile {
    pub fn new(d: usize, weights: BTreeMap<PreferenceRelation, Rational>) -> Result<Self> {
        let mut total = Rational::zero();
        for (rel, w) in &weights {
            if rel.d != d {
                return Err(Error::DimensionMismatch { expected: d, found: rel.d });
            }
            if w.is_negative() {
                return Err(Error::InvalidProfile("negative weight".into()));
            }
            total += w;
        }
        if !total.is_one() {
            return Err(Error::InvalidProfile(format!("weights sum to {total}, not 1")));
        }
        let weights = weights.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        Ok(Self { d, weights })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn weights(&self) -> &BTreeMap<PreferenceRelation, Rational> {
        &self.weights
    }

    /// Pointwise convex combination `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &FractionalProfile, lambda: &Rational) -> Result<FractionalProfile> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: other.d });
        }
        if lambda.is_negative() || *lambda > Rational::one() {
            return Err(Error::InvalidArgument(format!("mixing weight {lambda} outside [0, 1]")));
        }
        let rest = Rational::one() - lambda;
        let mut weights: BTreeMap<PreferenceRelation, Rational> = BTreeMap::new();
        for (rel, w) in &self.weights {
            *weights.entry(rel.clone()).or_insert_with(Rational::zero) += w * lambda;
        }
        for (rel, w) in &other.weights {
            *weights.entry(rel.clone()).or_insert_with(Rational::zero) += w * &rest;
        }
        weights.retain(|_, w| !w.is_zero());
        Ok(FractionalProfile { d: self.d, weights })
    }

    pub fn majority_matrix(&self) -> MajorityMatrix {
        let d = self.d;
        let mut entries = vec![Rational::zero(); d * d];
        for (rel, w) in &self.weights {
            for (i, j) in rel.pairs() {
                entries[i * d + j] += w;
            }
        }
        MajorityMatrix { d, entries }
    }

    pub fn margin_matrix(&self) -> MarginMatrix {
        self.majority_matrix().margins()
    }
}

/// One `weight: relation` line per preference relation, after a `d=` header.
impl fmt::Display for FractionalProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={}", self.d)?;
        for (rel, w) in &self.weights {
            write!(f, "\n{w}: {rel}")?;
        }
        Ok(())
    }
}

/// Fraction of voters preferring `i` to `j`, exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MajorityMatrix {
    d: usize,
    entries: Vec<Rational>,
}

impl MajorityMatrix {
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let d = rows.len();
        let mut entries = Vec::with_capacity(d * d);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: row.len() });
            }
            for (j, x) in row.into_iter().enumerate() {
                let zero_diag = i != j || x.is_zero();
                if !zero_diag || x.is_negative() || x > Rational::one() {
                    return Err(Error::InvalidArgument(format!("majority entry ({i}, {j}) = {x}")));
                }
                entries.push(x);
            }
        }
        let m = Self { d, entries };
        for i in 0..d {
            for j in 0..d {
                if m.get(i, j) + m.get(j, i) > Rational::one() {
                    return Err(Error::InvalidArgument(format!(
                        "majority entries ({i}, {j}) and ({j}, {i}) exceed 1 together"
                    )));
                }
            }
        }
        Ok(m)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.d + j]
    }

    pub fn margins(&self) -> MarginMatrix {
        let d = self.d;
        let entries = (0..d * d)
            .map(|k| {
                let (i, j) = (k / d, k % d);
                self.get(i, j) - self.get(j, i)
            })
            .collect();
        MarginMatrix { d, entries }
    }

    /// Row-major `f64` copy.
    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(rational_to_f64).collect()
    }
}

/// Skew-symmetric matrix of majority margins.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarginMatrix {
    d: usize,
    entries: Vec<Rational>,
}

impl MarginMatrix {
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let d = rows.len();
        let mut entries = Vec::with_capacity(d * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: row.len() });
            }
            entries.extend(row);
        }
        let m = Self { d, entries };
        for i in 0..d {
            for j in i..d {
                if *m.get(i, j) != -m.get(j, i) {
                    return Err(Error::NotSkewSymmetric(i, j));
                }
            }
        }
        Ok(m)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.d + j]
    }

    pub fn transpose(&self) -> MarginMatrix {
        let d = self.d;
        let entries = (0..d * d).map(|k| self.get(k % d, k / d).clone()).collect();
        MarginMatrix { d, entries }
    }

    /// Exact product `M̃ p`.
    pub fn apply(&self, p: &[Rational]) -> Vec<Rational> {
        (0..self.d)
            .map(|i| {
                (0..self.d)
                    .filter(|&j| !p[j].is_zero())
                    .fold(Rational::zero(), |acc, j| acc + self.get(i, j) * &p[j])
            })
            .collect()
    }

    /// Majority matrix of a profile without abstentions, `M = (M̃ + 1) / 2` off the diagonal.
    pub fn complete_majority(&self) -> MajorityMatrix {
        let d = self.d;
        let half = Rational::new(BigInt::one(), BigInt::from(2));
        let entries = (0..d * d)
            .map(|k| {
                if k / d == k % d {
                    Rational::zero()
                } else {
                    (&self.entries[k] + Rational::one()) * &half
                }
            })
            .collect();
        MajorityMatrix { d, entries }
    }

    /// Row-major `f64` copy.
    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(rational_to_f64).collect()
    }

    /// Multiplies every entry by a scalar; used to form convex combinations.
    pub fn scaled(&self, c: &Rational) -> MarginMatrix {
        MarginMatrix { d: self.d, entries: self.entries.iter().map(|x| x * c).collect() }
    }

    pub fn add(&self, other: &MarginMatrix) -> Result<MarginMatrix> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: other.d });
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(MarginMatrix { d: self.d, entries })
    }
}

impl fmt::Display for MarginMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.d {
            let row: Vec<String> = (0..self.d).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "{}", row.join("\t"))?;
        }
        Ok(())
    }
}

pub fn rational_to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"1/3"`, `"0.25"`, `"2"` or `"-1/9"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("`{s}` is not a rational number"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let value = Rational::new(digits, BigInt::from(10u32).pow(frac.len() as u32));
    Ok(if neg { -value } else { value })
}
