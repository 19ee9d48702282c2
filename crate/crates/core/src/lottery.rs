//! Maximal lotteries: lotteries `p` on the simplex with `M̃ p ≤ 0`.
//!
//! A maximal lottery is an optimal strategy of the symmetric zero-sum game
//! with payoff matrix `M̃`; the game has value zero, so a maximal lottery is
//! any feasible point of `{p ≥ 0, Σ p = 1, M̃ p ≤ 0}`. The feasibility
//! program is solved exactly with [`crate::simplex`].

use num::{One, Signed, Zero};
use serde::Serialize;

use crate::prefs::{rational_to_f64, MarginMatrix};
use crate::simplex::{self, Constraint, LinearProgram, LpOutcome, Relation};
use crate::{Error, Rational, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Uniqueness {
    Unique,
    Multiple,
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlResult {
    pub lottery: Vec<Rational>,
    pub uniqueness: Uniqueness,
    pub support: Vec<usize>,
}

impl MlResult {
    pub fn to_f64(&self) -> Vec<f64> {
        self.lottery.iter().map(rational_to_f64).collect()
    }
}

fn ml_constraints(m: &MarginMatrix) -> Vec<Constraint> {
    let d = m.d();
    let mut constraints: Vec<Constraint> = (0..d)
        .map(|i| Constraint {
            coeffs: (0..d).map(|j| m.get(i, j).clone()).collect(),
            relation: Relation::Le,
            rhs: Rational::zero(),
        })
        .collect();
    constraints.push(Constraint { coeffs: vec![Rational::one(); d], relation: Relation::Eq, rhs: Rational::one() });
    constraints
}

/// Computes an exact maximal lottery together with a uniqueness verdict.
pub fn maximal_lottery(m: &MarginMatrix) -> Result<MlResult> {
    let d = m.d();
    if d == 0 {
        return Err(Error::InvalidArgument("empty margin matrix".into()));
    }
    let lp = LinearProgram { objective: vec![Rational::zero(); d], constraints: ml_constraints(m) };
    let lottery = match simplex::solve(&lp) {
        LpOutcome::Optimal { x, .. } => x,
        // A symmetric zero-sum game always has an equilibrium.
        other => return Err(Error::Numerical(format!("maximal lottery program returned {other:?}"))),
    };
    debug_assert!(is_maximal_exact(m, &lottery));
    let support: Vec<usize> = (0..d).filter(|&i| lottery[i].is_positive()).collect();
    let uniqueness = uniqueness(m, &lottery, &support);
    Ok(MlResult { lottery, uniqueness, support })
}

fn uniqueness(m: &MarginMatrix, p: &[Rational], support: &[usize]) -> Uniqueness {
    let d = m.d();
    let mp = m.apply(p);
    // Every maximal lottery vanishes where (M̃p)_j < 0 and satisfies (M̃q)_i = 0 on supp(p).
    let tight: Vec<usize> = (0..d).filter(|&j| mp[j].is_zero()).collect();
    let mut rows: Vec<Vec<Rational>> =
        support.iter().map(|&i| tight.iter().map(|&j| m.get(i, j).clone()).collect()).collect();
    rows.push(vec![Rational::one(); tight.len()]);
    if rank(rows) == tight.len() {
        return Uniqueness::Unique;
    }
    // Rank test inconclusive: probe the extent of the polytope coordinate by coordinate.
    for &i in &tight {
        for sign in [1i64, -1] {
            let mut objective = vec![Rational::zero(); d];
            objective[i] = crate::rational(sign, 1);
            let lp = LinearProgram { objective, constraints: ml_constraints(m) };
            match simplex::solve(&lp) {
                LpOutcome::Optimal { x, .. } if x[i] != p[i] => return Uniqueness::Multiple,
                LpOutcome::Optimal { .. } => {}
                _ => return Uniqueness::Unknown,
            }
        }
    }
    Uniqueness::Unique
}

/// Rank of a rational matrix by Gaussian elimination.
pub(crate) fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else { continue };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            if row[col].is_zero() {
                continue;
            }
            let factor = &row[col] / &pivot_row[col];
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x -= &factor * p;
            }
        }
        rank += 1;
    }
    rank
}

/// Exact membership test: `p ∈ Δ` and `M̃ p ≤ 0`.
pub fn is_maximal_exact(m: &MarginMatrix, p: &[Rational]) -> bool {
    p.len() == m.d()
        && p.iter().all(|x| !x.is_negative())
        && p.iter().sum::<Rational>().is_one()
        && m.apply(p).iter().all(|x| !x.is_positive())
}

/// Floating-point membership test: every component of `M̃ p` is at most `tol`.
pub fn is_maximal(m: &MarginMatrix, p: &[f64], tol: f64) -> bool {
    margin_payoffs(&m.to_f64(), p).iter().all(|&x| x <= tol)
}

/// `M̃ p` for a row-major `f64` matrix.
pub fn margin_payoffs(m: &[f64], p: &[f64]) -> Vec<f64> {
    let d = p.len();
    (0..d).map(|i| (0..d).map(|j| m[i * d + j] * p[j]).sum()).collect()
}

/// Alternative beating every other by a strict majority margin.
pub fn condorcet_winner(m: &MarginMatrix) -> Option<usize> {
    let d = m.d();
    (0..d).find(|&i| (0..d).all(|j| j == i || m.get(i, j).is_positive()))
}

/// Alternative losing to every other by a strict majority margin.
pub fn condorcet_loser(m: &MarginMatrix) -> Option<usize> {
    let d = m.d();
    if d < 2 {
        return None;
    }
    (0..d).find(|&i| (0..d).all(|j| j == i || m.get(i, j).is_negative()))
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn uniform(d: usize) -> Vec<f64> {
    vec![1.0 / d as f64; d]
}

pub fn degenerate(d: usize, i: usize) -> Vec<f64> {
    let mut p = vec![0.0; d];
    p[i] = 1.0;
    p
}

/// Formats an exact lottery as `(a, b, c)`.
pub fn format_exact(p: &[Rational]) -> String {
    let items: Vec<String> = p.iter().map(ToString::to_string).collect();
    format!("({})", items.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::prefs::parse_profile;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn reference_profiles() {
        let r = maximal_lottery(&catalog::condorcet_winner().margin_matrix()).unwrap();
        assert_eq!(r.lottery, vec![q(1, 1), q(0, 1), q(0, 1)]);
        assert_eq!(r.uniqueness, Uniqueness::Unique);
        assert_eq!(r.support, vec![0]);

        let r = maximal_lottery(&catalog::condorcet_cycle().margin_matrix()).unwrap();
        assert_eq!(r.lottery, vec![q(1, 3); 3]);
        assert_eq!(r.uniqueness, Uniqueness::Unique);

        let expected = vec![q(1, 3), q(1, 6), q(1, 2), q(0, 1)];
        for profile in [catalog::cycle_with_loser(), catalog::cycle_with_loser_table()] {
            let r = maximal_lottery(&profile.margin_matrix()).unwrap();
            assert_eq!(r.lottery, expected);
            assert_eq!(r.uniqueness, Uniqueness::Unique);
            assert_eq!(r.support, vec![0, 1, 2]);
        }
    }

    #[test]
    fn single_alternative() {
        let m = parse_profile("d=1\n3: 1").unwrap().margin_matrix();
        let r = maximal_lottery(&m).unwrap();
        assert_eq!(r.lottery, vec![q(1, 1)]);
        assert_eq!(r.uniqueness, Uniqueness::Unique);
        assert_eq!(condorcet_winner(&m), Some(0));
        assert_eq!(condorcet_loser(&m), None);
    }

    #[test]
    fn ties_give_multiple() {
        // Two voters with opposite rankings: every lottery is maximal.
        let m = parse_profile("d=3\n1: 1 2 3\n1: 3 2 1").unwrap().margin_matrix();
        let r = maximal_lottery(&m).unwrap();
        assert!(is_maximal_exact(&m, &r.lottery));
        assert_eq!(r.uniqueness, Uniqueness::Multiple);
        // Empty relations: zero margin matrix.
        let m = parse_profile("d=2\n1: pairs").unwrap().margin_matrix();
        assert_eq!(maximal_lottery(&m).unwrap().uniqueness, Uniqueness::Multiple);
    }

    #[test]
    fn membership() {
        let m = catalog::condorcet_winner().margin_matrix();
        assert!(is_maximal(&m, &[1.0, 0.0, 0.0], 0.0));
        assert!(!is_maximal(&m, &[0.0, 0.0, 1.0], 0.0));
        assert!(!is_maximal_exact(&m, &[q(0, 1), q(0, 1), q(1, 1)]));
        // uniform: maximal iff the largest row sum over d is within tol
        let max_row = (0..3).map(|i| (0..3).map(|j| rational_to_f64(m.get(i, j))).sum::<f64>()).fold(f64::MIN, f64::max);
        assert!(!is_maximal(&m, &uniform(3), max_row / 3.0 - 1e-9));
        assert!(is_maximal(&m, &uniform(3), max_row / 3.0 + 1e-12));
    }

    #[test]
    fn condorcet_detection() {
        let w = catalog::condorcet_winner().margin_matrix();
        let c = catalog::condorcet_cycle().margin_matrix();
        let l = catalog::cycle_with_loser().margin_matrix();
        assert_eq!(condorcet_winner(&w), Some(0));
        assert_eq!(condorcet_winner(&c), None);
        assert_eq!(condorcet_loser(&l), Some(3));
        assert_eq!(condorcet_loser(&c), None);
        assert_eq!(condorcet_loser(&w), Some(2));
    }

    #[test]
    fn rank_of_small_matrices() {
        assert_eq!(rank(vec![vec![q(1, 1), q(2, 1)], vec![q(2, 1), q(4, 1)]]), 1);
        assert_eq!(rank(vec![vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]]), 2);
    }
}
