//! Dense two-phase simplex method over exact rationals.
//!
//! Pivoting follows Bland's rule (lowest eligible index for both the entering
//! and the leaving variable), so the method terminates on degenerate problems.
//! Intended for the small programs arising from margin matrices.

use num::{Signed, Zero};

use crate::{rational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `maximize objective · x` subject to the constraints and `x ≥ 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

struct Tableau {
    // rows[r] has `cols` coefficients followed by the right-hand side
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col].clone();
        for x in self.rows[row].iter_mut() {
            *x /= &piv;
        }
        let pivot_row = self.rows[row].clone();
        for (r, other) in self.rows.iter_mut().enumerate() {
            if r == row || other[col].is_zero() {
                continue;
            }
            let factor = other[col].clone();
            for (x, p) in other.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &factor * p;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Maximizes `cost · x` over the columns allowed by `usable`. Returns
    /// false when the objective is unbounded.
    fn optimize(&mut self, cost: &[Rational], usable: &dyn Fn(usize) -> bool) -> bool {
        loop {
            // reduced cost of column j: cost_j - sum_r cost_{basis r} * a_rj
            let entering = (0..self.cols).filter(|&j| usable(j) && !self.basis.contains(&j)).find(|&j| {
                let z = self
                    .rows
                    .iter()
                    .zip(&self.basis)
                    .filter(|(row, _)| !row[j].is_zero())
                    .fold(Rational::zero(), |acc, (row, &b)| acc + &cost[b] * &row[j]);
                (&cost[j] - z).is_positive()
            });
            let Some(col) = entering else { return true };
            let rhs = self.cols;
            let mut leaving: Option<(usize, Rational)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if !row[col].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[col];
                let better = match &leaving {
                    None => true,
                    Some((lr, best)) => ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr]),
                };
                if better {
                    leaving = Some((r, ratio));
                }
            }
            match leaving {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }

    fn value_of(&self, col: usize) -> Rational {
        self.basis
            .iter()
            .position(|&b| b == col)
            .map(|r| self.rows[r][self.cols].clone())
            .unwrap_or_else(Rational::zero)
    }
}

pub fn solve(lp: &LinearProgram) -> LpOutcome {
    let n = lp.objective.len();
    let m = lp.constraints.len();
    // Normalize to nonnegative right-hand sides.
    let normalized: Vec<(Vec<Rational>, Relation, Rational)> = lp
        .constraints
        .iter()
        .map(|c| {
            assert_eq!(c.coeffs.len(), n, "constraint width differs from objective");
            if c.rhs.is_negative() {
                let rel = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (c.coeffs.iter().map(|x| -x).collect(), rel, -c.rhs.clone())
            } else {
                (c.coeffs.clone(), c.relation, c.rhs.clone())
            }
        })
        .collect();

    let n_slack = normalized.iter().filter(|(_, rel, _)| *rel != Relation::Eq).count();
    let n_art = normalized.iter().filter(|(_, rel, _)| *rel != Relation::Le).count();
    let cols = n + n_slack + n_art;
    let first_art = n + n_slack;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut s, mut a) = (n, first_art);
    for (coeffs, rel, rhs) in normalized {
        let mut row = vec![Rational::zero(); cols + 1];
        row[..n].clone_from_slice(&coeffs);
        row[cols] = rhs;
        match rel {
            Relation::Le => {
                row[s] = rational(1, 1);
                basis.push(s);
                s += 1;
            }
            Relation::Ge => {
                row[s] = rational(-1, 1);
                s += 1;
                row[a] = rational(1, 1);
                basis.push(a);
                a += 1;
            }
            Relation::Eq => {
                row[a] = rational(1, 1);
                basis.push(a);
                a += 1;
            }
        }
        rows.push(row);
    }
    let mut tab = Tableau { rows, basis, cols };

    if n_art > 0 {
        let phase1: Vec<Rational> =
            (0..cols).map(|j| if j >= first_art { rational(-1, 1) } else { Rational::zero() }).collect();
        tab.optimize(&phase1, &|_| true);
        let infeasibility: Rational = (first_art..cols).map(|j| tab.value_of(j)).sum();
        if infeasibility.is_positive() {
            return LpOutcome::Infeasible;
        }
        // Drive degenerate artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= first_art {
                match (0..first_art).find(|&j| !tab.rows[r][j].is_zero()) {
                    Some(col) => {
                        tab.pivot(r, col);
                        r += 1;
                    }
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }

    let mut cost = vec![Rational::zero(); cols];
    cost[..n].clone_from_slice(&lp.objective);
    if !tab.optimize(&cost, &|j| j < first_art) {
        return LpOutcome::Unbounded;
    }
    let x: Vec<Rational> = (0..n).map(|j| tab.value_of(j)).collect();
    let value = x.iter().zip(&lp.objective).map(|(xi, ci)| xi * ci).sum();
    LpOutcome::Optimal { x, value }
}
