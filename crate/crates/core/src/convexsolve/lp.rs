//! Two-phase dense tableau simplex over the rationals with Bland's rule.
//!
//! Free variables are split as `x = x⁺ − x⁻`, inequality rows receive a
//! slack, and every row gets an artificial column. The artificial columns
//! are kept in the tableau after phase one so that they carry `B⁻¹`, from
//! which the row duals are read off at the end.

use num_traits::{Signed, Zero};

use super::{LinearProgram, SolveError, SolveReport, SolveStatus};
use crate::numkit::{RatVec, Rational};

pub fn solve_lp(lp: &LinearProgram) -> Result<SolveReport, SolveError> {
    lp.check_dims()?;
    Ok(Tableau::build(lp).solve(lp))
}

struct Tableau {
    n: usize,
    n_eq: usize,
    n_in: usize,
    /// Each row: `width` coefficients then the right-hand side.
    rows: Vec<Vec<Rational>>,
    /// Reduced costs for the active phase; last entry is minus the objective.
    cost: Vec<Rational>,
    basis: Vec<usize>,
    /// `-1` when the row was negated to make its right-hand side nonnegative.
    negated: Vec<bool>,
}

impl Tableau {
    fn art_start(&self) -> usize {
        2 * self.n + self.n_in
    }

    fn width(&self) -> usize {
        self.art_start() + self.rows.len()
    }

    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.dim();
        let n_eq = lp.eq_lhs.rows();
        let n_in = lp.ineq_lhs.rows();
        let n_rows = n_eq + n_in;
        let art_start = 2 * n + n_in;
        let width = art_start + n_rows;

        let mut rows = Vec::with_capacity(n_rows);
        let mut negated = Vec::with_capacity(n_rows);
        for r in 0..n_rows {
            let (coeffs, rhs) = if r < n_eq {
                (lp.eq_lhs.row(r), &lp.eq_rhs[r])
            } else {
                (lp.ineq_lhs.row(r - n_eq), &lp.ineq_rhs[r - n_eq])
            };
            let mut row = vec![Rational::zero(); width + 1];
            for (j, a) in coeffs.iter().enumerate() {
                if !a.is_zero() {
                    row[j] = a.clone();
                    row[n + j] = -a;
                }
            }
            if r >= n_eq {
                row[2 * n + (r - n_eq)] = Rational::from_integer(1.into());
            }
            row[width] = rhs.clone();
            let flip = rhs.is_negative();
            if flip {
                for v in row.iter_mut() {
                    if !v.is_zero() {
                        *v = -&*v;
                    }
                }
            }
            row[art_start + r] = Rational::from_integer(1.into());
            rows.push(row);
            negated.push(flip);
        }

        // phase-one reduced costs: 1 on artificials minus the sum of all rows
        let mut cost = vec![Rational::zero(); width + 1];
        for row in &rows {
            for (c, v) in cost.iter_mut().zip(row) {
                if !v.is_zero() {
                    *c -= v;
                }
            }
        }
        for r in 0..n_rows {
            cost[art_start + r] = Rational::zero();
        }

        Tableau {
            n,
            n_eq,
            n_in,
            rows,
            cost,
            basis: (art_start..width).collect(),
            negated,
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let inv = self.rows[r][j].recip();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let eliminate = |row: &mut Vec<Rational>| {
            if row[j].is_zero() {
                return;
            }
            let f = row[j].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.cost);
        self.rows[r] = pivot_row;
        self.basis[r] = j;
    }

    /// Bland's rule: smallest eligible entering column.
    fn entering(&self) -> Option<usize> {
        (0..self.art_start()).find(|&j| self.cost[j].is_negative())
    }

    /// Minimum ratio row, ties broken by the smallest basic variable index.
    fn leaving(&self, j: usize) -> Option<usize> {
        let rhs = self.width();
        let mut best: Option<(usize, Rational)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            if !row[j].is_positive() {
                continue;
            }
            let ratio = &row[rhs] / &row[j];
            let better = match &best {
                None => true,
                Some((br, b)) => ratio < *b || (ratio == *b && self.basis[r] < self.basis[*br]),
            };
            if better {
                best = Some((r, ratio));
            }
        }
        best.map(|(r, _)| r)
    }

    fn basic_values(&self) -> Vec<Rational> {
        let mut z = vec![Rational::zero(); self.width()];
        let rhs = self.width();
        for (r, &b) in self.basis.iter().enumerate() {
            z[b] = self.rows[r][rhs].clone();
        }
        z
    }

    fn primal(&self, z: &[Rational]) -> RatVec {
        (0..self.n).map(|j| &z[j] - &z[self.n + j]).collect()
    }

    fn solve(mut self, lp: &LinearProgram) -> SolveReport {
        // phase one
        while let Some(j) = self.entering() {
            let r = self
                .leaving(j)
                .expect("phase-one objective is bounded below by zero");
            self.pivot(r, j);
        }
        let width = self.width();
        if self.cost[width].is_negative() {
            return SolveReport::infeasible();
        }
        let art_start = self.art_start();
        for r in 0..self.rows.len() {
            if self.basis[r] < art_start {
                continue;
            }
            if let Some(j) = (0..art_start).find(|&j| !self.rows[r][j].is_zero()) {
                self.pivot(r, j);
            }
        }

        // phase two
        let n = self.n;
        let mut c2 = vec![Rational::zero(); width];
        for j in 0..n {
            c2[j] = lp.objective[j].clone();
            c2[n + j] = -&lp.objective[j];
        }
        let mut cost: Vec<Rational> = c2.iter().cloned().chain([Rational::zero()]).collect();
        for (r, &b) in self.basis.iter().enumerate() {
            if c2[b].is_zero() {
                continue;
            }
            for (c, v) in cost.iter_mut().zip(&self.rows[r]) {
                if !v.is_zero() {
                    *c -= &c2[b] * v;
                }
            }
        }
        self.cost = cost;

        while let Some(j) = self.entering() {
            match self.leaving(j) {
                Some(r) => self.pivot(r, j),
                None => {
                    let z = self.basic_values();
                    let mut dz = vec![Rational::zero(); width];
                    dz[j] = Rational::from_integer(1.into());
                    for (r, &b) in self.basis.iter().enumerate() {
                        dz[b] = -&self.rows[r][j];
                    }
                    let x = self.primal(&z);
                    let value = lp.objective.dot(&x);
                    return SolveReport {
                        status: SolveStatus::Unbounded,
                        value: Some(value),
                        x,
                        eq_duals: RatVec::default(),
                        ineq_duals: RatVec::default(),
                        ray: Some(self.primal(&dz)),
                    };
                }
            }
        }

        let z = self.basic_values();
        let x = self.primal(&z);
        let value = lp.objective.dot(&x);
        // y = c_Bᵀ B⁻¹ for the sign-adjusted rows; artificial reduced costs are -y.
        let row_dual = |r: usize| {
            let y = -&self.cost[art_start + r];
            if self.negated[r] {
                -y
            } else {
                y
            }
        };
        let eq_duals = (0..self.n_eq).map(row_dual).collect();
        let ineq_duals = (0..self.n_in).map(|i| -row_dual(self.n_eq + i)).collect();
        SolveReport {
            status: SolveStatus::Optimal,
            value: Some(value),
            x,
            eq_duals,
            ineq_duals,
            ray: None,
        }
    }
}
