//! Exact LP and convex QP solvers with dual multipliers, plus the recession
//! cone test that decides whether the continuous relaxation is bounded.
//!
//! Sign convention, used by every report in the crate: at an optimal `x`
//!
//! ```text
//! Q·x + c − eq_lhsᵀ·eq_duals + ineq_lhsᵀ·ineq_duals = 0,   ineq_duals ≥ 0,
//! ```
//!
//! with `ineq_lhs·x ≤ ineq_rhs` and exact complementary slackness.

mod boundedness;
mod lp;
mod qp;

pub use boundedness::{check_boundedness, BoundednessCertificate, BoundednessReport};
pub use lp::solve_lp;
pub use qp::solve_qp;
pub(crate) use qp::solve_qp_trusted;

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::numkit::{opt_rational_string, NumError, RatMat, RatVec, Rational};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("objective matrix is not positive semidefinite (witness {0})")]
    NotPsd(RatVec),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error("active-set iteration limit reached ({0} iterations)")]
    IterationLimit(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// `min objectiveᵀx` subject to `eq_lhs·x = eq_rhs`, `ineq_lhs·x ≤ ineq_rhs`, `x` free.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: RatVec,
    pub eq_lhs: RatMat,
    pub eq_rhs: RatVec,
    pub ineq_lhs: RatMat,
    pub ineq_rhs: RatVec,
}

/// `min ½xᵀQx + cᵀx` under the same constraint layout as [`LinearProgram`].
#[derive(Clone, Debug)]
pub struct QuadraticProgram {
    pub q: RatMat,
    pub c: RatVec,
    pub eq_lhs: RatMat,
    pub eq_rhs: RatVec,
    pub ineq_lhs: RatMat,
    pub ineq_rhs: RatVec,
}

impl LinearProgram {
    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub(crate) fn check_dims(&self) -> Result<(), SolveError> {
        check_constraint_dims(
            self.dim(),
            &self.eq_lhs,
            &self.eq_rhs,
            &self.ineq_lhs,
            &self.ineq_rhs,
        )
    }

    /// Feasibility problem over the given constraints (zero objective).
    pub fn feasibility(
        dim: usize,
        eq_lhs: RatMat,
        eq_rhs: RatVec,
        ineq_lhs: RatMat,
        ineq_rhs: RatVec,
    ) -> Self {
        LinearProgram {
            objective: RatVec::zeros(dim),
            eq_lhs,
            eq_rhs,
            ineq_lhs,
            ineq_rhs,
        }
    }
}

impl QuadraticProgram {
    pub fn dim(&self) -> usize {
        self.c.dim()
    }

    pub(crate) fn check_dims(&self) -> Result<(), SolveError> {
        let n = self.dim();
        if self.q.rows() != n || self.q.cols() != n {
            return Err(SolveError::DimMismatch(format!(
                "objective matrix is {}x{}, linear term has {n} entries",
                self.q.rows(),
                self.q.cols()
            )));
        }
        check_constraint_dims(n, &self.eq_lhs, &self.eq_rhs, &self.ineq_lhs, &self.ineq_rhs)
    }

    pub fn objective_at(&self, x: &[Rational]) -> Rational {
        self.q.quad_form(x) / crate::numkit::int(2) + self.c.dot(x)
    }

    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        self.eq_lhs.mul_vec(x) == self.eq_rhs
            && self
                .ineq_lhs
                .mul_vec(x)
                .iter()
                .zip(self.ineq_rhs.iter())
                .all(|(l, r)| l <= r)
    }

    /// Checks the exact KKT conditions of an `Optimal` report, or the
    /// recession-ray conditions of an `Unbounded` one.
    pub fn verify(&self, report: &SolveReport) -> Result<(), String> {
        match report.status {
            SolveStatus::Infeasible => Ok(()),
            SolveStatus::Unbounded => {
                let r = report.ray.as_ref().ok_or("unbounded report without ray")?;
                if !self.q.mul_vec(r).is_zero() {
                    return Err("ray has nonzero curvature".into());
                }
                if !self.eq_lhs.mul_vec(r).is_zero() {
                    return Err("ray leaves the equality constraints".into());
                }
                if self.ineq_lhs.mul_vec(r).iter().any(Signed::is_positive) {
                    return Err("ray violates an inequality".into());
                }
                if !self.c.dot(r).is_negative() {
                    return Err("objective does not decrease along the ray".into());
                }
                if !self.is_feasible(&report.x) {
                    return Err("base point is infeasible".into());
                }
                Ok(())
            }
            SolveStatus::Optimal => {
                let x = &report.x;
                if !self.is_feasible(x) {
                    return Err("primal infeasible".into());
                }
                if report.ineq_duals.iter().any(Signed::is_negative) {
                    return Err("negative inequality multiplier".into());
                }
                let slack = self.ineq_rhs.sub(&self.ineq_lhs.mul_vec(x));
                if slack
                    .iter()
                    .zip(report.ineq_duals.iter())
                    .any(|(s, y)| !(s * y).is_zero())
                {
                    return Err("complementary slackness fails".into());
                }
                let residual = self
                    .q
                    .mul_vec(x)
                    .add(&self.c)
                    .sub(&self.eq_lhs.tr_mul_vec(&report.eq_duals))
                    .add(&self.ineq_lhs.tr_mul_vec(&report.ineq_duals));
                if !residual.is_zero() {
                    return Err(format!("stationarity residual {residual}"));
                }
                match &report.value {
                    Some(v) if *v == self.objective_at(x) => Ok(()),
                    _ => Err("reported value does not match objective".into()),
                }
            }
        }
    }
}

fn check_constraint_dims(
    n: usize,
    eq_lhs: &RatMat,
    eq_rhs: &RatVec,
    ineq_lhs: &RatMat,
    ineq_rhs: &RatVec,
) -> Result<(), SolveError> {
    if eq_lhs.cols() != n || eq_lhs.rows() != eq_rhs.dim() {
        return Err(SolveError::DimMismatch(format!(
            "equality block is {}x{} with {} right-hand sides, expected {n} columns",
            eq_lhs.rows(),
            eq_lhs.cols(),
            eq_rhs.dim()
        )));
    }
    if ineq_lhs.cols() != n || ineq_lhs.rows() != ineq_rhs.dim() {
        return Err(SolveError::DimMismatch(format!(
            "inequality block is {}x{} with {} right-hand sides, expected {n} columns",
            ineq_lhs.rows(),
            ineq_lhs.cols(),
            ineq_rhs.dim()
        )));
    }
    Ok(())
}

/// Result of any optimization call in the crate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    #[serde(with = "opt_rational_string")]
    pub value: Option<Rational>,
    /// Optimal point, or the base point of the ray when unbounded. Empty when infeasible.
    pub x: RatVec,
    pub eq_duals: RatVec,
    pub ineq_duals: RatVec,
    pub ray: Option<RatVec>,
}

impl SolveReport {
    pub fn infeasible() -> Self {
        SolveReport {
            status: SolveStatus::Infeasible,
            value: None,
            x: RatVec::default(),
            eq_duals: RatVec::default(),
            ineq_duals: RatVec::default(),
            ray: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

impl LinearProgram {
    pub fn as_qp(&self) -> QuadraticProgram {
        QuadraticProgram {
            q: RatMat::zeros(self.dim(), self.dim()),
            c: self.objective.clone(),
            eq_lhs: self.eq_lhs.clone(),
            eq_rhs: self.eq_rhs.clone(),
            ineq_lhs: self.ineq_lhs.clone(),
            ineq_rhs: self.ineq_rhs.clone(),
        }
    }
}
