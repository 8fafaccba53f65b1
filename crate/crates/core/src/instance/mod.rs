//! MIQP problem data, validation, the JSON file format and a seeded generator.

mod generate;
mod io;

pub use generate::{generate, generate_planted, GenConfig};
pub use io::{instance_from_json, instance_to_json, read_instance, write_instance, InstanceError};

use std::fmt;

use crate::convexsolve::QuadraticProgram;
use crate::numkit::{is_integer, ldl_psd_check, int, RatMat, RatVec, Rational};

/// `min cᵀx + ½xᵀQx` s.t. `Ax = b`, `Ex ≤ f`, with the first `n1`
/// variables continuous and the remaining `n2` integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MiqpInstance {
    pub n1: usize,
    pub n2: usize,
    pub q: RatMat,
    pub c: RatVec,
    pub a: RatMat,
    pub b: RatVec,
    pub e: RatMat,
    pub f: RatVec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Dim(String),
    NotSymmetric,
    NotPsd { witness: RatVec },
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::Dim(_) => "DIM",
            Violation::NotSymmetric => "NOT_SYMMETRIC",
            Violation::NotPsd { .. } => "NOT_PSD",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Dim(msg) => write!(f, "DIM: {msg}"),
            Violation::NotSymmetric => write!(f, "NOT_SYMMETRIC: Q is not symmetric"),
            Violation::NotPsd { witness } => {
                write!(f, "NOT_PSD: vᵀQv < 0 for v = {witness}")
            }
        }
    }
}

impl MiqpInstance {
    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }

    /// Number of dualized equality rows.
    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn objective(&self, x: &[Rational]) -> Rational {
        self.c.dot(x) + self.q.quad_form(x) / int(2)
    }

    /// Ax = b, Ex ≤ f and integrality of the last `n2` coordinates.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.n()
            && x[self.n1..].iter().all(is_integer)
            && self.a.mul_vec(x) == self.b
            && self
                .e
                .mul_vec(x)
                .iter()
                .zip(self.f.iter())
                .all(|(l, r)| l <= r)
    }

    /// The continuous relaxation as a QP.
    pub fn relaxation(&self) -> QuadraticProgram {
        QuadraticProgram {
            q: self.q.clone(),
            c: self.c.clone(),
            eq_lhs: self.a.clone(),
            eq_rhs: self.b.clone(),
            ineq_lhs: self.e.clone(),
            ineq_rhs: self.f.clone(),
        }
    }

    /// Checks every static invariant; returns all violations found.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let n = self.n();
        let mut out = Vec::new();
        let mut dim = |ok: bool, msg: String| {
            if !ok {
                out.push(Violation::Dim(msg));
            }
        };
        dim(
            self.q.rows() == n && self.q.cols() == n,
            format!("Q is {}x{}, n1 + n2 = {n}", self.q.rows(), self.q.cols()),
        );
        dim(self.c.dim() == n, format!("c has {} entries, n1 + n2 = {n}", self.c.dim()));
        dim(self.a.cols() == n, format!("A has {} columns, n1 + n2 = {n}", self.a.cols()));
        dim(
            self.b.dim() == self.a.rows(),
            format!("b has {} entries, A has {} rows", self.b.dim(), self.a.rows()),
        );
        dim(self.e.cols() == n, format!("E has {} columns, n1 + n2 = {n}", self.e.cols()));
        dim(
            self.f.dim() == self.e.rows(),
            format!("f has {} entries, E has {} rows", self.f.dim(), self.e.rows()),
        );
        if self.q.is_square() {
            if !self.q.is_symmetric() {
                out.push(Violation::NotSymmetric);
            } else if let Ok(report) = ldl_psd_check(&self.q) {
                if !report.is_psd {
                    out.push(Violation::NotPsd {
                        witness: report.witness.unwrap_or_default(),
                    });
                }
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }
}

/// The two-variable reference instance: `min x₁² + x₂²` s.t. `x₁ + x₂ = 1`,
/// `−3 ≤ xᵢ ≤ 3`, both integer.
pub fn reference_instance() -> MiqpInstance {
    MiqpInstance {
        n1: 0,
        n2: 2,
        q: RatMat::from_ints(&[&[2, 0], &[0, 2]]),
        c: RatVec::from_ints(&[0, 0]),
        a: RatMat::from_ints(&[&[1, 1]]),
        b: RatVec::from_ints(&[1]),
        e: RatMat::from_ints(&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]]),
        f: RatVec::from_ints(&[3, 3, 3, 3]),
    }
}
