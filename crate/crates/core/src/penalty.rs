//! Penalty functions ψ on the residual `u = b − Ax`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::numkit::{ceil_sqrt, from_bigint, int, parse_rational, sqrt_upper, RatMat, RatVec, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PenaltyKind {
    Linf,
    L1,
    /// `‖u‖₂²`; level-bounded but not a norm.
    SqL2,
    /// `α‖u‖∞` for `α > 0`.
    ScaledLinf(Rational),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Penalty {
    pub kind: PenaltyKind,
    pub dim: usize,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PenaltyError {
    #[error("DIM_MISMATCH: penalty on {expected} entries, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("NEGATIVE_DELTA: level {0} is negative")]
    NegativeDelta(Rational),
    #[error("UNSUPPORTED_KIND: {0}")]
    UnsupportedKind(String),
    #[error("invalid penalty spec {0:?} (expected linf, l1, sql2 or slinf:ALPHA with ALPHA > 0)")]
    Parse(String),
}

impl PenaltyError {
    pub fn code(&self) -> &'static str {
        match self {
            PenaltyError::DimMismatch { .. } => "DIM_MISMATCH",
            PenaltyError::NegativeDelta(_) => "NEGATIVE_DELTA",
            PenaltyError::UnsupportedKind(_) => "UNSUPPORTED_KIND",
            PenaltyError::Parse(_) => "PARSE_ERROR",
        }
    }
}

impl FromStr for PenaltyKind {
    type Err = PenaltyError;

    fn from_str(spec: &str) -> Result<Self, PenaltyError> {
        match spec {
            "linf" => Ok(PenaltyKind::Linf),
            "l1" => Ok(PenaltyKind::L1),
            "sql2" => Ok(PenaltyKind::SqL2),
            _ => {
                let alpha = spec
                    .strip_prefix("slinf:")
                    .and_then(|a| parse_rational(a).ok())
                    .filter(Signed::is_positive)
                    .ok_or_else(|| PenaltyError::Parse(spec.to_string()))?;
                Ok(PenaltyKind::ScaledLinf(alpha))
            }
        }
    }
}

impl fmt::Display for PenaltyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PenaltyKind::Linf => write!(f, "linf"),
            PenaltyKind::L1 => write!(f, "l1"),
            PenaltyKind::SqL2 => write!(f, "sql2"),
            PenaltyKind::ScaledLinf(a) => write!(f, "slinf:{a}"),
        }
    }
}

impl Serialize for PenaltyKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Exact upper bound on a sublevel-set diameter; `exact` is false when the
/// true value is irrational and `bound` strictly exceeds it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelDiameter {
    pub bound: Rational,
    pub exact: bool,
}

/// Integers `γ, η ≥ 1` with `γ‖u‖∞ ≥ ψ(u) ≥ ‖u‖∞/γ` and `η‖u‖₂ ≥ ψ(u) ≥ ‖u‖₂/η`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormEquivConstants {
    #[serde(serialize_with = "bigint_string")]
    pub gamma: BigInt,
    #[serde(serialize_with = "bigint_string")]
    pub eta: BigInt,
}

fn bigint_string<S: serde::Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Linear rows over `(x, w, t)` whose feasible `w` are exactly `w ≥ ψ(b − Ax)`.
///
/// Column layout: the `n` columns of `x`, then `w`, then `aux` extra columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpigraphRows {
    pub ineq_lhs: RatMat,
    pub ineq_rhs: RatVec,
    pub eq_lhs: RatMat,
    pub eq_rhs: RatVec,
    pub aux: usize,
}

impl Penalty {
    pub fn new(kind: PenaltyKind, dim: usize) -> Self {
        Penalty { kind, dim }
    }

    pub fn parse(spec: &str, dim: usize) -> Result<Self, PenaltyError> {
        Ok(Penalty::new(spec.parse()?, dim))
    }

    pub fn is_norm(&self) -> bool {
        !matches!(self.kind, PenaltyKind::SqL2)
    }

    fn require_norm(&self, op: &str) -> Result<(), PenaltyError> {
        if self.is_norm() {
            Ok(())
        } else {
            Err(PenaltyError::UnsupportedKind(format!(
                "{op} needs a norm penalty, got {}",
                self.kind
            )))
        }
    }

    pub fn evaluate(&self, u: &[Rational]) -> Result<Rational, PenaltyError> {
        if u.len() != self.dim {
            return Err(PenaltyError::DimMismatch {
                expected: self.dim,
                got: u.len(),
            });
        }
        let v = RatVec::new(u.to_vec());
        Ok(match &self.kind {
            PenaltyKind::Linf => v.norm_inf(),
            PenaltyKind::L1 => v.norm1(),
            PenaltyKind::SqL2 => v.norm2_sq(),
            PenaltyKind::ScaledLinf(alpha) => alpha * v.norm_inf(),
        })
    }

    /// L∞ diameter of `{u : ψ(u) ≤ delta}`.
    pub fn level_diam(&self, delta: &Rational) -> Result<LevelDiameter, PenaltyError> {
        if delta.is_negative() {
            return Err(PenaltyError::NegativeDelta(delta.clone()));
        }
        let two = int(2);
        if self.dim == 0 {
            return Ok(LevelDiameter {
                bound: Rational::zero(),
                exact: true,
            });
        }
        Ok(match &self.kind {
            PenaltyKind::Linf | PenaltyKind::L1 => LevelDiameter {
                bound: two * delta,
                exact: true,
            },
            PenaltyKind::ScaledLinf(alpha) => LevelDiameter {
                bound: two * delta / alpha,
                exact: true,
            },
            PenaltyKind::SqL2 => {
                let root = sqrt_upper(delta);
                let exact = &root * &root == *delta;
                LevelDiameter {
                    bound: two * root,
                    exact,
                }
            }
        })
    }

    /// Rows encoding `ψ(b − Ax) ≤ w` (plus `w ≥ 0`).
    pub fn epigraph_rows(&self, a: &RatMat, b: &RatVec) -> Result<EpigraphRows, PenaltyError> {
        if a.rows() != self.dim || b.dim() != self.dim {
            return Err(PenaltyError::DimMismatch {
                expected: self.dim,
                got: a.rows(),
            });
        }
        let n = a.cols();
        let m = self.dim;
        let aux = if self.kind == PenaltyKind::L1 { m } else { 0 };
        let width = n + 1 + aux;
        let mut ineq_lhs = RatMat::zeros(0, width);
        let mut ineq_rhs = RatVec::default();
        let mut eq_lhs = RatMat::zeros(0, width);
        let mut eq_rhs = RatVec::default();

        let mut w_nonneg = vec![Rational::zero(); width];
        w_nonneg[n] = -Rational::one();
        ineq_lhs.push_row(&w_nonneg);
        ineq_rhs.push(Rational::zero());

        match &self.kind {
            PenaltyKind::SqL2 => {
                return Err(PenaltyError::UnsupportedKind(
                    "sql2 has no polyhedral epigraph; it is absorbed into the objective".into(),
                ))
            }
            PenaltyKind::Linf | PenaltyKind::ScaledLinf(_) => {
                let scale = match &self.kind {
                    PenaltyKind::ScaledLinf(alpha) => alpha.clone(),
                    _ => Rational::one(),
                };
                for i in 0..m {
                    for sign in [Rational::one(), -Rational::one()] {
                        // sign·α(A_i x − b_i) − w ≤ 0
                        let mut row = vec![Rational::zero(); width];
                        for (j, v) in a.row(i).iter().enumerate() {
                            row[j] = &sign * &scale * v;
                        }
                        row[n] = -Rational::one();
                        ineq_lhs.push_row(&row);
                        ineq_rhs.push(&sign * &scale * &b[i]);
                    }
                }
            }
            PenaltyKind::L1 => {
                for i in 0..m {
                    for sign in [Rational::one(), -Rational::one()] {
                        // sign·(A_i x − b_i) − t_i ≤ 0
                        let mut row = vec![Rational::zero(); width];
                        for (j, v) in a.row(i).iter().enumerate() {
                            row[j] = &sign * v;
                        }
                        row[n + 1 + i] = -Rational::one();
                        ineq_lhs.push_row(&row);
                        ineq_rhs.push(&sign * &b[i]);
                    }
                }
                let mut row = vec![Rational::zero(); width];
                row[n] = Rational::one();
                for v in row.iter_mut().skip(n + 1) {
                    *v = -Rational::one();
                }
                eq_lhs.push_row(&row);
                eq_rhs.push(Rational::zero());
            }
        }
        Ok(EpigraphRows {
            ineq_lhs,
            ineq_rhs,
            eq_lhs,
            eq_rhs,
            aux,
        })
    }

    pub fn norm_constants(&self) -> Result<NormEquivConstants, PenaltyError> {
        self.require_norm("norm_constants")?;
        let one = BigInt::one();
        if self.dim <= 1 {
            let (gamma, eta) = match &self.kind {
                PenaltyKind::ScaledLinf(alpha) => {
                    let g = scale_gamma(alpha);
                    (g.clone(), g)
                }
                _ => (one.clone(), one),
            };
            return Ok(NormEquivConstants { gamma, eta });
        }
        let root_m = ceil_sqrt(&int(self.dim as i64));
        let (gamma, eta) = match &self.kind {
            PenaltyKind::Linf => (one, root_m),
            PenaltyKind::L1 => (BigInt::from(self.dim), root_m),
            PenaltyKind::ScaledLinf(alpha) => {
                let up = alpha.ceil().to_integer();
                let down = (from_bigint(root_m) / alpha).ceil().to_integer();
                (scale_gamma(alpha), up.max(down).max(one))
            }
            PenaltyKind::SqL2 => unreachable!(),
        };
        Ok(NormEquivConstants { gamma, eta })
    }
}

/// `⌈max(α, 1/α)⌉`.
fn scale_gamma(alpha: &Rational) -> BigInt {
    let inv = alpha.recip();
    if *alpha >= inv { alpha } else { &inv }.ceil().to_integer()
}
