//! Integer optimum by enumeration, the continuous relaxation and its
//! multipliers, and the augmented Lagrangian relaxation
//!
//! ```text
//! z_ρ(λ) = inf { cᵀx + ½xᵀQx + λᵀ(b − Ax) + ρψ(b − Ax) : Ex ≤ f, x₂ integer }
//! ```
//!
//! evaluated exactly by enumerating the integer part over an LP-derived box.

pub(crate) mod slices;
mod sweep;

pub use sweep::{
    dual_ascent, gap_sweep, gap_sweep_with, violation_bound_check, DualAscent, SweepRow,
    ViolationBound,
};

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::convexsolve::{solve_lp, solve_qp, LinearProgram, SolveError, SolveReport, SolveStatus};
use crate::instance::MiqpInstance;
use crate::numkit::{int, RatMat, RatVec, Rational};
use crate::penalty::{Penalty, PenaltyError};
use slices::{Decomposition, Slice, SliceValue};

/// Enumeration is refused above this many integer assignments.
pub const MAX_BOX_POINTS: u64 = 5_000_000;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AldError {
    #[error("UNBOUNDED_INTEGER_VAR({0}): no finite LP bound on this integer variable")]
    UnboundedIntegerVar(usize),
    #[error("integer box has more than {MAX_BOX_POINTS} points")]
    BoxTooLarge,
    #[error("NLP_UNBOUNDED: the continuous relaxation is unbounded below")]
    NlpUnbounded,
    #[error("NLP_INFEASIBLE: the continuous relaxation is infeasible")]
    NlpInfeasible,
    #[error("INFEASIBLE: the integer problem has no feasible point")]
    IpInfeasible,
    #[error("UNBOUNDED: the integer problem is unbounded below")]
    IpUnbounded,
    #[error("multiplier has {got} entries, A has {expected} rows")]
    DimMismatch { expected: usize, got: usize },
    #[error("penalty weight {0} is negative")]
    NegativeRho(Rational),
    #[error("penalty weights must be strictly increasing")]
    UnsortedSchedule,
    #[error("INVARIANT_BREACH: {0}")]
    InvariantBreach(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
}

/// Componentwise integer bounds on `x₂`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntegerBox {
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
}

impl IntegerBox {
    pub fn is_empty(&self) -> bool {
        self.lower.iter().zip(&self.upper).any(|(l, u)| l > u)
    }

    pub fn count(&self) -> u64 {
        if self.is_empty() {
            return 0;
        }
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (u - l + 1) as u64)
            .fold(1u64, u64::saturating_mul)
    }

    /// All points in lexicographic order.
    pub fn points(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        let mut next = if self.is_empty() {
            None
        } else {
            Some(self.lower.clone())
        };
        std::iter::from_fn(move || {
            let current = next.take()?;
            let mut succ = current.clone();
            for j in (0..succ.len()).rev() {
                if succ[j] < self.upper[j] {
                    succ[j] += 1;
                    next = Some(succ);
                    break;
                }
                succ[j] = self.lower[j];
            }
            Some(current)
        })
    }
}

/// Bounds each integer coordinate by LP over `{Ex ≤ f}`.
pub fn integer_box(inst: &MiqpInstance) -> Result<IntegerBox, AldError> {
    let n = inst.n();
    let mut lower = Vec::with_capacity(inst.n2);
    let mut upper = Vec::with_capacity(inst.n2);
    for j in inst.n1..n {
        let mut bounds = [0i64; 2];
        for (k, sign) in [1, -1].into_iter().enumerate() {
            let mut objective = RatVec::zeros(n);
            objective[j] = int(sign);
            let rep = solve_lp(&LinearProgram {
                objective,
                eq_lhs: RatMat::zeros(0, n),
                eq_rhs: RatVec::default(),
                ineq_lhs: inst.e.clone(),
                ineq_rhs: inst.f.clone(),
            })?;
            match rep.status {
                SolveStatus::Infeasible => {
                    return Ok(IntegerBox {
                        lower: vec![1; inst.n2],
                        upper: vec![0; inst.n2],
                    })
                }
                SolveStatus::Unbounded => return Err(AldError::UnboundedIntegerVar(j)),
                SolveStatus::Optimal => {
                    let v = rep.value.expect("optimal LP has a value");
                    let b: BigInt = if sign == 1 {
                        v.ceil().to_integer()
                    } else {
                        (-v).floor().to_integer()
                    };
                    bounds[k] = b.to_i64().ok_or(AldError::BoxTooLarge)?;
                }
            }
        }
        lower.push(bounds[0]);
        upper.push(bounds[1]);
    }
    let b = IntegerBox { lower, upper };
    if b.count() > MAX_BOX_POINTS {
        return Err(AldError::BoxTooLarge);
    }
    Ok(b)
}

/// Value of the relaxation: `−∞` when a slice subproblem is unbounded,
/// `+∞` when no integer assignment is feasible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelaxValue {
    NegInfinity,
    Finite(Rational),
    PosInfinity,
}

impl RelaxValue {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            RelaxValue::Finite(v) => Some(v),
            _ => None,
        }
    }
}

impl PartialOrd for RelaxValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RelaxValue {
    fn cmp(&self, other: &Self) -> Ordering {
        use RelaxValue::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (NegInfinity, NegInfinity) | (PosInfinity, PosInfinity) => Ordering::Equal,
            (NegInfinity, _) | (_, PosInfinity) => Ordering::Less,
            (_, NegInfinity) | (PosInfinity, _) => Ordering::Greater,
        }
    }
}

impl fmt::Display for RelaxValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelaxValue::NegInfinity => write!(f, "-inf"),
            RelaxValue::Finite(v) => write!(f, "{v}"),
            RelaxValue::PosInfinity => write!(f, "+inf"),
        }
    }
}

impl Serialize for RelaxValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelaxReport {
    pub value: RelaxValue,
    /// Minimiser, or the base point of a descent ray when the value is `−∞`.
    pub argmin_x: RatVec,
    /// `ψ(b − A·argmin_x)`
    #[serde(with = "crate::numkit::rational_string")]
    pub violation: Rational,
    pub assignment: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_assignment: Option<Vec<(Vec<i64>, RelaxValue)>>,
}

/// Precomputed enumeration data for repeated evaluations on one instance.
pub struct Relaxation<'a> {
    inst: &'a MiqpInstance,
    pub(crate) dec: Decomposition,
    pub(crate) slices: Vec<Slice>,
    ibox: IntegerBox,
}

impl<'a> Relaxation<'a> {
    pub fn new(inst: &'a MiqpInstance) -> Result<Self, AldError> {
        let ibox = integer_box(inst)?;
        let dec = Decomposition::new(inst);
        let mut slices = Vec::new();
        for x2 in ibox.points() {
            if let Some(s) = dec.slice(&x2) {
                if dec.slice_feasible(&s)? {
                    slices.push(s);
                }
            }
        }
        Ok(Relaxation {
            inst,
            dec,
            slices,
            ibox,
        })
    }

    pub fn instance(&self) -> &MiqpInstance {
        self.inst
    }

    pub fn integer_box(&self) -> &IntegerBox {
        &self.ibox
    }

    /// Integer assignments whose continuous slice is nonempty.
    pub fn assignments(&self) -> impl Iterator<Item = &[i64]> {
        self.slices.iter().map(|s| s.x2.as_slice())
    }

    fn check(&self, lambda: &RatVec, rho: &Rational, p: &Penalty) -> Result<(), AldError> {
        let m = self.inst.m();
        if lambda.dim() != m {
            return Err(AldError::DimMismatch {
                expected: m,
                got: lambda.dim(),
            });
        }
        if p.dim != m {
            return Err(PenaltyError::DimMismatch {
                expected: m,
                got: p.dim,
            }
            .into());
        }
        if rho.is_negative() {
            return Err(AldError::NegativeRho(rho.clone()));
        }
        Ok(())
    }

    pub fn eval(&self, lambda: &RatVec, rho: &Rational, p: &Penalty) -> Result<RelaxReport, AldError> {
        self.eval_inner(lambda, rho, p, false)
    }

    /// Like [`Relaxation::eval`], also recording every slice value.
    pub fn eval_table(&self, lambda: &RatVec, rho: &Rational, p: &Penalty) -> Result<RelaxReport, AldError> {
        self.eval_inner(lambda, rho, p, true)
    }

    fn eval_inner(
        &self,
        lambda: &RatVec,
        rho: &Rational,
        p: &Penalty,
        table: bool,
    ) -> Result<RelaxReport, AldError> {
        self.check(lambda, rho, p)?;
        let mut best: Option<(RelaxValue, RatVec, &Slice)> = None;
        let mut rows = table.then(Vec::new);
        for s in &self.slices {
            let (value, x1) = match self.dec.solve_lr_slice(s, lambda, rho, p)? {
                SliceValue::Infeasible => continue,
                SliceValue::Unbounded { x1, .. } => (RelaxValue::NegInfinity, x1),
                SliceValue::Finite { value, x1 } => (RelaxValue::Finite(value), x1),
            };
            if let Some(rows) = rows.as_mut() {
                rows.push((s.x2.clone(), value.clone()));
            }
            if best.as_ref().is_none_or(|(b, _, _)| value < *b) {
                let stop = value == RelaxValue::NegInfinity && rows.is_none();
                best = Some((value, x1, s));
                if stop {
                    break;
                }
            }
        }
        Ok(match best {
            None => RelaxReport {
                value: RelaxValue::PosInfinity,
                argmin_x: RatVec::default(),
                violation: Rational::zero(),
                assignment: Vec::new(),
                per_assignment: rows,
            },
            Some((value, x1, s)) => {
                let x = self.dec.full_x(&x1, s);
                let violation = p.evaluate(&self.inst.b.sub(&self.inst.a.mul_vec(&x)))?;
                RelaxReport {
                    value,
                    argmin_x: x,
                    violation,
                    assignment: s.x2.clone(),
                    per_assignment: rows,
                }
            }
        })
    }

    /// Exact integer optimum; ties go to the lexicographically smallest `x₂`.
    pub fn solve_ip(&self) -> Result<SolveReport, AldError> {
        let mut best: Option<(Rational, RatVec)> = None;
        for s in &self.slices {
            match self.dec.solve_ip_slice(s)? {
                SliceValue::Infeasible => {}
                SliceValue::Unbounded { x1, ray } => {
                    return Ok(SolveReport {
                        status: SolveStatus::Unbounded,
                        value: None,
                        x: self.dec.full_x(&x1, s),
                        eq_duals: RatVec::default(),
                        ineq_duals: RatVec::default(),
                        ray: Some(ray.concat(&RatVec::zeros(self.inst.n2))),
                    })
                }
                SliceValue::Finite { value, x1 } => {
                    if best.as_ref().is_none_or(|(b, _)| value < *b) {
                        best = Some((value, self.dec.full_x(&x1, s)));
                    }
                }
            }
        }
        Ok(match best {
            None => SolveReport::infeasible(),
            Some((value, x)) => SolveReport {
                status: SolveStatus::Optimal,
                value: Some(value),
                x,
                eq_duals: RatVec::default(),
                ineq_duals: RatVec::default(),
                ray: None,
            },
        })
    }
}

/// Integer optimum by enumeration. Multiplier fields of the report are empty.
pub fn solve_ip(inst: &MiqpInstance) -> Result<SolveReport, AldError> {
    Relaxation::new(inst)?.solve_ip()
}

pub fn eval_lr_plus(
    inst: &MiqpInstance,
    lambda: &RatVec,
    rho: &Rational,
    p: &Penalty,
) -> Result<RelaxReport, AldError> {
    Relaxation::new(inst)?.eval(lambda, rho, p)
}

/// Optimal multipliers of the continuous relaxation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LambdaBar {
    pub lambda_bar: RatVec,
    /// Multipliers of `Ex ≤ f`, nonnegative in the crate-wide sign convention.
    pub lambda_e: RatVec,
    #[serde(with = "crate::numkit::rational_string")]
    pub z_nlp: Rational,
    pub x: RatVec,
}

pub fn lambda_bar(inst: &MiqpInstance) -> Result<LambdaBar, AldError> {
    let rep = solve_qp(&inst.relaxation())?;
    match rep.status {
        SolveStatus::Infeasible => Err(AldError::NlpInfeasible),
        SolveStatus::Unbounded => Err(AldError::NlpUnbounded),
        SolveStatus::Optimal => Ok(LambdaBar {
            lambda_bar: rep.eq_duals,
            lambda_e: rep.ineq_duals,
            z_nlp: rep.value.expect("optimal report has a value"),
            x: rep.x,
        }),
    }
}

/// `z^IP`, `z^NLP` and `λ̄` together, for the operations that need all three.
#[derive(Clone, Debug)]
pub struct Baseline {
    pub z_ip: Rational,
    pub x_ip: RatVec,
    pub nlp: LambdaBar,
}

impl Baseline {
    pub fn compute(relax: &Relaxation<'_>) -> Result<Self, AldError> {
        let ip = relax.solve_ip()?;
        match ip.status {
            SolveStatus::Infeasible => return Err(AldError::IpInfeasible),
            SolveStatus::Unbounded => return Err(AldError::IpUnbounded),
            SolveStatus::Optimal => {}
        }
        let nlp = lambda_bar(relax.instance())?;
        Ok(Baseline {
            z_ip: ip.value.expect("optimal report has a value"),
            x_ip: ip.x,
            nlp,
        })
    }

    pub fn gap(&self) -> Rational {
        &self.z_ip - &self.nlp.z_nlp
    }
}
