//! Boundedness of the continuous relaxation via its recession cone.
//!
//! The relaxation (assumed feasible) is bounded below iff no `r` satisfies
//! `cᵀr < 0, Ar = 0, Er ≤ 0, Qr = 0`. That is decided by one LP over the
//! cone; its duals give the Farkas multipliers when bounded, and its ray
//! gives the certificate otherwise.

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::Serialize;

use super::{solve_lp, LinearProgram, SolveError, SolveStatus};
use crate::instance::MiqpInstance;
use crate::numkit::{denominator_lcm, from_bigint, RatVec, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundednessCertificate {
    /// `λ_Eᵀ E + λ_Aᵀ A + λ_Qᵀ Q = cᵀ` with `λ_E ≤ 0`.
    Farkas {
        lambda_e: RatVec,
        lambda_a: RatVec,
        lambda_q: RatVec,
    },
    /// Integral `r` with `cᵀr ≤ −1`, `Ar = 0`, `Er ≤ 0`, `Qr = 0`.
    Ray { ray: RatVec },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundednessReport {
    pub nlp_bounded: bool,
    pub certificate: BoundednessCertificate,
}

impl BoundednessReport {
    /// Re-checks the certificate against `inst` in exact arithmetic.
    pub fn verify(&self, inst: &MiqpInstance) -> Result<(), String> {
        match &self.certificate {
            BoundednessCertificate::Farkas {
                lambda_e,
                lambda_a,
                lambda_q,
            } => {
                if !self.nlp_bounded {
                    return Err("Farkas certificate on an unbounded verdict".into());
                }
                if lambda_e.iter().any(Signed::is_positive) {
                    return Err("λ_E has a positive entry".into());
                }
                let lhs = inst
                    .e
                    .tr_mul_vec(lambda_e)
                    .add(&inst.a.tr_mul_vec(lambda_a))
                    .add(&inst.q.tr_mul_vec(lambda_q));
                if lhs != inst.c {
                    return Err(format!("multipliers give {lhs}, expected c = {}", inst.c));
                }
                Ok(())
            }
            BoundednessCertificate::Ray { ray } => {
                if self.nlp_bounded {
                    return Err("ray certificate on a bounded verdict".into());
                }
                if !ray.iter().all(crate::numkit::is_integer) {
                    return Err("ray is not integral".into());
                }
                if inst.c.dot(ray) > -Rational::one() {
                    return Err("cᵀr > −1".into());
                }
                if !inst.a.mul_vec(ray).is_zero() || !inst.q.mul_vec(ray).is_zero() {
                    return Err("Ar or Qr is nonzero".into());
                }
                if inst.e.mul_vec(ray).iter().any(Signed::is_positive) {
                    return Err("Er has a positive entry".into());
                }
                Ok(())
            }
        }
    }
}

pub fn check_boundedness(inst: &MiqpInstance) -> Result<BoundednessReport, SolveError> {
    let n = inst.n();
    let m = inst.m();
    let lp = LinearProgram {
        objective: inst.c.clone(),
        eq_lhs: inst.a.vstack(&inst.q),
        eq_rhs: RatVec::zeros(m + n),
        ineq_lhs: inst.e.clone(),
        ineq_rhs: RatVec::zeros(inst.e.rows()),
    };
    let rep = solve_lp(&lp)?;
    let report = match rep.status {
        SolveStatus::Optimal => BoundednessReport {
            nlp_bounded: true,
            certificate: BoundednessCertificate::Farkas {
                lambda_e: rep.ineq_duals.neg(),
                lambda_a: rep.eq_duals.slice(0..m),
                lambda_q: rep.eq_duals.slice(m..m + n),
            },
        },
        SolveStatus::Unbounded => {
            let ray = rep.ray.expect("unbounded LP carries a ray");
            BoundednessReport {
                nlp_bounded: false,
                certificate: BoundednessCertificate::Ray {
                    ray: integral_descent(&ray, &inst.c),
                },
            }
        }
        SolveStatus::Infeasible => unreachable!("the recession cone contains zero"),
    };
    debug_assert_eq!(report.verify(inst), Ok(()));
    Ok(report)
}

/// Scales `r` (with `cᵀr < 0`) to integer entries and `cᵀr ≤ −1`.
fn integral_descent(r: &RatVec, c: &RatVec) -> RatVec {
    let r = r.scale(&from_bigint(denominator_lcm(r.iter())));
    let slope = c.dot(&r);
    let needed = (-slope.recip()).ceil().to_integer();
    let factor: BigInt = needed.max(BigInt::one());
    r.scale(&from_bigint(factor))
}
