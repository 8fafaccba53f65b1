//! Penalty weights `ρ*` with `z_{ρ*}(λ) = z^IP`, each issued as a
//! certificate that has been re-checked by exact evaluation.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::ald::slices::{Slice, SliceValue};
use crate::ald::{AldError, Baseline, RelaxValue, Relaxation};
use crate::convexsolve::{solve_qp_trusted, QuadraticProgram, SolveError, SolveStatus};
use crate::numkit::{bit_size, ceil_sqrt, format_rational, from_bigint, int, rational_string, RatMat, RatVec, Rational};
use crate::penalty::{Penalty, PenaltyError, PenaltyKind};

/// Per-assignment search for the L∞ weight stops here.
pub const BISECTION_CAP: i64 = 1 << 40;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RhoError {
    #[error("DELTA_ZERO: the violation over points with Ax != b has infimum 0 (at x2 = {0:?})")]
    DeltaZero(Vec<i64>),
    #[error("BISECTION_CAP: no weight up to 2^40 certifies x2 = {0:?}")]
    BisectionCap(Vec<i64>),
    #[error("NOT_CERTIFIED: {0}")]
    NotCertified(String),
    #[error("INVARIANT_BREACH: {0}")]
    InvariantBreach(String),
    #[error(transparent)]
    Ald(#[from] AldError),
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RhoMethod {
    Sufficient,
    DualLinf,
    NormConvert,
    LambdaShift,
    Empirical,
}

/// Dual feasible point of one slice at weight `rho_x2`.
///
/// `y4`, `y5` belong to box rows on `x₁`; no such rows are used here so both are zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualRecord {
    pub x2: Vec<i64>,
    pub y1: RatVec,
    pub y2: RatVec,
    pub y3: RatVec,
    pub y4: RatVec,
    pub y5: RatVec,
    pub nu: RatVec,
    #[serde(with = "rational_string")]
    pub rho_x2: Rational,
    #[serde(with = "rational_string")]
    pub dual_value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    Sufficient {
        x_tilde: RatVec,
        #[serde(with = "rational_string")]
        delta: Rational,
        #[serde(with = "rational_string")]
        z_nlp: Rational,
    },
    DualLinf {
        records: Vec<DualRecord>,
    },
    NormConvert {
        #[serde(with = "rational_string")]
        rho_hat: Rational,
        #[serde(serialize_with = "bigint_string")]
        gamma: BigInt,
    },
    LambdaShift {
        #[serde(with = "rational_string")]
        rho_star_bar: Rational,
        #[serde(serialize_with = "bigint_string")]
        eta: BigInt,
        /// Integer upper bound on `‖λ̃ − λ̄‖₂`.
        #[serde(serialize_with = "bigint_string")]
        shift_bound: BigInt,
        lambda_bar: RatVec,
    },
    Empirical {
        #[serde(with = "rational_string")]
        rho_max: Rational,
        #[serde(with = "rational_string")]
        width: Rational,
    },
}

fn bigint_string<S: serde::Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RhoCertificate {
    pub method: RhoMethod,
    #[serde(with = "rational_string")]
    pub rho_star: Rational,
    /// Bits in the numerator and denominator of `rho_star`.
    pub bit_size: u64,
    pub penalty: PenaltyKind,
    pub lambda_used: RatVec,
    #[serde(with = "rational_string")]
    pub z_ip: Rational,
    pub evidence: Evidence,
}

impl RhoCertificate {
    fn issue(
        relax: &Relaxation<'_>,
        base: &Baseline,
        method: RhoMethod,
        rho_star: Rational,
        p: &Penalty,
        lambda_used: RatVec,
        evidence: Evidence,
    ) -> Result<Self, RhoError> {
        let cert = RhoCertificate {
            method,
            bit_size: bit_size(&rho_star),
            rho_star,
            penalty: p.kind.clone(),
            lambda_used,
            z_ip: base.z_ip.clone(),
            evidence,
        };
        cert.verify(relax, p).map_err(RhoError::InvariantBreach)?;
        Ok(cert)
    }

    /// `z_{ρ*}(λ) = z^IP` by exact evaluation, plus the dual identities of
    /// every record when the evidence carries them.
    pub fn verify(&self, relax: &Relaxation<'_>, p: &Penalty) -> Result<(), String> {
        let rep = relax
            .eval(&self.lambda_used, &self.rho_star, p)
            .map_err(|e| e.to_string())?;
        if rep.value != RelaxValue::Finite(self.z_ip.clone()) {
            return Err(format!(
                "{:?} weight {} gives relaxation value {}, integer optimum is {}",
                self.method, self.rho_star, rep.value, self.z_ip
            ));
        }
        if let Evidence::DualLinf { records } = &self.evidence {
            for r in records {
                check_record(relax, &self.lambda_used, &self.z_ip, r)?;
            }
        }
        Ok(())
    }
}

fn check_record(relax: &Relaxation<'_>, lambda: &RatVec, z_ip: &Rational, r: &DualRecord) -> Result<(), String> {
    let dec = &relax.dec;
    let s = dec
        .slice(&r.x2)
        .ok_or_else(|| format!("record for infeasible x2 = {:?}", r.x2))?;
    let ys = [&r.y1, &r.y2, &r.y3, &r.y4, &r.y5];
    if ys.iter().any(|y| y.iter().any(Signed::is_negative)) {
        return Err(format!("negative dual entry at x2 = {:?}", r.x2));
    }
    let total: Rational = r.y1.iter().chain(r.y2.iter()).sum();
    if total != r.rho_x2 {
        return Err(format!("1ᵀ(y1 + y2) = {total}, expected {}", r.rho_x2));
    }
    // c₁ − A₁ᵀλ̄ + Q₁₂x₂ + A₁ᵀ(y1 − y2) + E₁ᵀy3 + y4 − y5 = Q₁₁ν
    let lhs = s
        .lin
        .sub(&dec.a1.tr_mul_vec(lambda))
        .add(&dec.a1.tr_mul_vec(&r.y1.sub(&r.y2)))
        .add(&dec.e1.tr_mul_vec(&r.y3))
        .add(&r.y4)
        .sub(&r.y5);
    if lhs != dec.q11.mul_vec(&r.nu) {
        return Err(format!("stationarity row fails at x2 = {:?}", r.x2));
    }
    let value = dual_objective(relax, lambda, &s, r);
    if value != r.dual_value || value < *z_ip {
        return Err(format!(
            "dual objective {value} (recorded {}) below integer optimum {z_ip}",
            r.dual_value
        ));
    }
    Ok(())
}

/// `−½νᵀQ₁₁ν − b_resᵀ(y1 − y2) − f_resᵀy3 + λ̄ᵀb_res + c₂ᵀx₂ + ½x₂ᵀQ₂₂x₂`
fn dual_objective(relax: &Relaxation<'_>, lambda: &RatVec, s: &Slice, r: &DualRecord) -> Rational {
    let dec = &relax.dec;
    -dec.q11.quad_form(&r.nu) / int(2) - s.b_res.dot(&r.y1.sub(&r.y2)) - s.f_res.dot(&r.y3)
        + lambda.dot(&s.b_res)
        + &s.constant
}

/// Weight `(z^IP − z^NLP)/δ` at `λ̄`, with `δ` the least positive violation
/// over all integer slices.
pub fn rho_sufficient(relax: &Relaxation<'_>, base: &Baseline, p: &Penalty) -> Result<RhoCertificate, RhoError> {
    let dec = &relax.dec;
    let mut delta: Option<Rational> = None;
    for s in &relax.slices {
        let Some((v, _)) = dec.min_violation(s, p)? else {
            continue;
        };
        if v.is_zero() {
            if dec.violation_varies(s)? {
                return Err(RhoError::DeltaZero(s.x2.clone()));
            }
            continue;
        }
        if delta.as_ref().is_none_or(|d| v < *d) {
            delta = Some(v);
        }
    }
    let x_tilde = base.x_ip.clone();
    let numerator = relax.instance().objective(&x_tilde) - &base.nlp.z_nlp;
    let (rho_star, delta) = match delta {
        Some(d) => (&numerator / &d, d),
        None => (Rational::zero(), Rational::zero()),
    };
    RhoCertificate::issue(
        relax,
        base,
        RhoMethod::Sufficient,
        rho_star,
        p,
        base.nlp.lambda_bar.clone(),
        Evidence::Sufficient {
            x_tilde,
            delta,
            z_nlp: base.nlp.z_nlp.clone(),
        },
    )
}

/// Dual of the L∞-penalised slice at weight `rho`:
/// `min ½νᵀQ₁₁ν + b_resᵀ(y1 − y2) + f_resᵀy3` s.t.
/// `A₁ᵀ(y1 − y2) + E₁ᵀy3 − Q₁₁ν = −(c₁ − A₁ᵀλ̄ + Q₁₂x₂)`, `1ᵀ(y1 + y2) = rho`, `y ≥ 0`.
fn slice_dual(relax: &Relaxation<'_>, lambda: &RatVec, s: &Slice, rho: &Rational) -> Result<DualRecord, RhoError> {
    let dec = &relax.dec;
    let (m, k, n1) = (dec.a1.rows(), dec.e1.rows(), dec.n1);
    let width = 2 * m + k + n1;
    let a1t = dec.a1.transpose();
    let stationarity = a1t
        .hstack(&a1t.neg())
        .hstack(&dec.e1.transpose())
        .hstack(&dec.q11.neg());
    let mut sum_row = vec![Rational::zero(); width];
    for v in sum_row.iter_mut().take(2 * m) {
        *v = Rational::one();
    }
    let mut eq_lhs = stationarity;
    eq_lhs.push_row(&sum_row);
    let g0 = s.lin.sub(&dec.a1.tr_mul_vec(lambda));
    let mut eq_rhs = g0.neg();
    eq_rhs.push(rho.clone());

    let ny = 2 * m + k;
    let ineq_lhs = RatMat::identity(ny).neg().hstack(&RatMat::zeros(ny, n1));
    let mut q = RatMat::zeros(ny, width).vstack(&RatMat::zeros(n1, ny).hstack(&dec.q11));
    if n1 == 0 {
        q = RatMat::zeros(width, width);
    }
    let c = s.b_res.concat(&s.b_res.neg()).concat(&s.f_res).concat(&RatVec::zeros(n1));
    let qp = QuadraticProgram {
        q,
        c,
        eq_lhs,
        eq_rhs,
        ineq_lhs,
        ineq_rhs: RatVec::zeros(ny),
    };
    let rep = solve_qp_trusted(&qp)?;
    if rep.status != SolveStatus::Optimal {
        return Err(RhoError::InvariantBreach(format!(
            "slice dual at x2 = {:?}, rho = {rho} is {:?}",
            s.x2, rep.status
        )));
    }
    let z = rep.x;
    let mut record = DualRecord {
        x2: s.x2.clone(),
        y1: z.slice(0..m),
        y2: z.slice(m..2 * m),
        y3: z.slice(2 * m..ny),
        y4: RatVec::zeros(n1),
        y5: RatVec::zeros(n1),
        nu: z.slice(ny..width),
        rho_x2: rho.clone(),
        dual_value: Rational::zero(),
    };
    record.dual_value = dual_objective(relax, lambda, s, &record);
    Ok(record)
}

/// Integer weight per slice by doubling then bisection on the slice value at `λ̄`,
/// maximised over slices, with a dual certificate for every slice.
pub fn rho_dual_linf(relax: &Relaxation<'_>, base: &Baseline) -> Result<RhoCertificate, RhoError> {
    let inst = relax.instance();
    let p = Penalty::new(PenaltyKind::Linf, inst.m());
    let lambda = &base.nlp.lambda_bar;
    let z_ip = &base.z_ip;
    if inst.m() == 0 {
        return RhoCertificate::issue(
            relax,
            base,
            RhoMethod::DualLinf,
            Rational::one(),
            &p,
            lambda.clone(),
            Evidence::DualLinf { records: Vec::new() },
        );
    }
    let dec = &relax.dec;
    let passes = |s: &Slice, rho: i64| -> Result<bool, RhoError> {
        Ok(match dec.solve_lr_slice(s, lambda, &int(rho), &p)? {
            SliceValue::Infeasible => true,
            SliceValue::Unbounded { .. } => false,
            SliceValue::Finite { value, .. } => value >= *z_ip,
        })
    };
    let mut records = Vec::with_capacity(relax.slices.len());
    let mut rho_star = 1i64;
    for s in &relax.slices {
        let rho_x2 = if passes(s, 1)? {
            1
        } else {
            let (mut lo, mut hi) = (1i64, 2i64);
            while !passes(s, hi)? {
                lo = hi;
                hi *= 2;
                if hi > BISECTION_CAP {
                    return Err(RhoError::BisectionCap(s.x2.clone()));
                }
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if passes(s, mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        };
        let record = slice_dual(relax, lambda, s, &int(rho_x2))?;
        if record.dual_value < *z_ip {
            return Err(RhoError::InvariantBreach(format!(
                "dual value {} below integer optimum at x2 = {:?}",
                record.dual_value, s.x2
            )));
        }
        rho_star = rho_star.max(rho_x2);
        records.push(record);
    }
    RhoCertificate::issue(
        relax,
        base,
        RhoMethod::DualLinf,
        int(rho_star),
        &p,
        lambda.clone(),
        Evidence::DualLinf { records },
    )
}

/// `γ·ρ̂`: turns an L∞ weight into one for the norm `p`.
pub fn rho_for_norm(rho_hat: &Rational, p: &Penalty) -> Result<Rational, PenaltyError> {
    let nc = p.norm_constants()?;
    Ok(from_bigint(nc.gamma) * rho_hat)
}

/// `⌈ρ̄ + η·⌈‖λ̃ − λ̄‖₂⌉⌉`: moves a weight certified at `λ̄` to `λ̃`.
pub fn rho_for_lambda(
    rho_star_bar: &Rational,
    lambda_tilde: &RatVec,
    lambda_bar: &RatVec,
    p: &Penalty,
) -> Result<Rational, PenaltyError> {
    let nc = p.norm_constants()?;
    let shift = ceil_sqrt(&lambda_tilde.sub(lambda_bar).norm2_sq());
    let raw = rho_star_bar + from_bigint(nc.eta * shift);
    Ok(Rational::from_integer(raw.ceil().to_integer()))
}

/// Certificate for the norm `p` at `λ̄` from an L∞ weight `rho_hat`.
pub fn certify_norm(
    relax: &Relaxation<'_>,
    base: &Baseline,
    rho_hat: &Rational,
    p: &Penalty,
) -> Result<RhoCertificate, RhoError> {
    let rho = rho_for_norm(rho_hat, p)?;
    RhoCertificate::issue(
        relax,
        base,
        RhoMethod::NormConvert,
        rho,
        p,
        base.nlp.lambda_bar.clone(),
        Evidence::NormConvert {
            rho_hat: rho_hat.clone(),
            gamma: p.norm_constants()?.gamma,
        },
    )
}

/// Certificate at `λ̃` from a weight `rho_star_bar` certified at `λ̄` for the same norm.
pub fn certify_lambda(
    relax: &Relaxation<'_>,
    base: &Baseline,
    rho_star_bar: &Rational,
    lambda_tilde: &RatVec,
    p: &Penalty,
) -> Result<RhoCertificate, RhoError> {
    let lambda_bar = &base.nlp.lambda_bar;
    if lambda_tilde.dim() != lambda_bar.dim() {
        return Err(AldError::DimMismatch {
            expected: lambda_bar.dim(),
            got: lambda_tilde.dim(),
        }
        .into());
    }
    let rho = rho_for_lambda(rho_star_bar, lambda_tilde, lambda_bar, p)?;
    RhoCertificate::issue(
        relax,
        base,
        RhoMethod::LambdaShift,
        rho,
        p,
        lambda_tilde.clone(),
        Evidence::LambdaShift {
            rho_star_bar: rho_star_bar.clone(),
            eta: p.norm_constants()?.eta,
            shift_bound: ceil_sqrt(&lambda_tilde.sub(lambda_bar).norm2_sq()),
            lambda_bar: lambda_bar.clone(),
        },
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmpiricalRho {
    #[serde(with = "rational_string")]
    pub rho_min_upper: Rational,
    pub achieved: bool,
    #[serde(with = "rational_string")]
    pub width: Rational,
}

/// Bisection on `[0, rho_max]` for the least `ρ` with `z_ρ(λ) = z^IP`, to width `2^-10`.
pub fn rho_bisect_empirical(
    relax: &Relaxation<'_>,
    z_ip: &Rational,
    lambda: &RatVec,
    p: &Penalty,
    rho_max: &Rational,
) -> Result<EmpiricalRho, RhoError> {
    if !p.is_norm() {
        return Err(PenaltyError::UnsupportedKind(format!(
            "exact penalties need a norm, got {}",
            p.kind
        ))
        .into());
    }
    let width = Rational::new(BigInt::one(), BigInt::one() << 10);
    let target = RelaxValue::Finite(z_ip.clone());
    let certifies = |rho: &Rational| -> Result<bool, RhoError> {
        Ok(relax.eval(lambda, rho, p)?.value == target)
    };
    if certifies(&Rational::zero())? {
        return Ok(EmpiricalRho {
            rho_min_upper: Rational::zero(),
            achieved: true,
            width,
        });
    }
    if !certifies(rho_max)? {
        return Ok(EmpiricalRho {
            rho_min_upper: rho_max.clone(),
            achieved: false,
            width,
        });
    }
    let (mut lo, mut hi) = (Rational::zero(), rho_max.clone());
    while &hi - &lo > width {
        let mid = (&lo + &hi) / int(2);
        if certifies(&mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(EmpiricalRho {
        rho_min_upper: hi,
        achieved: true,
        width,
    })
}

/// Certificate from the bisection upper endpoint; `NOT_CERTIFIED` when
/// `rho_max` itself does not certify.
pub fn certify_empirical(
    relax: &Relaxation<'_>,
    base: &Baseline,
    lambda: &RatVec,
    p: &Penalty,
    rho_max: &Rational,
) -> Result<RhoCertificate, RhoError> {
    let emp = rho_bisect_empirical(relax, &base.z_ip, lambda, p, rho_max)?;
    if !emp.achieved {
        return Err(RhoError::NotCertified(format!(
            "no weight up to {} certifies",
            format_rational(rho_max)
        )));
    }
    RhoCertificate::issue(
        relax,
        base,
        RhoMethod::Empirical,
        emp.rho_min_upper,
        p,
        lambda.clone(),
        Evidence::Empirical {
            rho_max: rho_max.clone(),
            width: emp.width,
        },
    )
}
