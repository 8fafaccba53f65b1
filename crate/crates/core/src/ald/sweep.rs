use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{AldError, Baseline, RelaxValue, Relaxation};
use crate::instance::MiqpInstance;
use crate::numkit::{int, opt_rational_string, rational_string, RatVec, Rational};
use crate::penalty::Penalty;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    #[serde(with = "rational_string")]
    pub rho: Rational,
    pub z_lr: RelaxValue,
    pub z_ld: Option<RelaxValue>,
    /// `z^IP − z_lr`; absent when `z_lr` is infinite.
    #[serde(with = "opt_rational_string")]
    pub gap_lr: Option<Rational>,
    #[serde(with = "rational_string")]
    pub violation: Rational,
    /// Diameter bound of `{u : ψ(u) ≤ (2/ρ)(z^IP − z^NLP)}`; absent at `ρ = 0`.
    #[serde(with = "opt_rational_string")]
    pub kappa_rho: Option<Rational>,
}

/// Runs the sweep at `lambda`, handing each row to `on_row` as soon as it is
/// computed and checked against its predecessor.
///
/// With `ascent_iters > 0` each row also carries the best value of a dual
/// ascent started at `lambda`.
pub fn gap_sweep_with<E, F>(
    relax: &Relaxation<'_>,
    base: &Baseline,
    p: &Penalty,
    lambda: &RatVec,
    rhos: &[Rational],
    ascent_iters: usize,
    mut on_row: F,
) -> Result<(), E>
where
    E: From<AldError>,
    F: FnMut(&SweepRow) -> Result<(), E>,
{
    if rhos.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AldError::UnsortedSchedule.into());
    }
    let gap = base.gap();
    let mut prev: Option<RelaxValue> = None;
    for rho in rhos {
        let rep = relax.eval(lambda, rho, p)?;
        if let Some(prev) = &prev {
            if rep.value < *prev {
                return Err(AldError::InvariantBreach(format!(
                    "relaxation value decreased from {prev} to {} at rho = {rho}",
                    rep.value
                ))
                .into());
            }
        }
        let gap_lr = rep.value.finite().map(|v| &base.z_ip - v);
        if gap_lr.as_ref().is_some_and(Signed::is_negative) {
            return Err(AldError::InvariantBreach(format!(
                "relaxation value {} exceeds the integer optimum {}",
                rep.value, base.z_ip
            ))
            .into());
        }
        let kappa_rho = if rho.is_zero() {
            None
        } else {
            Some(p.level_diam(&(int(2) * &gap / rho)).map_err(AldError::from)?.bound)
        };
        let z_ld = if ascent_iters > 0 {
            let run = dual_ascent(relax, rho, p, lambda, ascent_iters, &int(1))?;
            Some(run.best_value)
        } else {
            None
        };
        let row = SweepRow {
            rho: rho.clone(),
            z_lr: rep.value.clone(),
            z_ld,
            gap_lr,
            violation: rep.violation,
            kappa_rho,
        };
        on_row(&row)?;
        prev = Some(rep.value);
    }
    Ok(())
}

/// One row per `ρ` at `λ = λ̄`.
pub fn gap_sweep(inst: &MiqpInstance, p: &Penalty, rhos: &[Rational]) -> Result<Vec<SweepRow>, AldError> {
    let relax = Relaxation::new(inst)?;
    let base = Baseline::compute(&relax)?;
    let mut rows = Vec::with_capacity(rhos.len());
    gap_sweep_with(&relax, &base, p, &base.nlp.lambda_bar, rhos, 0, |row: &SweepRow| {
        rows.push(row.clone());
        Ok::<(), AldError>(())
    })?;
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AscentStep {
    pub lambda: RatVec,
    pub value: RelaxValue,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualAscent {
    pub best_lambda: RatVec,
    pub best_value: RelaxValue,
    pub trace: Vec<AscentStep>,
    /// A zero supergradient was reached.
    pub stationary: bool,
}

/// Supergradient ascent `λ ← λ + (step0/k)(b − A·x_k)`; keeps the best value seen.
pub fn dual_ascent(
    relax: &Relaxation<'_>,
    rho: &Rational,
    p: &Penalty,
    lambda0: &RatVec,
    max_iters: usize,
    step0: &Rational,
) -> Result<DualAscent, AldError> {
    let inst = relax.instance();
    let mut lambda = lambda0.clone();
    let mut best: Option<(RatVec, RelaxValue)> = None;
    let mut trace = Vec::new();
    let mut stationary = false;
    for k in 1..=max_iters.max(1) {
        let rep = relax.eval(&lambda, rho, p)?;
        trace.push(AscentStep {
            lambda: lambda.clone(),
            value: rep.value.clone(),
        });
        if best.as_ref().is_none_or(|(_, b)| rep.value > *b) {
            best = Some((lambda.clone(), rep.value.clone()));
        }
        if rep.argmin_x.is_empty() {
            break;
        }
        let g = inst.b.sub(&inst.a.mul_vec(&rep.argmin_x));
        if g.is_zero() && rep.value.finite().is_some() {
            stationary = true;
            break;
        }
        if k == max_iters {
            break;
        }
        lambda = lambda.axpy(&(step0 / int(k as i64)), &g);
    }
    let (best_lambda, best_value) = best.expect("at least one iterate");
    Ok(DualAscent {
        best_lambda,
        best_value,
        trace,
        stationary,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ViolationBound {
    pub ok: bool,
    /// `ψ(b − Ax*)` at the minimiser of the relaxation at `λ̄`.
    #[serde(with = "rational_string")]
    pub lhs: Rational,
    /// `(z^IP − z^NLP)/ρ`
    #[serde(with = "rational_string")]
    pub rhs: Rational,
}

pub fn violation_bound_check(
    relax: &Relaxation<'_>,
    base: &Baseline,
    p: &Penalty,
    rho: &Rational,
) -> Result<ViolationBound, AldError> {
    if !rho.is_positive() {
        return Err(AldError::NegativeRho(rho.clone()));
    }
    let rep = relax.eval(&base.nlp.lambda_bar, rho, p)?;
    let rhs = base.gap() / rho;
    Ok(ViolationBound {
        ok: rep.violation <= rhs,
        lhs: rep.violation,
        rhs,
    })
}
