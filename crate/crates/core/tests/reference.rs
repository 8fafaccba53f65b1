//! End to end on the two-variable reference instance `min x₁² + x₂²`,
//! `x₁ + x₂ = 1`, `|xᵢ| ≤ 3`, both integer.

mod common;

use miqp_ald::ald::{dual_ascent, gap_sweep, lambda_bar, solve_ip, Baseline, RelaxValue, Relaxation};
use miqp_ald::exactrho::{rho_bisect_empirical, rho_dual_linf, rho_for_lambda, rho_sufficient};
use miqp_ald::instance::{read_instance, reference_instance};
use miqp_ald::numkit::{frac, int, RatVec, Rational};
use miqp_ald::penalty::{Penalty, PenaltyKind};
use num_bigint::BigInt;
use num_traits::{One, Zero};

fn data_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/d1.json")
}

#[test]
fn shipped_file_is_the_reference_instance() {
    assert_eq!(read_instance(data_path()).unwrap(), reference_instance());
}

#[test]
fn baseline_values() {
    let inst = reference_instance();
    let ip = solve_ip(&inst).unwrap();
    assert_eq!(ip.value, Some(int(1)));
    assert_eq!(ip.x, RatVec::from_ints(&[0, 1]));
    let lb = lambda_bar(&inst).unwrap();
    assert_eq!(lb.z_nlp, frac(1, 2));
    assert_eq!(lb.lambda_bar, RatVec::from_ints(&[1]));
    assert_eq!(lb.x, RatVec::new(vec![frac(1, 2), frac(1, 2)]));
}

#[test]
fn relaxation_matches_enumeration() {
    let inst = reference_instance();
    let relax = Relaxation::new(&inst).unwrap();
    for lam in [0i64, 1, -2] {
        let lam = RatVec::from_ints(&[lam]);
        for kind in [PenaltyKind::Linf, PenaltyKind::L1, PenaltyKind::SqL2] {
            let p = Penalty::new(kind.clone(), 1);
            for r in [0i64, 1, 2, 5] {
                let want = common::exhaustive_lr_plus(&inst, 3, &lam, &int(r), &kind).unwrap();
                assert_eq!(relax.eval(&lam, &int(r), &p).unwrap().value, RelaxValue::Finite(want));
            }
        }
    }
    // at λ = 0 the point (0, 0) is cheapest until ρ reaches 1
    let p = Penalty::new(PenaltyKind::Linf, 1);
    let zero = RatVec::zeros(1);
    assert_eq!(relax.eval(&zero, &frac(1, 2), &p).unwrap().value, RelaxValue::Finite(frac(1, 2)));
    assert_eq!(relax.eval(&zero, &int(1), &p).unwrap().value, RelaxValue::Finite(int(1)));
}

#[test]
fn sweep_closes_the_gap() {
    let rhos: Vec<Rational> = (0..8).map(|k| Rational::from_integer(BigInt::one() << k)).collect();
    let rows = gap_sweep(&reference_instance(), &Penalty::new(PenaltyKind::Linf, 1), &rhos).unwrap();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows.last().unwrap().gap_lr, Some(Rational::zero()));
}

#[test]
fn ascent_from_zero_reaches_the_integer_optimum() {
    let inst = reference_instance();
    let relax = Relaxation::new(&inst).unwrap();
    let run = dual_ascent(&relax, &int(1), &Penalty::new(PenaltyKind::Linf, 1), &RatVec::zeros(1), 20, &int(1)).unwrap();
    assert_eq!(run.best_value, RelaxValue::Finite(int(1)));
}

#[test]
fn exact_weights() {
    let inst = reference_instance();
    let relax = Relaxation::new(&inst).unwrap();
    let base = Baseline::compute(&relax).unwrap();
    let p = Penalty::new(PenaltyKind::Linf, 1);
    let suff = rho_sufficient(&relax, &base, &p).unwrap();
    assert_eq!(suff.rho_star, frac(1, 2));
    let dual = rho_dual_linf(&relax, &base).unwrap();
    assert_eq!(dual.rho_star, int(1));
    let emp = rho_bisect_empirical(&relax, &base.z_ip, &base.nlp.lambda_bar, &p, &int(16)).unwrap();
    assert!(emp.achieved);
    assert!(emp.rho_min_upper <= frac(1, 2) + &emp.width);
    // from λ̄ = 1 to λ̃ = 0 the shift bound is 1
    let shifted = rho_for_lambda(&suff.rho_star, &RatVec::zeros(1), &base.nlp.lambda_bar, &p).unwrap();
    assert_eq!(shifted, int(2));
    let at_zero = rho_bisect_empirical(&relax, &base.z_ip, &RatVec::zeros(1), &p, &int(16)).unwrap();
    assert!(at_zero.rho_min_upper <= shifted);
    assert!(at_zero.rho_min_upper > frac(1, 2));
}
