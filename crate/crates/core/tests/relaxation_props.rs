mod common;

use miqp_ald::ald::{integer_box, violation_bound_check, Baseline, RelaxValue, Relaxation};
use miqp_ald::exactrho::{rho_dual_linf, rho_sufficient, RhoError};
use miqp_ald::instance::{generate, generate_planted, instance_from_json, instance_to_json, read_instance, write_instance, GenConfig};
use miqp_ald::numkit::{frac, int, RatVec, Rational};
use miqp_ald::penalty::{Penalty, PenaltyKind};
use num_bigint::BigInt;
use num_traits::One;
use proptest::prelude::*;

fn small_config() -> impl Strategy<Value = GenConfig> {
    (0usize..3, 1usize..3, 1usize..3, 0usize..3, 1u32..3, any::<u64>()).prop_map(|(n1, n2, m, m2, magnitude, seed)| {
        GenConfig {
            n1,
            n2,
            m,
            m2,
            magnitude,
            seed,
            require_feasible: true,
        }
    })
}

fn kind() -> impl Strategy<Value = PenaltyKind> {
    prop_oneof![
        Just(PenaltyKind::Linf),
        Just(PenaltyKind::L1),
        Just(PenaltyKind::SqL2),
        Just(PenaltyKind::ScaledLinf(frac(1, 3))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn files_round_trip(cfg in small_config()) {
        let inst = generate(&cfg);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        write_instance(&inst, &path).unwrap();
        prop_assert_eq!(read_instance(&path).unwrap(), inst.clone());
        let text = std::fs::read_to_string(&path).unwrap();
        prop_assert_eq!(instance_to_json(&instance_from_json(&text).unwrap()), text);
    }

    #[test]
    fn generated_boxes_are_finite(cfg in small_config()) {
        let inst = generate(&cfg);
        let b = integer_box(&inst).unwrap();
        prop_assert_eq!(b.lower.len(), cfg.n2);
        prop_assert!(b.upper.iter().all(|&u| u <= i64::from(cfg.magnitude)));
    }

    #[test]
    fn relaxation_is_monotone_and_below_feasible_points(
        cfg in small_config(),
        k in kind(),
        lam_seed in proptest::collection::vec(-6i64..=6, 2),
    ) {
        let (inst, x0) = generate_planted(&cfg);
        let relax = Relaxation::new(&inst).unwrap();
        let lam: RatVec = (0..inst.m()).map(|i| frac(lam_seed[i % 2], 2)).collect();
        let p = Penalty::new(k, inst.m());
        let f0 = RelaxValue::Finite(inst.objective(&x0));
        let mut prev: Option<RelaxValue> = None;
        for r in [0i64, 1, 3, 9, 27] {
            let v = relax.eval(&lam, &int(r), &p).unwrap().value;
            prop_assert!(v <= f0);
            if let Some(pv) = prev {
                prop_assert!(pv <= v);
            }
            prev = Some(v);
        }
    }

    #[test]
    fn gap_shrinks_along_powers_of_two(cfg in small_config(), k in kind()) {
        let inst = generate(&cfg);
        let relax = Relaxation::new(&inst).unwrap();
        let base = Baseline::compute(&relax).unwrap();
        let p = Penalty::new(k, inst.m());
        let mut prev_gap: Option<Rational> = None;
        for e in 0..12u32 {
            let rho = Rational::from_integer(BigInt::one() << e);
            let v = relax.eval(&base.nlp.lambda_bar, &rho, &p).unwrap().value;
            let gap = &base.z_ip - v.finite().expect("finite at the relaxation multiplier");
            if let Some(pg) = &prev_gap {
                prop_assert!(gap <= *pg);
            }
            prop_assert!(violation_bound_check(&relax, &base, &p, &rho).unwrap().ok);
            prev_gap = Some(gap);
        }
    }

    #[test]
    fn certified_weights_stay_certified_when_doubled(cfg in small_config()) {
        let inst = generate(&cfg);
        let relax = Relaxation::new(&inst).unwrap();
        let base = Baseline::compute(&relax).unwrap();
        let linf = Penalty::new(PenaltyKind::Linf, inst.m());
        let target = RelaxValue::Finite(base.z_ip.clone());
        let dual = rho_dual_linf(&relax, &base).unwrap();
        prop_assert!(dual.verify(&relax, &linf).is_ok());
        let doubled = int(2) * &dual.rho_star;
        prop_assert_eq!(relax.eval(&dual.lambda_used, &doubled, &linf).unwrap().value, target.clone());
        match rho_sufficient(&relax, &base, &linf) {
            Ok(c) => {
                let doubled = int(2) * &c.rho_star;
                prop_assert_eq!(relax.eval(&c.lambda_used, &doubled, &linf).unwrap().value, target);
            }
            Err(RhoError::DeltaZero(_)) => prop_assert!(inst.n1 > 0),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
