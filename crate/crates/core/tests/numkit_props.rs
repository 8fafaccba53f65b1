use miqp_ald::numkit::{
    format_rational, frac, ldl_psd_check, nullspace, parse_rational, solve_linear, LinearSolution, RatMat, RatVec, Rational,
};
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rat() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=6).prop_map(|(p, q)| frac(p, q))
}

fn mat(rows: usize, cols: usize) -> impl Strategy<Value = RatMat> {
    proptest::collection::vec(rat(), rows * cols).prop_map(move |d| RatMat::from_vec(rows, cols, d).unwrap())
}

/// Symmetric matrices: half are `LᵀL` with `L` possibly short, half arbitrary.
fn symmetric() -> impl Strategy<Value = RatMat> {
    (1usize..5, 0usize..5, any::<bool>()).prop_flat_map(|(n, k, gram)| {
        mat(k.max(1), n).prop_map(move |b| {
            if gram {
                b.transpose().matmul(&b)
            } else {
                let sq = RatMat::from_vec(n, n, (0..n * n).map(|i| b.row(i % b.rows())[i % n].clone()).collect())
                    .unwrap();
                sq.add(&sq.transpose())
            }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn field_operations_are_exact(a in rat(), b in rat()) {
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        if !b.is_zero() {
            prop_assert_eq!(&(&a * &b) / &b, a.clone());
        }
        prop_assert_eq!(parse_rational(&format_rational(&a)).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psd_verdict_matches_quadratic_form(m in symmetric(), seed in any::<u64>()) {
        let rep = ldl_psd_check(&m).unwrap();
        if rep.is_psd {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..1000 {
                let x: Vec<Rational> = (0..m.rows()).map(|_| frac(rng.gen_range(-9..=9), rng.gen_range(1..=4))).collect();
                prop_assert!(!m.quad_form(&x).is_negative());
            }
        } else {
            let w = rep.witness.expect("witness for an indefinite matrix");
            prop_assert!(m.quad_form(&w).is_negative());
        }
    }

    #[test]
    fn linear_solutions_satisfy_the_system(
        (m, v) in (1usize..5, 1usize..5).prop_flat_map(|(r, c)| (mat(r, c), proptest::collection::vec(rat(), r)))
    ) {
        let v = RatVec::new(v);
        match solve_linear(&m, &v).unwrap() {
            LinearSolution::Unique(x) => prop_assert_eq!(m.mul_vec(&x), v),
            LinearSolution::Parametric { particular, kernel, .. } => {
                prop_assert_eq!(m.mul_vec(&particular), v.clone());
                for k in &kernel {
                    prop_assert!(m.mul_vec(k).is_zero());
                }
            }
            LinearSolution::Inconsistent { .. } => {
                // some y with yᵀM = 0 has yᵀv ≠ 0
                let left = nullspace(&m.transpose());
                prop_assert!(left.iter().all(|y| m.tr_mul_vec(y).is_zero()));
                prop_assert!(left.iter().any(|y| !y.dot(&v).is_zero()));
            }
        }
    }
}
