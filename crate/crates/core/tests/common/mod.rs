//! Shared corpus and brute-force oracles for the integration tests.
#![allow(dead_code)]

use miqp_ald::ald::Relaxation;
use miqp_ald::instance::{generate, GenConfig, MiqpInstance};
use miqp_ald::numkit::{frac, int, RatMat, RatVec, Rational};
use miqp_ald::penalty::PenaltyKind;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Box radius is `magnitude`, chosen so the integer box stays at most 125 points.
pub fn corpus_configs() -> Vec<GenConfig> {
    (0..25u64)
        .map(|i| {
            let n2 = 1 + (i % 4) as usize;
            let n1 = ((i / 4) % 3) as usize;
            let magnitude = match n2 {
                1 => 4,
                2 => 3,
                3 => 2,
                _ => 1,
            };
            GenConfig {
                n1,
                n2,
                m: 1 + (i % 2) as usize,
                m2: (i % 3) as usize,
                magnitude,
                seed: 1000 + i,
                require_feasible: true,
            }
        })
        .collect()
}

pub fn corpus() -> Vec<MiqpInstance> {
    corpus_configs().iter().map(generate).collect()
}

/// Pure integer instances with their box radius.
pub fn pure_integer_corpus() -> Vec<(MiqpInstance, i64)> {
    (0..10u64)
        .map(|i| {
            let cfg = GenConfig {
                n1: 0,
                n2: 2 + (i % 2) as usize,
                m: 1 + (i % 2) as usize,
                m2: (i % 3) as usize,
                magnitude: 2,
                seed: 5000 + i,
                require_feasible: true,
            };
            (generate(&cfg), 2)
        })
        .collect()
}

/// Penalty evaluated from its definition.
pub fn psi(kind: &PenaltyKind, u: &[Rational]) -> Rational {
    match kind {
        PenaltyKind::Linf => u.iter().map(|v| v.abs()).max().unwrap_or_else(Rational::zero),
        PenaltyKind::L1 => u.iter().map(|v| v.abs()).sum(),
        PenaltyKind::SqL2 => u.iter().map(|v| v * v).sum(),
        PenaltyKind::ScaledLinf(alpha) => {
            alpha * u.iter().map(|v| v.abs()).max().unwrap_or_else(Rational::zero)
        }
    }
}

/// Every integer point of `[-radius, radius]^n2`, lexicographic.
pub fn grid(n2: usize, radius: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n2 {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-radius..=radius).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// `min f(x) + λᵀ(b − Ax) + ρψ(b − Ax)` over feasible points of a pure integer
/// instance by full enumeration of the box. `None` when no point is feasible.
pub fn exhaustive_lr_plus(
    inst: &MiqpInstance,
    radius: i64,
    lambda: &RatVec,
    rho: &Rational,
    kind: &PenaltyKind,
) -> Option<Rational> {
    assert_eq!(inst.n1, 0);
    let mut best: Option<Rational> = None;
    for p in grid(inst.n2, radius) {
        let x: Vec<Rational> = p.iter().map(|&v| int(v)).collect();
        let ex = inst.e.mul_vec(&x);
        if ex.iter().zip(inst.f.iter()).any(|(l, r)| l > r) {
            continue;
        }
        let mut fx = inst.c.dot(&x);
        for i in 0..x.len() {
            for j in 0..x.len() {
                fx += inst.q.row(i)[j].clone() * &x[i] * &x[j] / int(2);
            }
        }
        let res: Vec<Rational> = inst
            .b
            .iter()
            .zip(inst.a.mul_vec(&x).iter())
            .map(|(b, ax)| b - ax)
            .collect();
        let lag: Rational = lambda.iter().zip(&res).map(|(l, r)| l * r).sum();
        let v = fx + lag + rho * psi(kind, &res);
        if best.as_ref().is_none_or(|b| v < *b) {
            best = Some(v);
        }
    }
    best
}

/// Copy of `inst` with `|xⱼ| ≤ radius` added for every variable.
pub fn boxed(inst: &MiqpInstance, radius: i64) -> MiqpInstance {
    let n = inst.n();
    let mut out = inst.clone();
    for j in 0..n {
        for s in [1, -1] {
            let mut row = vec![int(0); n];
            row[j] = int(s);
            out.e.push_row(&row);
            out.f.push(int(radius));
        }
    }
    out
}

/// Integer optimum restricted to the box of `radius`; `None` when empty.
pub fn boxed_ip_value(inst: &MiqpInstance, radius: i64) -> Option<Rational> {
    let b = boxed(inst, radius);
    let rep = Relaxation::new(&b).expect("finite box").solve_ip().expect("solvable");
    rep.value
}

/// `(r·r)v − (v·r)r`, an integer vector orthogonal to `r`.
fn project_out(v: &[i64], r: &[i64]) -> Vec<i64> {
    let rr: i64 = r.iter().map(|x| x * x).sum();
    let vr: i64 = v.iter().zip(r).map(|(a, b)| a * b).sum();
    v.iter().zip(r).map(|(a, b)| rr * a - vr * b).collect()
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

/// Instance built around a direction `r` with `Qr = 0`, `Ar = 0`.
/// `unbounded` plants `Er ≤ 0`, `cᵀr < 0`; otherwise the direction is blocked,
/// by a row with `Eᵢr > 0` on even seeds and by `cᵀr > 0` with `−r` cut off on odd ones.
pub fn planted(seed: u64, unbounded: bool) -> MiqpInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n1 = (seed % 3) as usize;
    let n2 = 1 + ((seed / 3) % 2) as usize;
    let n = n1 + n2;
    let mut r: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
    if r.iter().all(|&v| v == 0) {
        r[n - 1] = 1;
    }
    let l_rows: Vec<Vec<Rational>> = (0..n - 1)
        .map(|_| {
            let l: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
            ints(&project_out(&l, &r))
        })
        .collect();
    let l = RatMat::from_rows(l_rows, n).unwrap();
    let q = l.transpose().matmul(&l);
    let x0: Vec<Rational> = (0..n)
        .map(|j| {
            if j < n1 {
                frac(rng.gen_range(-4..=4), 2)
            } else {
                int(rng.gen_range(-2..=2))
            }
        })
        .collect();
    let a_row = project_out(&(0..n).map(|_| rng.gen_range(-2..=2)).collect::<Vec<_>>(), &r);
    let a = RatMat::from_rows(vec![ints(&a_row)], n).unwrap();
    let b = a.mul_vec(&x0);

    let mut e = RatMat::zeros(0, n);
    let mut f = RatVec::default();
    let mut push = |row: Vec<i64>, slack: Rational| {
        let row = ints(&row);
        f.push(RatVec::new(row.clone()).dot(&x0) + slack);
        e.push_row(&row);
    };
    for _ in 0..2 {
        let mut row: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
        if dot(&row, &r) > 0 {
            row.iter_mut().for_each(|v| *v = -*v);
        }
        push(row, frac(rng.gen_range(0..=4), 2));
    }
    let c0: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
    let base = project_out(&c0, &r);
    let c_sign = if !unbounded && seed % 2 == 1 { 1 } else { -1 };
    let c: Vec<i64> = base.iter().zip(&r).map(|(v, ri)| v + c_sign * ri).collect();
    if !unbounded {
        if seed.is_multiple_of(2) {
            push(r.clone(), int(1));
        } else {
            push(r.iter().map(|v| -v).collect(), int(1));
        }
    }
    MiqpInstance {
        n1,
        n2,
        q,
        c: RatVec::new(ints(&c)),
        a,
        b,
        e,
        f,
    }
}
