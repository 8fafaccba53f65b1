use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::MiqpInstance;
use crate::numkit::{frac, int, RatMat, RatVec, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n1: usize,
    pub n2: usize,
    /// Rows of `A`.
    pub m: usize,
    /// Rows of `E` on top of the integer box rows.
    pub m2: usize,
    /// Bound on `|k|` for generated entries `k/d`, and the integer box radius.
    pub magnitude: u32,
    pub seed: u64,
    pub require_feasible: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n1: 1,
            n2: 2,
            m: 1,
            m2: 1,
            magnitude: 2,
            seed: 0,
            require_feasible: true,
        }
    }
}

struct Draw {
    rng: ChaCha8Rng,
    mag: i64,
}

impl Draw {
    /// `k/d` with `|k| ≤ magnitude`, `d ∈ {1, 2}`.
    fn entry(&mut self) -> Rational {
        let k = self.rng.gen_range(-self.mag..=self.mag);
        let d = self.rng.gen_range(1..=2);
        frac(k, d)
    }

    fn nonzero(&mut self) -> Rational {
        let k = self.rng.gen_range(1..=self.mag);
        let d = self.rng.gen_range(1..=2);
        if self.rng.gen_bool(0.5) {
            frac(k, d)
        } else {
            frac(-k, d)
        }
    }

    fn integer(&mut self) -> Rational {
        int(self.rng.gen_range(-self.mag..=self.mag))
    }

    fn slack(&mut self) -> Rational {
        frac(self.rng.gen_range(0..=2 * self.mag), 2)
    }
}

/// Deterministic random instance. `Q = LᵀL` with `L` upper triangular and a
/// nonzero diagonal, and every integer variable carries rows `±xⱼ ≤ magnitude`.
pub fn generate(cfg: &GenConfig) -> MiqpInstance {
    generate_planted(cfg).0
}

/// Like [`generate`], also returning the mixed integer point the rows were built around.
pub fn generate_planted(cfg: &GenConfig) -> (MiqpInstance, RatVec) {
    let n = cfg.n1 + cfg.n2;
    let mut d = Draw {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        mag: i64::from(cfg.magnitude.max(1)),
    };

    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = vec![int(0); n];
        row[i] = d.nonzero();
        for v in row.iter_mut().skip(i + 1) {
            *v = d.entry();
        }
        rows.push(row);
    }
    let l = RatMat::from_rows(rows, n).expect("square factor");
    let q = l.transpose().matmul(&l);
    let c: RatVec = (0..n).map(|_| d.entry()).collect();

    let x0: RatVec = (0..n)
        .map(|j| if j < cfg.n1 { d.entry() } else { d.integer() })
        .collect();

    let mut a = RatMat::zeros(0, n);
    for _ in 0..cfg.m {
        let row: Vec<Rational> = (0..n).map(|_| d.entry()).collect();
        a.push_row(&row);
    }
    let b = if cfg.require_feasible {
        a.mul_vec(&x0)
    } else {
        (0..cfg.m).map(|_| d.entry()).collect()
    };

    let bound = int(d.mag);
    let mut e = RatMat::zeros(0, n);
    let mut f = RatVec::default();
    for j in cfg.n1..n {
        for sign in [1, -1] {
            let mut row = vec![int(0); n];
            row[j] = int(sign);
            e.push_row(&row);
            f.push(bound.clone());
        }
    }
    for _ in 0..cfg.m2 {
        let row: Vec<Rational> = (0..n).map(|_| d.entry()).collect();
        let rhs = RatVec::new(row.clone()).dot(&x0) + d.slack();
        e.push_row(&row);
        f.push(rhs);
    }

    let inst = MiqpInstance {
        n1: cfg.n1,
        n2: cfg.n2,
        q,
        c,
        a,
        b,
        e,
        f,
    };
    (inst, x0)
}
