//! Primal active-set method for convex QP in exact arithmetic.
//!
//! The working set always holds linearly independent rows: the equality
//! rows that survive a greedy independence filter, plus the inequalities
//! currently held active. Each iteration minimises the objective on the
//! face defined by the working set through a null-space basis. A singular
//! reduced Hessian with an inconsistent reduced gradient gives a direction
//! of zero curvature and strict descent; if nothing blocks it the problem
//! is unbounded along that ray.

use num_traits::Signed;

use super::lp::solve_lp;
use super::{LinearProgram, QuadraticProgram, SolveError, SolveReport, SolveStatus};
use crate::numkit::{
    independent_rows, ldl_psd_check, nullspace, solve_linear, LinearSolution, RatMat, RatVec,
    Rational, RowBasis,
};

const MAX_ITERATIONS: usize = 10_000;

/// Solves a convex QP; the objective matrix is checked for semidefiniteness first.
pub fn solve_qp(qp: &QuadraticProgram) -> Result<SolveReport, SolveError> {
    qp.check_dims()?;
    let psd = ldl_psd_check(&qp.q)?;
    if !psd.is_psd {
        return Err(SolveError::NotPsd(psd.witness.unwrap_or_default()));
    }
    solve_qp_trusted(qp)
}

/// Same as [`solve_qp`] for callers that already know `q ⪰ 0`.
pub(crate) fn solve_qp_trusted(qp: &QuadraticProgram) -> Result<SolveReport, SolveError> {
    qp.check_dims()?;
    if qp.q.is_zero() {
        return solve_lp(&LinearProgram {
            objective: qp.c.clone(),
            eq_lhs: qp.eq_lhs.clone(),
            eq_rhs: qp.eq_rhs.clone(),
            ineq_lhs: qp.ineq_lhs.clone(),
            ineq_rhs: qp.ineq_rhs.clone(),
        });
    }
    let start = solve_lp(&LinearProgram::feasibility(
        qp.dim(),
        qp.eq_lhs.clone(),
        qp.eq_rhs.clone(),
        qp.ineq_lhs.clone(),
        qp.ineq_rhs.clone(),
    ))?;
    if start.status == SolveStatus::Infeasible {
        return Ok(SolveReport::infeasible());
    }
    ActiveSet::new(qp, start.x).run()
}

struct ActiveSet<'a> {
    qp: &'a QuadraticProgram,
    x: RatVec,
    eq_rows: Vec<usize>,
    working: Vec<usize>,
}

enum Step {
    /// Newton step to the minimiser on the current face.
    Face(RatVec),
    /// Zero-curvature descent direction.
    Ray(RatVec),
}

impl<'a> ActiveSet<'a> {
    fn new(qp: &'a QuadraticProgram, x: RatVec) -> Self {
        let eq_rows = independent_rows(&qp.eq_lhs);
        let mut basis = RowBasis::new();
        for &i in &eq_rows {
            basis.try_insert(qp.eq_lhs.row(i));
        }
        let mut working = Vec::new();
        for i in 0..qp.ineq_lhs.rows() {
            let a = qp.ineq_lhs.row(i);
            if x.dot(a) == qp.ineq_rhs[i]
                && basis.try_insert(a)
            {
                working.push(i);
            }
        }
        ActiveSet {
            qp,
            x,
            eq_rows,
            working,
        }
    }

    fn working_matrix(&self) -> RatMat {
        self.qp
            .eq_lhs
            .select_rows(&self.eq_rows)
            .vstack(&self.qp.ineq_lhs.select_rows(&self.working))
    }

    fn gradient(&self) -> RatVec {
        self.qp.q.mul_vec(&self.x).add(&self.qp.c)
    }

    fn direction(&self, w: &RatMat, grad: &RatVec) -> Result<Step, SolveError> {
        let kernel = nullspace(w);
        if kernel.is_empty() {
            return Ok(Step::Face(RatVec::zeros(self.x.dim())));
        }
        let n = self.x.dim();
        let z_t = RatMat::from_rows(kernel.into_iter().map(RatVec::into_inner).collect(), n)?;
        let reduced_h = z_t.matmul(&self.qp.q).matmul(&z_t.transpose());
        let reduced_g = z_t.mul_vec(grad);
        match solve_linear(&reduced_h, &reduced_g.neg())? {
            LinearSolution::Inconsistent { .. } => {
                // project -g onto null(H_r); nonzero because -g is not in range(H_r)
                let k = reduced_h.rows();
                let null = nullspace(&reduced_h);
                let n_t = RatMat::from_rows(null.into_iter().map(RatVec::into_inner).collect(), k)?;
                let gram = n_t.matmul(&n_t.transpose());
                let t = solve_linear(&gram, &n_t.mul_vec(&reduced_g).neg())?;
                let t = t.solution().expect("Gram matrix of a basis is invertible");
                let d_u = n_t.tr_mul_vec(t);
                Ok(Step::Ray(z_t.tr_mul_vec(&d_u)))
            }
            sol => {
                let u = sol.solution().expect("consistent system");
                Ok(Step::Face(z_t.tr_mul_vec(u)))
            }
        }
    }

    /// Smallest step ratio among inactive rows that `p` moves towards, ties by index.
    fn blocking(&self, p: &RatVec) -> Option<(usize, Rational)> {
        let mut best: Option<(usize, Rational)> = None;
        for i in 0..self.qp.ineq_lhs.rows() {
            if self.working.contains(&i) {
                continue;
            }
            let a = RatVec::new(self.qp.ineq_lhs.row(i).to_vec());
            let ap = a.dot(p);
            if !ap.is_positive() {
                continue;
            }
            let ratio = (&self.qp.ineq_rhs[i] - a.dot(&self.x)) / ap;
            if best.as_ref().is_none_or(|(_, b)| ratio < *b) {
                best = Some((i, ratio));
            }
        }
        best
    }

    fn run(mut self) -> Result<SolveReport, SolveError> {
        for _ in 0..MAX_ITERATIONS {
            let w = self.working_matrix();
            let grad = self.gradient();
            match self.direction(&w, &grad)? {
                Step::Ray(p) => match self.blocking(&p) {
                    None => {
                        let value = self.qp.objective_at(&self.x);
                        return Ok(SolveReport {
                            status: SolveStatus::Unbounded,
                            value: Some(value),
                            x: self.x,
                            eq_duals: RatVec::default(),
                            ineq_duals: RatVec::default(),
                            ray: Some(p),
                        });
                    }
                    Some((i, alpha)) => {
                        self.x = self.x.axpy(&alpha, &p);
                        self.working.push(i);
                    }
                },
                Step::Face(p) if p.is_zero() => {
                    // Wᵀ [−y_eq; y_W] = −∇f
                    let mu = solve_linear(&w.transpose(), &grad.neg())?;
                    let mu = mu
                        .solution()
                        .expect("gradient lies in the row space at a face minimiser")
                        .clone();
                    let ke = self.eq_rows.len();
                    let leaving = self
                        .working
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| mu[ke + k].is_negative())
                        .min_by_key(|(_, &i)| i)
                        .map(|(k, _)| k);
                    match leaving {
                        Some(k) => {
                            self.working.remove(k);
                        }
                        None => return Ok(self.finish(&mu)),
                    }
                }
                Step::Face(p) => match self.blocking(&p) {
                    Some((i, alpha)) if alpha < Rational::from_integer(1.into()) => {
                        self.x = self.x.axpy(&alpha, &p);
                        self.working.push(i);
                    }
                    _ => {
                        self.x = self.x.add(&p);
                    }
                },
            }
        }
        Err(SolveError::IterationLimit(MAX_ITERATIONS))
    }

    fn finish(self, mu: &RatVec) -> SolveReport {
        let ke = self.eq_rows.len();
        let mut eq_duals = RatVec::zeros(self.qp.eq_lhs.rows());
        for (k, &i) in self.eq_rows.iter().enumerate() {
            eq_duals[i] = -&mu[k];
        }
        let mut ineq_duals = RatVec::zeros(self.qp.ineq_lhs.rows());
        for (k, &i) in self.working.iter().enumerate() {
            ineq_duals[i] = mu[ke + k].clone();
        }
        let value = self.qp.objective_at(&self.x);
        SolveReport {
            status: SolveStatus::Optimal,
            value: Some(value),
            x: self.x,
            eq_duals,
            ineq_duals,
            ray: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{frac, int, RatMat};
    use num_traits::Zero;

    fn qp(q: &[&[i64]], c: &[i64], eq: (&[&[i64]], &[i64]), ineq: (&[&[i64]], &[i64])) -> QuadraticProgram {
        let n = c.len();
        let mat = |rows: &[&[i64]]| {
            if rows.is_empty() {
                RatMat::zeros(0, n)
            } else {
                RatMat::from_ints(rows)
            }
        };
        QuadraticProgram {
            q: RatMat::from_ints(q),
            c: RatVec::from_ints(c),
            eq_lhs: mat(eq.0),
            eq_rhs: RatVec::from_ints(eq.1),
            ineq_lhs: mat(ineq.0),
            ineq_rhs: RatVec::from_ints(ineq.1),
        }
    }

    #[test]
    fn unconstrained_parabola() {
        let p = qp(&[&[1]], &[-1], (&[], &[]), (&[], &[]));
        let rep = solve_qp(&p).unwrap();
        assert_eq!(rep.x, RatVec::from_ints(&[1]));
        assert_eq!(rep.value, Some(frac(-1, 2)));
        p.verify(&rep).unwrap();
    }

    #[test]
    fn bound_forces_multiplier() {
        let p = qp(&[&[1]], &[-1], (&[], &[]), (&[&[1]], &[0]));
        let rep = solve_qp(&p).unwrap();
        assert_eq!(rep.x, RatVec::from_ints(&[0]));
        assert_eq!(rep.value, Some(int(0)));
        assert_eq!(rep.ineq_duals, RatVec::from_ints(&[1]));
        p.verify(&rep).unwrap();
    }

    #[test]
    fn relaxation_of_reference_instance() {
        // min x1² + x2² s.t. x1 + x2 = 1, -3 <= xi <= 3
        let p = qp(
            &[&[2, 0], &[0, 2]],
            &[0, 0],
            (&[&[1, 1]], &[1]),
            (&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]], &[3, 3, 3, 3]),
        );
        let rep = solve_qp(&p).unwrap();
        assert_eq!(rep.value, Some(frac(1, 2)));
        assert_eq!(rep.x, RatVec::new(vec![frac(1, 2), frac(1, 2)]));
        assert_eq!(rep.eq_duals, RatVec::from_ints(&[1]));
        p.verify(&rep).unwrap();
    }

    #[test]
    fn zero_curvature_ray() {
        // min x² - y s.t. y <= x  -> unbounded along (1, 1)? no: x² grows, so along y only if free.
        // Here y is only bounded through y <= 5 - x² style rows absent, so: min x² - y, x free, y free.
        let p = qp(&[&[2, 0], &[0, 0]], &[0, -1], (&[], &[]), (&[], &[]));
        let rep = solve_qp(&p).unwrap();
        assert_eq!(rep.status, SolveStatus::Unbounded);
        p.verify(&rep).unwrap();

        // blocked: y <= 3 gives optimum (0, 3)
        let p = qp(&[&[2, 0], &[0, 0]], &[0, -1], (&[], &[]), (&[&[0, 1]], &[3]));
        let rep = solve_qp(&p).unwrap();
        assert_eq!(rep.x, RatVec::from_ints(&[0, 3]));
        p.verify(&rep).unwrap();
    }

    #[test]
    fn flat_direction_is_bounded() {
        // min (x - y)² with x + y <= 2: optimum 0 along the whole line x = y <= 1
        let p = qp(&[&[2, -2], &[-2, 2]], &[0, 0], (&[], &[]), (&[&[1, 1]], &[2]));
        let rep = solve_qp(&p).unwrap();
        assert_eq!(rep.value, Some(Rational::zero()));
        p.verify(&rep).unwrap();
    }

    #[test]
    fn infeasible_and_not_psd() {
        let p = qp(&[&[1]], &[0], (&[], &[]), (&[&[1], &[-1]], &[-1, 0]));
        assert_eq!(solve_qp(&p).unwrap().status, SolveStatus::Infeasible);
        let p = qp(&[&[-1]], &[0], (&[], &[]), (&[], &[]));
        assert!(matches!(solve_qp(&p), Err(SolveError::NotPsd(_))));
    }

    #[test]
    fn degenerate_vertex() {
        // many constraints active at the optimum (0,0)
        let p = qp(
            &[&[1, 0], &[0, 1]],
            &[1, 1],
            (&[], &[]),
            (&[&[-1, 0], &[0, -1], &[-1, -1], &[-2, -1]], &[0, 0, 0, 0]),
        );
        let rep = solve_qp(&p).unwrap();
        assert_eq!(rep.x, RatVec::from_ints(&[0, 0]));
        p.verify(&rep).unwrap();
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small() -> impl Strategy<Value = i64> {
            -3i64..=3
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(96))]

            /// Random PSD objective `LᵀL` over a box with one equality through a known point.
            #[test]
            fn kkt_exact_and_value_below_feasible_points(
                l in proptest::collection::vec(small(), 9),
                c in proptest::collection::vec(small(), 3),
                row in proptest::collection::vec(small(), 3),
                x0 in proptest::collection::vec(-2i64..=2, 3),
                probes in proptest::collection::vec(proptest::collection::vec(-4i64..=4, 3), 6),
            ) {
                let l = RatMat::from_ints(&[&l[0..3], &l[3..6], &l[6..9]]);
                let q = l.transpose().matmul(&l);
                let row_v = RatVec::from_ints(&row);
                let x0 = RatVec::from_ints(&x0);
                let mut ineq = Vec::new();
                for j in 0..3 {
                    let mut e = vec![0i64; 3];
                    e[j] = 1;
                    ineq.push(e.clone());
                    e[j] = -1;
                    ineq.push(e);
                }
                let ineq_refs: Vec<&[i64]> = ineq.iter().map(|r| r.as_slice()).collect();
                let p = QuadraticProgram {
                    q,
                    c: RatVec::from_ints(&c),
                    eq_lhs: RatMat::from_ints(&[&row]),
                    eq_rhs: RatVec::new(vec![row_v.dot(&x0)]),
                    ineq_lhs: RatMat::from_ints(&ineq_refs),
                    ineq_rhs: RatVec::from_ints(&[3, 3, 3, 3, 3, 3]),
                };
                let rep = solve_qp(&p).unwrap();
                prop_assert_eq!(rep.status, SolveStatus::Optimal);
                prop_assert_eq!(p.verify(&rep), Ok(()));
                let value = rep.value.clone().unwrap();
                prop_assert!(value <= p.objective_at(&x0));
                for probe in probes {
                    let y = RatVec::from_ints(&probe);
                    if p.is_feasible(&y) {
                        prop_assert!(value <= p.objective_at(&y));
                    }
                }
            }

            #[test]
            fn lp_strong_duality(
                obj in proptest::collection::vec(small(), 3),
                rows in proptest::collection::vec(proptest::collection::vec(small(), 3), 1..4),
                x0 in proptest::collection::vec(-2i64..=2, 3),
                slack in proptest::collection::vec(0i64..=2, 4),
            ) {
                // box plus random rows through a slack of a known point
                let x0 = RatVec::from_ints(&x0);
                let mut lhs: Vec<Vec<i64>> = rows.clone();
                let mut rhs: Vec<Rational> = rows
                    .iter()
                    .zip(&slack)
                    .map(|(r, s)| RatVec::from_ints(r).dot(&x0) + int(*s))
                    .collect();
                for j in 0..3 {
                    for sign in [1, -1] {
                        let mut e = vec![0i64; 3];
                        e[j] = sign;
                        lhs.push(e);
                        rhs.push(int(4));
                    }
                }
                let refs: Vec<&[i64]> = lhs.iter().map(|r| r.as_slice()).collect();
                let lp = LinearProgram {
                    objective: RatVec::from_ints(&obj),
                    eq_lhs: RatMat::zeros(0, 3),
                    eq_rhs: RatVec::default(),
                    ineq_lhs: RatMat::from_ints(&refs),
                    ineq_rhs: RatVec::new(rhs),
                };
                let rep = solve_lp(&lp).unwrap();
                prop_assert_eq!(rep.status, SolveStatus::Optimal);
                prop_assert_eq!(lp.as_qp().verify(&rep), Ok(()));
                let dual = -lp.ineq_rhs.dot(&rep.ineq_duals);
                prop_assert_eq!(Some(dual), rep.value);
            }
        }
    }
}
