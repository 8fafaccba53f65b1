//! Fixing the integer part `x₂` turns every problem in this crate into a
//! small convex problem in the continuous part `x₁`. The blocks of the
//! data that survive that substitution are computed once per instance.

use num_traits::{One, Zero};

use crate::convexsolve::{solve_lp, solve_qp_trusted, LinearProgram, QuadraticProgram, SolveError, SolveStatus};
use crate::instance::MiqpInstance;
use crate::numkit::{int, RatMat, RatVec, Rational};
use crate::penalty::{Penalty, PenaltyKind};

pub(crate) struct Decomposition {
    pub n1: usize,
    pub q11: RatMat,
    pub q12: RatMat,
    pub q22: RatMat,
    pub c1: RatVec,
    pub c2: RatVec,
    pub a1: RatMat,
    pub a2: RatMat,
    /// Rows of `E` that involve `x₁`, split by column block.
    pub e1: RatMat,
    pub e2: RatMat,
    pub f_cont: RatVec,
    /// Rows of `E` that only involve `x₂`.
    pub e2_pure: RatMat,
    pub f_pure: RatVec,
    pub b: RatVec,
}

/// Data of the problem in `x₁` once `x₂` is fixed.
#[derive(Clone, Debug)]
pub(crate) struct Slice {
    pub x2: Vec<i64>,
    pub x2r: RatVec,
    /// `c₁ + Q₁₂x₂`
    pub lin: RatVec,
    /// `c₂ᵀx₂ + ½x₂ᵀQ₂₂x₂`
    pub constant: Rational,
    /// `b − A₂x₂`
    pub b_res: RatVec,
    /// `f − E₂x₂` on the rows involving `x₁`
    pub f_res: RatVec,
}

#[derive(Clone, Debug)]
pub(crate) enum SliceValue {
    Infeasible,
    Unbounded { x1: RatVec, ray: RatVec },
    Finite { value: Rational, x1: RatVec },
}

impl Decomposition {
    pub fn new(inst: &MiqpInstance) -> Self {
        let (n1, n) = (inst.n1, inst.n());
        let m = inst.m();
        let cont = 0..n1;
        let int_part = n1..n;
        let mut cont_rows = Vec::new();
        let mut pure_rows = Vec::new();
        for i in 0..inst.e.rows() {
            if inst.e.row(i)[..n1].iter().all(Zero::is_zero) {
                pure_rows.push(i);
            } else {
                cont_rows.push(i);
            }
        }
        let e_cont = inst.e.select_rows(&cont_rows);
        let e_pure = inst.e.select_rows(&pure_rows);
        Decomposition {
            n1,
            q11: inst.q.block(cont.clone(), cont.clone()),
            q12: inst.q.block(cont.clone(), int_part.clone()),
            q22: inst.q.block(int_part.clone(), int_part.clone()),
            c1: inst.c.slice(cont.clone()),
            c2: inst.c.slice(int_part.clone()),
            a1: inst.a.block(0..m, cont.clone()),
            a2: inst.a.block(0..m, int_part.clone()),
            e1: e_cont.block(0..cont_rows.len(), cont),
            e2: e_cont.block(0..cont_rows.len(), int_part.clone()),
            f_cont: cont_rows.iter().map(|&i| inst.f[i].clone()).collect(),
            e2_pure: e_pure.block(0..pure_rows.len(), int_part),
            f_pure: pure_rows.iter().map(|&i| inst.f[i].clone()).collect(),
            b: inst.b.clone(),
        }
    }

    pub fn a1_is_zero(&self) -> bool {
        self.a1.is_zero()
    }

    /// `None` when `x₂` violates a row that only involves integer variables.
    pub fn slice(&self, x2: &[i64]) -> Option<Slice> {
        let x2r: RatVec = x2.iter().map(|&v| int(v)).collect();
        let pure = self.e2_pure.mul_vec(&x2r);
        if pure.iter().zip(self.f_pure.iter()).any(|(l, r)| l > r) {
            return None;
        }
        let lin = self.c1.add(&self.q12.mul_vec(&x2r));
        let constant = self.c2.dot(&x2r) + self.q22.quad_form(&x2r) / int(2);
        Some(Slice {
            b_res: self.b.sub(&self.a2.mul_vec(&x2r)),
            f_res: self.f_cont.sub(&self.e2.mul_vec(&x2r)),
            x2: x2.to_vec(),
            x2r,
            lin,
            constant,
        })
    }

    pub fn full_x(&self, x1: &RatVec, s: &Slice) -> RatVec {
        x1.concat(&s.x2r)
    }

    fn qp_in_x1(&self, q: RatMat, c: RatVec, eq: (RatMat, RatVec), s: &Slice) -> QuadraticProgram {
        QuadraticProgram {
            q,
            c,
            eq_lhs: eq.0,
            eq_rhs: eq.1,
            ineq_lhs: self.e1.clone(),
            ineq_rhs: s.f_res.clone(),
        }
    }

    fn finish(rep: crate::convexsolve::SolveReport, offset: Rational, n1: usize) -> SliceValue {
        match rep.status {
            SolveStatus::Infeasible => SliceValue::Infeasible,
            SolveStatus::Unbounded => SliceValue::Unbounded {
                x1: rep.x.slice(0..n1),
                ray: rep.ray.expect("unbounded report has a ray").slice(0..n1),
            },
            SolveStatus::Optimal => SliceValue::Finite {
                value: rep.value.expect("optimal report has a value") + offset,
                x1: rep.x.slice(0..n1),
            },
        }
    }

    /// Whether `{x₁ : E₁x₁ ≤ f − E₂x₂}` is nonempty.
    pub fn slice_feasible(&self, s: &Slice) -> Result<bool, SolveError> {
        if self.n1 == 0 || self.e1.rows() == 0 {
            return Ok(true);
        }
        let lp = LinearProgram::feasibility(
            self.n1,
            RatMat::zeros(0, self.n1),
            RatVec::default(),
            self.e1.clone(),
            s.f_res.clone(),
        );
        Ok(solve_lp(&lp)?.status != SolveStatus::Infeasible)
    }

    /// `min ½x₁ᵀQ₁₁x₁ + linᵀx₁ + constant` s.t. `A₁x₁ = b_res`, `E₁x₁ ≤ f_res`.
    pub fn solve_ip_slice(&self, s: &Slice) -> Result<SliceValue, SolveError> {
        if self.n1 == 0 {
            return Ok(if s.b_res.is_zero() {
                SliceValue::Finite {
                    value: s.constant.clone(),
                    x1: RatVec::default(),
                }
            } else {
                SliceValue::Infeasible
            });
        }
        let qp = self.qp_in_x1(
            self.q11.clone(),
            s.lin.clone(),
            (self.a1.clone(), s.b_res.clone()),
            s,
        );
        Ok(Self::finish(solve_qp_trusted(&qp)?, s.constant.clone(), self.n1))
    }

    /// The augmented Lagrangian restricted to the slice.
    pub fn solve_lr_slice(
        &self,
        s: &Slice,
        lambda: &RatVec,
        rho: &Rational,
        p: &Penalty,
    ) -> Result<SliceValue, SolveError> {
        self.penalised_slice(&self.q11, s, lambda, rho, p)
    }

    /// Like [`Decomposition::solve_lr_slice`] with `q11` in place of `Q₁₁`.
    fn penalised_slice(
        &self,
        q11: &RatMat,
        s: &Slice,
        lambda: &RatVec,
        rho: &Rational,
        p: &Penalty,
    ) -> Result<SliceValue, SolveError> {
        let offset = &s.constant + lambda.dot(&s.b_res);
        let penalised = !rho.is_zero() && !s.b_res.is_empty();
        if self.n1 == 0 {
            let mut value = offset;
            if penalised {
                value += rho * p.evaluate(&s.b_res).expect("penalty dimension matches A");
            }
            return Ok(SliceValue::Finite {
                value,
                x1: RatVec::default(),
            });
        }
        let n1 = self.n1;
        let lin = s.lin.sub(&self.a1.tr_mul_vec(lambda));
        let no_eq = (RatMat::zeros(0, n1), RatVec::default());
        if !penalised {
            let qp = self.qp_in_x1(q11.clone(), lin, no_eq, s);
            return Ok(Self::finish(solve_qp_trusted(&qp)?, offset, n1));
        }
        if p.kind == PenaltyKind::SqL2 {
            let two_rho = int(2) * rho;
            let ata = self.a1.transpose().matmul(&self.a1);
            let q = q11.add(&ata.scale(&two_rho));
            let c = lin.sub(&self.a1.tr_mul_vec(&s.b_res).scale(&two_rho));
            let qp = self.qp_in_x1(q, c, no_eq, s);
            return Ok(Self::finish(
                solve_qp_trusted(&qp)?,
                offset + rho * s.b_res.norm2_sq(),
                n1,
            ));
        }
        let rows = p
            .epigraph_rows(&self.a1, &s.b_res)
            .expect("norm penalty with matching dimension");
        let width = n1 + 1 + rows.aux;
        let q = q11
            .hstack(&RatMat::zeros(n1, width - n1))
            .vstack(&RatMat::zeros(width - n1, width));
        let mut c = RatVec::zeros(width);
        c[..n1].clone_from_slice(&lin);
        c[n1] = rho.clone();
        let mut ineq_lhs = rows.ineq_lhs;
        let mut ineq_rhs = rows.ineq_rhs;
        for (i, r) in self.e1.row_iter().enumerate() {
            let mut row = vec![Rational::zero(); width];
            row[..n1].clone_from_slice(r);
            ineq_lhs.push_row(&row);
            ineq_rhs.push(s.f_res[i].clone());
        }
        let qp = QuadraticProgram {
            q,
            c,
            eq_lhs: rows.eq_lhs,
            eq_rhs: rows.eq_rhs,
            ineq_lhs,
            ineq_rhs,
        };
        Ok(Self::finish(solve_qp_trusted(&qp)?, offset, n1))
    }

    /// `min ψ(b_res − A₁x₁)` over the slice; `None` when the slice is empty.
    pub fn min_violation(&self, s: &Slice, p: &Penalty) -> Result<Option<(Rational, RatVec)>, SolveError> {
        let bare = Slice {
            constant: Rational::zero(),
            lin: RatVec::zeros(self.n1),
            ..s.clone()
        };
        let zero = RatVec::zeros(s.b_res.dim());
        let flat = RatMat::zeros(self.n1, self.n1);
        match self.penalised_slice(&flat, &bare, &zero, &Rational::one(), p)? {
            SliceValue::Infeasible => Ok(None),
            SliceValue::Unbounded { .. } => unreachable!("a penalty is bounded below by zero"),
            SliceValue::Finite { value, x1 } => Ok(Some((value, x1))),
        }
    }

    /// Whether `A₁x₁` takes more than one value on the slice.
    pub fn violation_varies(&self, s: &Slice) -> Result<bool, SolveError> {
        if self.n1 == 0 || self.a1_is_zero() {
            return Ok(false);
        }
        for i in 0..self.a1.rows() {
            let row = self.a1.row_vec(i);
            if row.is_zero() {
                continue;
            }
            let solve = |obj: RatVec| {
                solve_lp(&LinearProgram {
                    objective: obj,
                    eq_lhs: RatMat::zeros(0, self.n1),
                    eq_rhs: RatVec::default(),
                    ineq_lhs: self.e1.clone(),
                    ineq_rhs: s.f_res.clone(),
                })
            };
            let lo = solve(row.clone())?;
            let hi = solve(row.neg())?;
            match (lo.status, hi.status) {
                (SolveStatus::Optimal, SolveStatus::Optimal) => {
                    if lo.value.unwrap() != -hi.value.unwrap() {
                        return Ok(true);
                    }
                }
                (SolveStatus::Infeasible, _) | (_, SolveStatus::Infeasible) => return Ok(false),
                _ => return Ok(true),
            }
        }
        Ok(false)
    }
}
