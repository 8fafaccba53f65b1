//! Exact elimination kernels: row reduction, linear solves, null spaces and
//! the semidefiniteness test.

use num_traits::{One, Signed, Zero};

use super::matrix::RatMat;
use super::rational::{int, Rational};
use super::vector::RatVec;
use super::NumError;

/// Outcome of [`solve_linear`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinearSolution {
    /// Full column rank and consistent.
    Unique(RatVec),
    /// Consistent but rank deficient: every solution is `particular + span(kernel)`.
    Parametric {
        rank: usize,
        particular: RatVec,
        kernel: Vec<RatVec>,
    },
    Inconsistent {
        rank: usize,
    },
}

impl LinearSolution {
    /// Some solution (the particular one with free variables at zero), if any.
    pub fn solution(&self) -> Option<&RatVec> {
        match self {
            LinearSolution::Unique(x) => Some(x),
            LinearSolution::Parametric { particular, .. } => Some(particular),
            LinearSolution::Inconsistent { .. } => None,
        }
    }

    pub fn rank(&self, cols: usize) -> usize {
        match self {
            LinearSolution::Unique(_) => cols,
            LinearSolution::Parametric { rank, .. } | LinearSolution::Inconsistent { rank } => *rank,
        }
    }
}

/// Reduced row echelon form of `rows`, pivoting only inside the first
/// `pivot_cols` columns. Returns the pivot column of each leading row.
pub(crate) fn rref_in_place(rows: &mut [Vec<Rational>], pivot_cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..pivot_cols {
        if r == rows.len() {
            break;
        }
        let Some(found) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, found);
        let inv = rows[r][col].recip();
        if !inv.is_one() {
            for v in rows[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    pivots
}

fn kernel_from_rref(rows: &[Vec<Rational>], pivots: &[usize], cols: usize) -> Vec<RatVec> {
    let mut is_pivot = vec![false; cols];
    for &p in pivots {
        is_pivot[p] = true;
    }
    (0..cols)
        .filter(|&j| !is_pivot[j])
        .map(|free| {
            let mut v = RatVec::zeros(cols);
            v[free] = int(1);
            for (k, &p) in pivots.iter().enumerate() {
                v[p] = -rows[k][free].clone();
            }
            v
        })
        .collect()
}

/// Solves `m · x = v` exactly by Gauss–Jordan elimination over the rationals.
pub fn solve_linear(m: &RatMat, v: &[Rational]) -> Result<LinearSolution, NumError> {
    if m.rows() != v.len() {
        return Err(NumError::DimMismatch(format!(
            "matrix has {} rows but right-hand side has {} entries",
            m.rows(),
            v.len()
        )));
    }
    let cols = m.cols();
    let mut rows: Vec<Vec<Rational>> = m
        .row_iter()
        .zip(v)
        .map(|(r, b)| {
            let mut row = r.to_vec();
            row.push(b.clone());
            row
        })
        .collect();
    let pivots = rref_in_place(&mut rows, cols);
    let rank = pivots.len();
    if rows[rank..].iter().any(|r| !r[cols].is_zero()) {
        return Ok(LinearSolution::Inconsistent { rank });
    }
    let mut particular = RatVec::zeros(cols);
    for (k, &p) in pivots.iter().enumerate() {
        particular[p] = rows[k][cols].clone();
    }
    if rank == cols {
        return Ok(LinearSolution::Unique(particular));
    }
    let kernel = kernel_from_rref(&rows, &pivots, cols);
    Ok(LinearSolution::Parametric {
        rank,
        particular,
        kernel,
    })
}

/// Basis of `{x : m x = 0}`, one vector per free column.
pub fn nullspace(m: &RatMat) -> Vec<RatVec> {
    let mut rows: Vec<Vec<Rational>> = m.row_iter().map(<[Rational]>::to_vec).collect();
    let pivots = rref_in_place(&mut rows, m.cols());
    kernel_from_rref(&rows, &pivots, m.cols())
}

/// Incremental row-space basis used to pick linearly independent rows.
#[derive(Clone, Debug, Default)]
pub(crate) struct RowBasis {
    /// Reduced rows, each with a unit entry at its pivot column.
    rows: Vec<(usize, Vec<Rational>)>,
}

impl RowBasis {
    pub(crate) fn new() -> Self {
        RowBasis { rows: Vec::new() }
    }

    fn reduce(&self, row: &[Rational]) -> Vec<Rational> {
        let mut r = row.to_vec();
        for (p, b) in &self.rows {
            if r[*p].is_zero() {
                continue;
            }
            let f = r[*p].clone();
            for (x, y) in r.iter_mut().zip(b) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        r
    }

    /// Adds `row` if it is independent of the current basis.
    pub(crate) fn try_insert(&mut self, row: &[Rational]) -> bool {
        let mut r = self.reduce(row);
        let Some(p) = r.iter().position(|v| !v.is_zero()) else {
            return false;
        };
        let inv = r[p].recip();
        for v in r.iter_mut() {
            *v *= &inv;
        }
        for (_, b) in self.rows.iter_mut() {
            if b[p].is_zero() {
                continue;
            }
            let f = b[p].clone();
            for (x, y) in b.iter_mut().zip(&r) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        self.rows.push((p, r));
        true
    }
}

/// Indices of a maximal linearly independent subset of the rows of `m`,
/// chosen greedily in index order.
pub fn independent_rows(m: &RatMat) -> Vec<usize> {
    let mut basis = RowBasis::new();
    (0..m.rows()).filter(|&i| basis.try_insert(m.row(i))).collect()
}

/// Result of [`ldl_psd_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsdReport {
    pub is_psd: bool,
    /// `vᵀ M v < 0` whenever `is_psd` is false.
    pub witness: Option<RatVec>,
    /// `(index, d)` for every positive pivot taken, in elimination order.
    pub pivots: Vec<(usize, Rational)>,
}

/// Decides `M ⪰ 0` exactly by symmetric-pivoted LDLᵀ.
///
/// A negative pivot, or a zero pivot whose row in the Schur complement is
/// not identically zero, yields a negative-curvature witness lifted back to
/// the original coordinates.
pub fn ldl_psd_check(m: &RatMat) -> Result<PsdReport, NumError> {
    if !m.is_square() {
        return Err(NumError::NotSquare(m.rows(), m.cols()));
    }
    if !m.is_symmetric() {
        return Err(NumError::NotSymmetric);
    }
    let n = m.rows();
    let mut schur = m.clone();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut eliminated: Vec<usize> = Vec::new();
    let mut pivots = Vec::new();

    loop {
        if let Some(&i) = remaining.iter().find(|&&i| schur[(i, i)].is_negative()) {
            let mut u = RatVec::zeros(n);
            u[i] = int(1);
            let witness = lift_witness(m, &eliminated, &remaining, u);
            return Ok(PsdReport {
                is_psd: false,
                witness: Some(witness),
                pivots,
            });
        }
        let Some(pos) = remaining.iter().position(|&i| schur[(i, i)].is_positive()) else {
            break;
        };
        let p = remaining.remove(pos);
        let d = schur[(p, p)].clone();
        for &j in &remaining {
            if schur[(j, p)].is_zero() {
                continue;
            }
            let l = &schur[(j, p)] / &d;
            for &k in &remaining {
                if schur[(p, k)].is_zero() {
                    continue;
                }
                let delta = &l * &schur[(p, k)];
                schur[(j, k)] -= delta;
            }
        }
        eliminated.push(p);
        pivots.push((p, d));
    }

    // Every remaining diagonal entry is zero; the block must vanish entirely.
    for (a, &j) in remaining.iter().enumerate() {
        for &k in &remaining[a + 1..] {
            let s = &schur[(j, k)];
            if s.is_zero() {
                continue;
            }
            let mut u = RatVec::zeros(n);
            u[j] = int(1);
            u[k] = if s.is_positive() { int(-1) } else { int(1) };
            let witness = lift_witness(m, &eliminated, &remaining, u);
            return Ok(PsdReport {
                is_psd: false,
                witness: Some(witness),
                pivots,
            });
        }
    }
    Ok(PsdReport {
        is_psd: true,
        witness: None,
        pivots,
    })
}

/// Given `u` supported on `free`, sets the eliminated coordinates to
/// `-M_PP⁻¹ M_PF u` so that `vᵀ M v` equals `uᵀ S u` for the Schur complement `S`.
fn lift_witness(m: &RatMat, eliminated: &[usize], free: &[usize], u: RatVec) -> RatVec {
    let mut v = u;
    if !eliminated.is_empty() {
        let m_pp = m.select_rows(eliminated).select_cols(eliminated);
        let m_pf = m.select_rows(eliminated).select_cols(free);
        let u_f: Vec<Rational> = free.iter().map(|&j| v[j].clone()).collect();
        let rhs = m_pf.mul_vec(&u_f).neg();
        let sol = solve_linear(&m_pp, &rhs).expect("square pivot block");
        let x = sol.solution().expect("positive definite pivot block").clone();
        for (k, &p) in eliminated.iter().enumerate() {
            v[p] = x[k].clone();
        }
    }
    debug_assert!(m.quad_form(&v).is_negative());
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::frac;

    #[test]
    fn psd_examples() {
        let id = RatMat::identity(2);
        assert!(ldl_psd_check(&id).unwrap().is_psd);

        let indefinite = RatMat::from_ints(&[&[1, 2], &[2, 1]]);
        let rep = ldl_psd_check(&indefinite).unwrap();
        assert!(!rep.is_psd);
        let w = rep.witness.unwrap();
        assert!(indefinite.quad_form(&w).is_negative());

        assert!(ldl_psd_check(&RatMat::zeros(2, 2)).unwrap().is_psd);
    }

    #[test]
    fn zero_pivot_with_nonzero_row() {
        let m = RatMat::from_ints(&[&[0, 1], &[1, 0]]);
        let rep = ldl_psd_check(&m).unwrap();
        assert!(!rep.is_psd);
        assert!(m.quad_form(rep.witness.as_ref().unwrap()).is_negative());

        // semidefinite boundary: rank one
        let m = RatMat::from_ints(&[&[1, 1], &[1, 1]]);
        assert!(ldl_psd_check(&m).unwrap().is_psd);
    }

    #[test]
    fn witness_is_lifted_through_pivots() {
        // Schur complement of the (0,0) pivot is [[1, 3],[3, 1]] - ..., indefinite
        let m = RatMat::from_ints(&[&[2, 1, 0], &[1, 1, 3], &[0, 3, 1]]);
        let rep = ldl_psd_check(&m).unwrap();
        assert!(!rep.is_psd);
        assert!(m.quad_form(rep.witness.as_ref().unwrap()).is_negative());
    }

    #[test]
    fn psd_errors() {
        assert!(matches!(
            ldl_psd_check(&RatMat::zeros(2, 3)),
            Err(NumError::NotSquare(2, 3))
        ));
        let asym = RatMat::from_ints(&[&[1, 2], &[0, 1]]);
        assert!(matches!(ldl_psd_check(&asym), Err(NumError::NotSymmetric)));
    }

    #[test]
    fn solve_examples() {
        let id = RatMat::identity(2);
        assert_eq!(
            solve_linear(&id, &RatVec::from_ints(&[3, 5])).unwrap(),
            LinearSolution::Unique(RatVec::from_ints(&[3, 5]))
        );
        let two = RatMat::from_ints(&[&[2]]);
        assert_eq!(
            solve_linear(&two, &RatVec::from_ints(&[1])).unwrap(),
            LinearSolution::Unique(RatVec::new(vec![frac(1, 2)]))
        );
        let sing = RatMat::from_ints(&[&[1, 1], &[2, 2]]);
        assert!(matches!(
            solve_linear(&sing, &RatVec::from_ints(&[1, 3])).unwrap(),
            LinearSolution::Inconsistent { rank: 1 }
        ));
        assert!(matches!(
            solve_linear(&sing, &RatVec::from_ints(&[1])),
            Err(NumError::DimMismatch(_))
        ));
    }

    #[test]
    fn parametric_solution_spans_kernel() {
        let m = RatMat::from_ints(&[&[1, 1, 0], &[0, 0, 1]]);
        let rhs = RatVec::from_ints(&[2, 1]);
        match solve_linear(&m, &rhs).unwrap() {
            LinearSolution::Parametric {
                rank,
                particular,
                kernel,
            } => {
                assert_eq!(rank, 2);
                assert_eq!(m.mul_vec(&particular), rhs);
                assert_eq!(kernel.len(), 1);
                assert!(m.mul_vec(&kernel[0]).is_zero());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn independent_rows_greedy() {
        let m = RatMat::from_ints(&[&[1, 1], &[2, 2], &[0, 1], &[1, 0]]);
        assert_eq!(independent_rows(&m), vec![0, 2]);
    }
}
