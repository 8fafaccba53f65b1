//! Exact rational scalars, vectors, matrices and the elimination kernels the
//! solvers are built on. Nothing in this crate touches floating point.

mod linalg;
mod matrix;
mod rational;
mod vector;

pub use linalg::{
    independent_rows, ldl_psd_check, nullspace, solve_linear, LinearSolution, PsdReport,
};
pub(crate) use linalg::RowBasis;
pub use matrix::RatMat;
pub use rational::{
    bit_size, ceil_sqrt, denominator_lcm, format_rational, frac, from_bigint, int, is_integer,
    parse_rational, sqrt_upper, Rational,
};
pub use vector::{opt_rational_string, rational_string, RatVec};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum NumError {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("matrix is {0}x{1}, expected square")]
    NotSquare(usize, usize),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("cannot parse rational {0:?}")]
    Parse(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}
