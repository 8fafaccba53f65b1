//! Scalar helpers on top of [`BigRational`].
//!
//! `BigRational` already keeps every value in lowest terms with a positive
//! denominator, so the only work left here is the text encoding and the
//! integer square-root bounds used where an irrational quantity has to be
//! replaced by an exact upper bound.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::NumError;

/// Exact arbitrary-precision rational scalar.
pub type Rational = BigRational;

/// Integer-valued rational.
pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `p / q` in lowest terms. Panics when `q == 0`.
pub fn frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn from_bigint(v: BigInt) -> Rational {
    Rational::from_integer(v)
}

/// Parses `"p/q"` or `"p"`, base 10, with an optional leading minus on `p`.
pub fn parse_rational(text: &str) -> Result<Rational, NumError> {
    let bad = || NumError::Parse(text.to_string());
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let digits = num.strip_prefix('-').unwrap_or(num);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let numer: BigInt = num.parse().map_err(|_| bad())?;
    let denom = match den {
        None => BigInt::one(),
        Some(d) => {
            if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let d: BigInt = d.parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(NumError::ZeroDenominator(text.to_string()));
            }
            d
        }
    };
    Ok(Rational::new(numer, denom))
}

/// Canonical `"p/q"` text, `"p"` when the denominator is one.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

/// Smallest integer `k >= 0` with `k * k >= value` (zero for negative input).
pub fn ceil_sqrt(value: &Rational) -> BigInt {
    if !value.is_positive() {
        return BigInt::zero();
    }
    let n = value.ceil().to_integer();
    let k = n.sqrt();
    if &k * &k < n {
        k + 1
    } else {
        k
    }
}

/// Exact rational upper bound on `sqrt(value)`, within `2^-20 / q` of the
/// true root: `ceil_isqrt(p*q*4^20) / (q*2^20)`.
///
/// Equal to the true root whenever `p*q` is a perfect square, and tends to
/// zero with `value`, unlike the integer [`ceil_sqrt`].
pub fn sqrt_upper(value: &Rational) -> Rational {
    if !value.is_positive() {
        return Rational::zero();
    }
    let scale = BigInt::one() << SQRT_BITS;
    let radicand = value.numer() * value.denom() * &scale * &scale;
    let mut k = radicand.sqrt();
    if &k * &k < radicand {
        k += 1;
    }
    Rational::new(k, value.denom() * scale)
}

const SQRT_BITS: usize = 20;

/// `true` when `value` is an integer.
pub fn is_integer(value: &Rational) -> bool {
    value.denom().is_one()
}

/// Binary encoding size: bits of numerator plus bits of denominator.
pub fn bit_size(value: &Rational) -> u64 {
    value.numer().bits() + value.denom().bits()
}

/// Least common multiple of the denominators of `values` (one for an empty input).
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}
