use std::fmt;
use std::ops::{Deref, DerefMut};

use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rational::{format_rational, int, parse_rational, Rational};

/// Dense vector of exact rationals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RatVec(Vec<Rational>);

impl RatVec {
    pub fn new(entries: Vec<Rational>) -> Self {
        RatVec(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        RatVec(vec![Rational::zero(); dim])
    }

    pub fn from_ints(values: &[i64]) -> Self {
        values.iter().map(|&v| int(v)).collect()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<Rational> {
        self.0
    }

    pub fn dot(&self, other: &[Rational]) -> Rational {
        debug_assert_eq!(self.len(), other.len());
        dot(&self.0, other)
    }

    pub fn add(&self, other: &RatVec) -> RatVec {
        debug_assert_eq!(self.len(), other.len());
        self.iter().zip(other.iter()).map(|(a, b)| a + b).collect()
    }

    pub fn sub(&self, other: &RatVec) -> RatVec {
        debug_assert_eq!(self.len(), other.len());
        self.iter().zip(other.iter()).map(|(a, b)| a - b).collect()
    }

    pub fn scale(&self, factor: &Rational) -> RatVec {
        self.iter().map(|a| a * factor).collect()
    }

    pub fn neg(&self) -> RatVec {
        self.iter().map(|a| -a).collect()
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: &Rational, other: &RatVec) -> RatVec {
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| a + factor * b)
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.iter().all(Zero::is_zero)
    }

    pub fn norm_inf(&self) -> Rational {
        self.iter()
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn norm1(&self) -> Rational {
        self.iter().map(|v| v.abs()).sum()
    }

    pub fn norm2_sq(&self) -> Rational {
        self.iter().map(|v| v * v).sum()
    }

    pub fn concat(&self, other: &RatVec) -> RatVec {
        self.iter().chain(other.iter()).cloned().collect()
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> RatVec {
        RatVec(self.0[range].to_vec())
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.iter().map(format_rational).collect()
    }

    pub fn from_strings<S: AsRef<str>>(items: &[S]) -> Result<RatVec, super::NumError> {
        items
            .iter()
            .map(|s| parse_rational(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()
            .map(RatVec)
    }
}

pub(crate) fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

impl Deref for RatVec {
    type Target = Vec<Rational>;
    fn deref(&self) -> &Vec<Rational> {
        &self.0
    }
}

impl DerefMut for RatVec {
    fn deref_mut(&mut self) -> &mut Vec<Rational> {
        &mut self.0
    }
}

impl From<Vec<Rational>> for RatVec {
    fn from(v: Vec<Rational>) -> Self {
        RatVec(v)
    }
}

impl FromIterator<Rational> for RatVec {
    fn from_iter<I: IntoIterator<Item = Rational>>(iter: I) -> Self {
        RatVec(iter.into_iter().collect())
    }
}

impl fmt::Display for RatVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for RatVec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_strings().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RatVec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Vec::<String>::deserialize(deserializer)?;
        RatVec::from_strings(&raw).map_err(D::Error::custom)
    }
}

/// Serde adapter for a single [`Rational`] as a `"p/q"` string.
pub mod rational_string {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        let raw = String::deserialize(deserializer)?;
        parse_rational(&raw).map_err(D::Error::custom)
    }
}

/// Serde adapter for `Option<Rational>`; `None` becomes JSON `null`.
pub mod opt_rational_string {
    use super::*;

    pub fn serialize<S: Serializer>(
        value: &Option<Rational>,
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        value.as_ref().map(format_rational).serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(deserializer)?
            .map(|s| parse_rational(&s).map_err(D::Error::custom))
            .transpose()
    }
}
