//! Exact positive rationals used for reaction times.
//!
//! Reaction times are always handled as `N/D` with positive integer parts;
//! floating point would corrupt the strict-inequality reasoning the solver
//! relies on, so it is never used anywhere in the pipeline.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Rational64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RationalError {
    #[error("numerator and denominator must both be at least 1, got {0}/{1}")]
    NotPositive(i64, i64),
    #[error("malformed rational `{0}`, expected `N/D` with positive integers")]
    Malformed(String),
    #[error("rational arithmetic overflowed 64-bit range")]
    Overflow,
}

/// A strictly positive rational `N/D`, stored reduced and exact.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EpsilonRational {
    num: i64,
    den: i64,
}

impl EpsilonRational {
    pub fn new(num: i64, den: i64) -> Result<Self, RationalError> {
        if num < 1 || den < 1 {
            return Err(RationalError::NotPositive(num, den));
        }
        let g = num.gcd(&den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub fn one() -> Self {
        Self { num: 1, den: 1 }
    }

    pub fn numerator(&self) -> i64 {
        self.num
    }

    pub fn denominator(&self) -> i64 {
        self.den
    }

    pub fn as_ratio(&self) -> Rational64 {
        Rational64::new(self.num, self.den)
    }

    pub fn from_ratio(r: Rational64) -> Result<Self, RationalError> {
        Self::new(*r.numer(), *r.denom())
    }

    /// Exact midpoint `(self + other) / 2`, reduced; fails only if the result
    /// no longer fits in 64 bits.
    pub fn midpoint(&self, other: &Self) -> Result<Self, RationalError> {
        let n = i128::from(self.num) * i128::from(other.den)
            + i128::from(other.num) * i128::from(self.den);
        let d = 2 * i128::from(self.den) * i128::from(other.den);
        let g = n.gcd(&d);
        let (n, d) = (n / g, d / g);
        let num = i64::try_from(n).map_err(|_| RationalError::Overflow)?;
        let den = i64::try_from(d).map_err(|_| RationalError::Overflow)?;
        Self::new(num, den)
    }

    /// Exact difference `self - other` as a plain ratio (may be negative).
    pub fn diff(&self, other: &Self) -> Rational64 {
        self.as_ratio() - other.as_ratio()
    }
}

impl fmt::Display for EpsilonRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Debug for EpsilonRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for EpsilonRational {
    type Err = RationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || RationalError::Malformed(s.to_owned());
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let num: i64 = n.trim().parse().map_err(|_| bad())?;
        let den: i64 = d.trim().parse().map_err(|_| bad())?;
        Self::new(num, den).map_err(|_| bad())
    }
}

/// Renders a ratio as `N/D`, the only serialized form used by the tools.
pub fn format_ratio(r: Rational64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `N/D` (or a bare integer, taken as `N/1`).
pub fn parse_ratio(s: &str) -> Result<Rational64, RationalError> {
    let bad = || RationalError::Malformed(s.to_owned());
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: i64 = n.trim().parse().map_err(|_| bad())?;
    let den: i64 = d.trim().parse().map_err(|_| bad())?;
    if den == 0 {
        return Err(bad());
    }
    Ok(Rational64::new(num, den))
}
