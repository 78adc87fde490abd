//! Positive rates and the two probability arithmetics.
//!
//! Rates are kept as exact rationals. Every finite decimal literal is
//! rational, so models written by hand are always exact; float arithmetic is
//! only used when the caller asks for it via [`Arith::Float`].

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RateError {
    #[error("rate must be strictly positive, got {0}")]
    NonPositive(String),
    #[error("invalid number literal `{0}`")]
    BadLiteral(String),
}

/// A strictly positive firing rate.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rate(Rational);

impl Rate {
    pub fn new(value: Rational) -> Result<Self, RateError> {
        if value.is_positive() {
            Ok(Self(value))
        } else {
            Err(RateError::NonPositive(format_rational(&value)))
        }
    }

    pub fn one() -> Self {
        Self(Rational::one())
    }

    pub fn from_integer(n: u64) -> Result<Self, RateError> {
        Self::new(Rational::from_integer(BigInt::from(n)))
    }

    /// Parses a decimal (`70.0`, `1e-3`) or fraction (`2/3`) literal.
    pub fn parse(text: &str) -> Result<Self, RateError> {
        Self::new(parse_rational(text)?)
    }

    /// Converts a finite `f64` exactly (binary expansion).
    pub fn from_f64(x: f64) -> Result<Self, RateError> {
        let r = Rational::from_float(x).ok_or_else(|| RateError::BadLiteral(x.to_string()))?;
        Self::new(r)
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.0)
    }

    /// `self + delta`, failing if the result is not positive.
    pub fn checked_add(&self, delta: &Rational) -> Result<Self, RateError> {
        Self::new(&self.0 + delta)
    }

    pub fn mul(&self, other: &Rate) -> Rate {
        Rate(&self.0 * &other.0)
    }

    pub fn pow(&self, exp: u64) -> Rate {
        let mut acc = Rational::one();
        for _ in 0..exp {
            acc *= &self.0;
        }
        Rate(acc)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

impl fmt::Debug for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rate({})", format_rational(&self.0))
    }
}

impl FromStr for Rate {
    type Err = RateError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rate::parse(s)
    }
}

/// Parses `12`, `70.0`, `-0.25`, `1e-3`, `2/3`.
pub fn parse_rational(text: &str) -> Result<Rational, RateError> {
    let bad = || RateError::BadLiteral(text.to_string());
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(n / d);
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut r = Rational::from_integer(numer);
    if scale >= 0 {
        r *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

/// Decimal text when the value has a terminating expansion, `n/d` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut d = r.denom().clone();
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    let mut twos = 0usize;
    let mut fives = 0usize;
    while d.is_even() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = twos.max(fives);
    let scaled = r * Rational::from_integer(num_traits::pow(BigInt::from(10u32), places));
    let digits = scaled.numer().abs().to_string();
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac) = digits.split_at(digits.len() - places);
    let sign = if r.is_negative() { "-" } else { "" };
    format!("{sign}{int_part}.{frac}")
}

/// Exact fraction text, always `n/d` unless the value is an integer.
pub fn fraction_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Huge numerators/denominators: fall back to a ratio of scaled parts.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Formats `x` with 12 significant digits, trailing zeros trimmed.
pub fn format_f64_12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Arithmetic used for probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arith {
    #[default]
    Exact,
    Float,
}

impl FromStr for Arith {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Arith::Exact),
            "float" => Ok(Arith::Float),
            other => Err(format!("unknown arithmetic `{other}` (expected exact|float)")),
        }
    }
}

impl fmt::Display for Arith {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arith::Exact => "exact",
            Arith::Float => "float",
        })
    }
}

/// A probability (or any non-negative weight) in one of the two arithmetics.
#[derive(Clone, PartialEq)]
pub enum Prob {
    Exact(Rational),
    Float(f64),
}

impl Prob {
    pub fn zero(arith: Arith) -> Self {
        match arith {
            Arith::Exact => Prob::Exact(Rational::zero()),
            Arith::Float => Prob::Float(0.0),
        }
    }

    pub fn one(arith: Arith) -> Self {
        match arith {
            Arith::Exact => Prob::Exact(Rational::one()),
            Arith::Float => Prob::Float(1.0),
        }
    }

    pub fn from_rate(rate: &Rate, arith: Arith) -> Self {
        match arith {
            Arith::Exact => Prob::Exact(rate.value().clone()),
            Arith::Float => Prob::Float(rate.to_f64()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Prob::Exact(r) => rational_to_f64(r),
            Prob::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Prob::Exact(r) => Some(r),
            Prob::Float(_) => None,
        }
    }

    pub fn add(&self, other: &Prob) -> Prob {
        match (self, other) {
            (Prob::Exact(a), Prob::Exact(b)) => Prob::Exact(a + b),
            _ => Prob::Float(self.to_f64() + other.to_f64()),
        }
    }

    pub fn mul(&self, other: &Prob) -> Prob {
        match (self, other) {
            (Prob::Exact(a), Prob::Exact(b)) => Prob::Exact(a * b),
            _ => Prob::Float(self.to_f64() * other.to_f64()),
        }
    }

    /// `self / other`; `other` must be nonzero.
    pub fn div(&self, other: &Prob) -> Prob {
        match (self, other) {
            (Prob::Exact(a), Prob::Exact(b)) => Prob::Exact(a / b),
            _ => Prob::Float(self.to_f64() / other.to_f64()),
        }
    }

    pub fn div_usize(&self, n: usize) -> Prob {
        match self {
            Prob::Exact(a) => Prob::Exact(a / Rational::from_integer(BigInt::from(n))),
            Prob::Float(x) => Prob::Float(x / n as f64),
        }
    }

    /// Numerator and denominator as decimal strings. Float values are
    /// expanded to the exact rational of their binary representation.
    pub fn numer_denom(&self) -> (String, String) {
        let r = match self {
            Prob::Exact(r) => r.clone(),
            Prob::Float(x) => Rational::from_float(*x).unwrap_or_else(Rational::zero),
        };
        (r.numer().to_string(), r.denom().to_string())
    }
}

impl fmt::Display for Prob {
    /// Exact values as fractions, floats with 12 significant digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prob::Exact(r) => f.write_str(&fraction_string(r)),
            Prob::Float(x) => f.write_str(&format_f64_12(*x)),
        }
    }
}

impl fmt::Debug for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Shorthand for building exact rationals in code and tests.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("70.0").unwrap(), ratio(70, 1));
        assert_eq!(parse_rational("0.8").unwrap(), ratio(4, 5));
        assert_eq!(parse_rational("1e-3").unwrap(), ratio(1, 1000));
        assert_eq!(parse_rational("2/3").unwrap(), ratio(2, 3));
        assert_eq!(parse_rational("-0.25").unwrap(), ratio(-1, 4));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn rates_are_positive() {
        assert!(Rate::parse("0").is_err());
        assert!(Rate::parse("-1").is_err());
        let r = Rate::parse("70").unwrap();
        assert_eq!(r.checked_add(&ratio(3, 1)).unwrap(), Rate::parse("73").unwrap());
        assert!(r.checked_add(&ratio(-70, 1)).is_err());
    }

    #[test]
    fn formats_terminating_decimals() {
        assert_eq!(format_rational(&ratio(1, 2)), "0.5");
        assert_eq!(format_rational(&ratio(1, 8)), "0.125");
        assert_eq!(format_rational(&ratio(73, 1)), "73");
        assert_eq!(format_rational(&ratio(1, 3)), "1/3");
        assert_eq!(format_rational(&ratio(-3, 20)), "-0.15");
        assert_eq!(format_rational(&ratio(1, 100)), "0.01");
        for r in [ratio(1, 2), ratio(1, 3), ratio(123, 40), ratio(7, 1000)] {
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }

    #[test]
    fn prob_display() {
        assert_eq!(Prob::Exact(ratio(10, 60)).to_string(), "1/6");
        assert_eq!(Prob::Float(1.0 / 6.0).to_string(), "0.166666666667");
        assert_eq!(Prob::Float(0.25).to_string(), "0.25");
        assert_eq!(Prob::Exact(ratio(7, 20)).numer_denom(), ("7".into(), "20".into()));
    }
}
