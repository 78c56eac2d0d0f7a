//! Arithmetic backends.
//!
//! Every structure in the crate is generic over [`Scalar`]. Two backends are
//! provided: [`Rational`] (arbitrary precision, every comparison exact) and
//! `f64`. Support membership, acyclicity and limb structure are always decided
//! in the backend the data lives in; float routines use explicit tolerances
//! obtained through [`Scalar::tolerance`], which collapses to zero for the
//! exact backend.

use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Arbitrary precision rational number.
pub type Rational = BigRational;

/// Which backend a file or run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arithmetic {
    Exact,
    Float,
}

impl Arithmetic {
    pub fn as_str(self) -> &'static str {
        match self {
            Arithmetic::Exact => "exact",
            Arithmetic::Float => "float",
        }
    }
}

impl FromStr for Arithmetic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" | "rational" => Ok(Arithmetic::Exact),
            "float" | "f64" => Ok(Arithmetic::Float),
            other => Err(Error::Parse(format!("unknown arithmetic '{other}'"))),
        }
    }
}

impl Display for Arithmetic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Signed
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + 'static
{
    const ARITHMETIC: Arithmetic;

    fn from_i64(n: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Exact for the rational backend (every finite double is a dyadic rational).
    fn from_f64(x: f64) -> Self;

    fn as_f64(&self) -> f64;

    fn to_rational(&self) -> Rational;

    fn from_rational(r: &Rational) -> Self;

    /// `eps` in float mode, zero in exact mode.
    fn tolerance(eps: f64) -> Self {
        if Self::ARITHMETIC == Arithmetic::Exact {
            Self::zero()
        } else {
            Self::from_f64(eps)
        }
    }

    fn is_exact() -> bool {
        Self::ARITHMETIC == Arithmetic::Exact
    }

    fn is_finite_value(&self) -> bool {
        true
    }

    /// Strictly positive. `Signed::is_positive` counts `+0.0` as positive.
    fn gt_zero(&self) -> bool {
        *self > Self::zero()
    }

    /// Strictly negative, so `-0.0` is not.
    fn lt_zero(&self) -> bool {
        *self < Self::zero()
    }

    fn to_json(&self) -> Value;

    fn parse_text(s: &str) -> Result<Self>;

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => Self::parse_text(s),
            // Number's textual form is the shortest round-trip representation,
            // so "0.1" parses to exactly 1/10 in the rational backend.
            Value::Number(n) => Self::parse_text(&n.to_string()),
            other => Err(Error::Parse(format!("expected a number, found {other}"))),
        }
    }

    fn max_of(a: &Self, b: &Self) -> Self {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    fn min_of(a: &Self, b: &Self) -> Self {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }
}

impl Scalar for f64 {
    const ARITHMETIC: Arithmetic = Arithmetic::Float;

    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn to_rational(&self) -> Rational {
        BigRational::from_float(*self).unwrap_or_else(BigRational::zero)
    }

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }

    fn parse_text(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains('/') {
            return Ok(rational_to_f64(&parse_rational(s)?));
        }
        s.parse::<f64>()
            .map_err(|e| Error::Parse(format!("'{s}': {e}")))
    }
}

impl Scalar for Rational {
    const ARITHMETIC: Arithmetic = Arithmetic::Exact;

    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).unwrap_or_else(BigRational::zero)
    }

    fn as_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }

    fn parse_text(s: &str) -> Result<Self> {
        parse_rational(s)
    }
}

fn rational_to_f64(r: &Rational) -> f64 {
    ToPrimitive::to_f64(r).unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Parses `"p/q"`, integers, and decimals with an optional exponent, exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("cannot parse '{s}' as a rational"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in '{s}'")));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(all_digits.parse::<BigInt>().map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i64;
    let ten = BigRational::from_integer(BigInt::from(10));
    let factor = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= factor;
    } else {
        value /= factor;
    }
    Ok(if negative { -value } else { value })
}
