//! Exact rational helpers on top of `num_rational::BigRational`.
//!
//! Rationals are always kept in canonical form (positive denominator,
//! reduced) by the underlying type. The helpers here cover the textual
//! `"p/q"` format used by every exact output and a few number-theoretic
//! conveniences used across the crate.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// `p/q` as a rational. Panics on `q == 0`.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

pub fn from_bigint(p: BigInt) -> Rational {
    Rational::from_integer(p)
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"-1.25"`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let invalid = || ParseRationalError::Invalid(s.to_string());
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| invalid())?;
        let den: BigInt = den.trim().parse().map_err(|_| invalid())?;
        if den.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(s.to_string()));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(invalid());
        }
        let whole_part: BigInt = if whole.is_empty() || whole == "-" || whole == "+" {
            BigInt::zero()
        } else {
            whole.parse().map_err(|_| invalid())?
        };
        let frac_part: BigInt = frac.parse().map_err(|_| invalid())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let magnitude = whole_part.abs() * &scale + frac_part;
        let signed = if negative { -magnitude } else { magnitude };
        return Ok(Rational::new(signed, scale));
    }
    let num: BigInt = s.parse().map_err(|_| invalid())?;
    Ok(Rational::from_integer(num))
}

/// Canonical `"p/q"` text; the denominator is always written, even when it is 1.
pub fn format_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn to_f64(x: &Rational) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Fall back on a scaled division for values whose parts overflow f64.
    let n = x.numer();
    let d = x.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Natural logarithm of a positive rational, robust for huge numerators/denominators.
pub fn ln(x: &Rational) -> f64 {
    assert!(x.is_positive(), "ln of non-positive rational");
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

fn ln_bigint(v: &BigInt) -> f64 {
    let bits = v.bits();
    if bits < 1000 {
        return v.to_f64().unwrap().ln();
    }
    let shift = bits - 60;
    (v >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn floor(x: &Rational) -> BigInt {
    x.numer().div_floor(x.denom())
}

pub fn ceil(x: &Rational) -> BigInt {
    -((-x.numer()).div_floor(x.denom()))
}

/// Nearest integer, ties rounded towards +∞.
pub fn round_half_up(x: &Rational) -> BigInt {
    floor(&(x + rat(1, 2)))
}

pub fn pow(x: &Rational, e: i32) -> Rational {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

pub fn factorial(d: usize) -> BigInt {
    (1..=d).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Least common multiple of all denominators (1 for an empty iterator).
pub fn common_denominator<'a, I: IntoIterator<Item = &'a Rational>>(values: I) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Smallest integer `b >= 0` with `b^2 >= x`.
pub fn ceil_sqrt(x: &Rational) -> BigInt {
    if !x.is_positive() {
        return BigInt::zero();
    }
    let target = ceil(x);
    let mut b = target.sqrt();
    while Rational::from_integer(&b * &b) < *x {
        b += 1;
    }
    while b.is_positive() && Rational::from_integer((&b - 1) * (&b - 1)) >= *x {
        b -= 1;
    }
    b
}
