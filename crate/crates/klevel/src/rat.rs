//! Exact rational scalars: the arithmetic everything else is built on.
//!
//! All predicates in this crate evaluate over `Rational`; floating point
//! only appears at the rendering/reporting edges.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

pub type Rational = num_rational::BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Rational from a numerator/denominator pair.
///
/// Panics on a zero denominator; callers pass literal constants.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

#[derive(Debug, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct BadRational(pub String);

/// Parses `p/q`, plain integers, and decimal literals, all exactly.
pub fn parse_rational(s: &str) -> Result<Rational, BadRational> {
    let t = s.trim();
    let bad = || BadRational(s.to_string());
    if let Some((num, den)) = t.split_once('/') {
        let p = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int_part, frac_part)) = t.split_once('.') {
        let neg = int_part.trim_start().starts_with('-');
        let whole = if int_part.is_empty() || int_part == "-" || int_part == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(int_part).map_err(|_| bad())?
        };
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = BigInt::from_str(frac_part).map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let frac = Rational::new(digits, scale);
        let whole = Rational::from_integer(whole);
        return Ok(if neg { whole - frac } else { whole + frac });
    }
    let p = BigInt::from_str(t).map_err(|_| bad())?;
    Ok(Rational::from_integer(p))
}

/// Formats as `p/q`, or just `p` for integers. Round-trips through
/// [`parse_rational`] exactly.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Lossy conversion for rendering and statistics.
pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}
