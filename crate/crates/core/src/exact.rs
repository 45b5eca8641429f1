//! Text conversions for exact rationals.
//!
//! Accepted inputs are integers (`"3"`), finite decimals (`"3.25"`) and
//! fractions (`"13/4"`), each with an optional sign. Decimal text always
//! denotes a rational, so parsing never rounds.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::Error;

/// Parses `"3"`, `"-3.25"` or `"13/4"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational, Error> {
    let bad = || Error::BadNumber(text.to_string());
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(bad());
    }

    if let Some((num, den)) = trimmed.split_once('/') {
        let num = parse_integer(num.trim()).ok_or_else(bad)?;
        let den = parse_integer(den.trim()).ok_or_else(bad)?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }

    let (negative, digits) = match trimmed.as_bytes()[0] {
        b'-' => (true, &trimmed[1..]),
        b'+' => (false, &trimmed[1..]),
        _ => (false, trimmed),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let mantissa = BigInt::from_str(&format!("0{whole}{frac}")).map_err(|_| bad())?;
    let scale = num_traits::pow(BigInt::from(10u8), frac.len());
    let value = BigRational::new(mantissa, scale);
    Ok(if negative { -value } else { value })
}

fn parse_integer(text: &str) -> Option<BigInt> {
    let digits = text.strip_prefix(['-', '+']).unwrap_or(text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigInt::from_str(text).ok()
}

/// Renders a rational as `"num/den"`, or just `"num"` when the denominator is 1.
pub fn fraction_string(value: &BigRational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}
