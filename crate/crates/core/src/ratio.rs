//! Exact rational arithmetic helpers.
//!
//! Every certificate in this crate is an exact rational; floats appear only
//! as a human-readable rendering next to the numerator/denominator pair.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Exact rational from an integer pair. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parse a plain decimal literal ("0.3", "1", "-2.75") into an exact rational.
///
/// Decimal strings go through integer arithmetic, never through f64, so a
/// config value like 0.3 really is 3/10.
pub fn rat_from_decimal(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    let (sign, digits) = match text.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1i64, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut num: BigInt = if int_part.is_empty() {
        BigInt::zero()
    } else {
        int_part.parse().ok()?
    };
    let mut den = BigInt::one();
    for c in frac_part.chars() {
        num = num * 10 + c.to_digit(10).unwrap();
        den *= 10;
    }
    Some(Rational::new(num * sign, den))
}

/// Least integer >= r, as u64. Returns None for negative values that do not
/// fit or absurdly large ratios.
pub fn ceil_to_u64(r: &Rational) -> Option<u64> {
    let c = r.ceil();
    c.to_integer().to_u64()
}

/// f64 rendering for reports; exactness lives in the num/den pair.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `(numerator, denominator)` as decimal strings, normalized, denominator positive.
pub fn num_den_strings(r: &Rational) -> (String, String) {
    let r = r.clone().reduced();
    if r.denom().is_negative() {
        ((-r.numer()).to_string(), (-r.denom()).to_string())
    } else {
        (r.numer().to_string(), r.denom().to_string())
    }
}
