//! Exact rational scalar and its text forms.
//!
//! Rationals travel through CSV and JSON as `"num/den"` strings (integers
//! print without a denominator), so no precision is lost on a round trip.
//! Decimal literals such as `0.3` are converted exactly to `3/10`; they are
//! never routed through `f64`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Longest fractional part accepted in a decimal literal.
pub const MAX_FRACTION_DIGITS: usize = 12;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn half() -> Rational {
    ratio(1, 2)
}

/// Nearest binary64 to `x`.
pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// The exact value of a finite binary64.
pub fn from_f64_exact(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Reduced `"num/den"` text, or just `"num"` for integers.
pub fn format(x: &Rational) -> String {
    let r = x.reduced();
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `a/b`, an integer, or a decimal with at most
/// [`MAX_FRACTION_DIGITS`] fractional digits.
pub fn parse(literal: &str) -> Result<Rational> {
    let bad = |reason: &str| Error::MalformedLiteral {
        literal: literal.to_string(),
        reason: reason.to_string(),
    };
    let s = literal.trim();
    if s.is_empty() {
        return Err(bad("empty"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_integer(num).ok_or_else(|| bad("numerator is not an integer"))?;
        let den = parse_integer(den).ok_or_else(|| bad("denominator is not an integer"))?;
        if den.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(Rational::new(num, den));
    }
    let (negative, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (whole, frac) = match body.split_once('.') {
        Some((w, f)) => (w, f),
        None => (body, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return Err(bad("no digits"));
    }
    if !whole.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad("expected digits, '.', or 'a/b'"));
    }
    if frac.len() > MAX_FRACTION_DIGITS {
        return Err(bad("more than 12 fractional digits"));
    }
    let digits = format!("{whole}{frac}");
    let digits = if digits.is_empty() { "0".to_string() } else { digits };
    let mut num: BigInt = digits.parse().map_err(|_| bad("expected digits"))?;
    if negative {
        num = -num;
    }
    let den = BigInt::from(10u32).pow(frac.len() as u32);
    Ok(Rational::new(num, den))
}

fn parse_integer(s: &str) -> Option<BigInt> {
    let s = s.trim();
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

pub fn is_in_unit_interval(x: &Rational) -> bool {
    !x.is_negative() && *x <= Rational::one()
}

/// Serde adapter for a single rational as `"num/den"`.
pub mod serde_rational {
    use serde::{de, Deserialize, Deserializer, Serializer};

    use super::Rational;

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        super::parse(&text).map_err(de::Error::custom)
    }
}

/// Serde adapter for a list of rationals.
pub mod serde_rational_vec {
    use serde::ser::SerializeSeq;
    use serde::{de, Deserialize, Deserializer, Serializer};

    use super::Rational;

    pub fn serialize<S: Serializer>(xs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&super::format(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| super::parse(t).map_err(de::Error::custom))
            .collect()
    }
}
