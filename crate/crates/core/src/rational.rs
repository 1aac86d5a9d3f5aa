//! Exact rational helpers shared by every module.
//!
//! All coordinates, times, masses and costs in exact mode are [`Q`]
//! (arbitrary-precision rationals). Text form is `"p/q"` in lowest terms,
//! or plain `"p"` when the denominator is one. Decimal strings such as
//! `"-0.75"` are accepted on input and converted exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(numer: i64, denom: i64) -> Q {
    Q::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn qi(value: i64) -> Q {
    Q::from_integer(BigInt::from(value))
}

pub fn to_f64(value: &Q) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

pub fn format_q(value: &Q) -> String {
    // BigRational is always normalized, so Display is already lowest terms.
    value.to_string()
}

/// Parses `"p/q"`, an integer, or a finite decimal (`"0.125"`, `"-1.5e-2"` is not accepted).
pub fn parse_q(text: &str) -> Result<Q> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {text:?}")))?;
        let den: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {text:?}")))?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Q::new(num, den));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("not a number: {text:?}")));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(Error::Parse(format!("not a decimal or p/q rational: {text:?}")));
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| Error::Parse(format!("bad digits in {text:?}")))?
    };
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = Q::new(numer, denom);
    Ok(if negative { -value } else { value })
}

/// Exact rational value of a finite `f64` (every finite double is a dyadic rational).
pub fn from_f64(value: f64) -> Option<Q> {
    Q::from_float(value)
}

pub mod serde_q {
    //! `#[serde(with = "...")]` adapters for rationals as `"p/q"` strings.
    use super::{format_q, parse_q, Q};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_q(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let raw = RationalText::deserialize(d)?;
        raw.into_q().map_err(serde::de::Error::custom)
    }

    /// A rational written either as a JSON string or a JSON integer.
    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(crate) enum RationalText {
        Text(String),
        Int(i64),
    }

    impl RationalText {
        pub(crate) fn into_q(self) -> crate::error::Result<Q> {
            match self {
                RationalText::Text(s) => parse_q(&s),
                RationalText::Int(i) => Ok(super::qi(i)),
            }
        }
    }

    pub mod vec {
        use super::super::{format_q, Q};
        use super::RationalText;
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(values: &[Q], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(values.len()))?;
            for v in values {
                seq.serialize_element(&format_q(v))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
            let raw = Vec::<RationalText>::deserialize(d)?;
            raw.into_iter()
                .map(|r| r.into_q().map_err(serde::de::Error::custom))
                .collect()
        }
    }
}
