//! Exact rational scalars and the integer/rational vector helpers used everywhere.

use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = num_rational::BigRational;
pub type Int = BigInt;

/// `n/d` as an exact rational. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn ri(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rvec(v: &[i64]) -> Vec<Rat> {
    v.iter().map(|&x| ri(x)).collect()
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

pub fn dot_int(a: &[i64], b: &[Rat]) -> Rat {
    a.iter()
        .zip(b)
        .fold(Rat::zero(), |acc, (&x, y)| acc + Rat::from_integer(x.into()) * y)
}

pub fn is_zero_vec(v: &[Rat]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn to_i64(x: &Int) -> Result<i64> {
    x.to_i64().ok_or(Error::Overflow)
}

fn gcd_all(v: &[Int]) -> Int {
    v.iter().fold(Int::zero(), |g, x| g.gcd(x))
}

/// Clears denominators and divides by the content, keeping direction.
/// Returns `None` for the zero vector.
pub fn primitive_int(v: &[Rat]) -> Option<Vec<Int>> {
    if is_zero_vec(v) {
        return None;
    }
    let lcm = v.iter().fold(Int::one(), |l, x| l.lcm(x.denom()));
    let ints: Vec<Int> = v.iter().map(|x| (x * Rat::from_integer(lcm.clone())).to_integer()).collect();
    let g = gcd_all(&ints);
    Some(ints.into_iter().map(|x| x / &g).collect())
}

/// Primitive integer representative of a nonzero rational direction, as `i64`s.
pub fn primitive_i64(v: &[Rat]) -> Result<Vec<i64>> {
    let ints = primitive_int(v).ok_or(Error::ZeroVector)?;
    ints.iter().map(to_i64).collect()
}

pub fn sign(x: &Rat) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// Parses `"p/q"`, `"p"`, or a plain decimal integer.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let t = s.trim();
    let parse_int = |x: &str| {
        BigInt::from_str(x.trim()).map_err(|_| Error::Parse(format!("not a rational: {s:?}")))
    };
    match t.split_once('/') {
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rat::new(parse_int(n)?, d))
        }
        None => Ok(Rat::from_integer(parse_int(t)?)),
    }
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn fmt_rat(x: &Rat) -> String {
    x.to_string()
}

pub fn to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapter writing a `Rat` as its `"p/q"` string.
pub mod serde_rat {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let raw = RatRepr::deserialize(d)?;
        raw.into_rat().map_err(serde::de::Error::custom)
    }

    /// Accepts either a JSON string `"p/q"` or a JSON integer.
    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(crate) enum RatRepr {
        Str(String),
        Int(i64),
    }

    impl RatRepr {
        pub(crate) fn into_rat(self) -> Result<Rat> {
            match self {
                RatRepr::Str(s) => parse_rat(&s),
                RatRepr::Int(i) => Ok(ri(i)),
            }
        }
    }
}

pub mod serde_rat_vec {
    use super::serde_rat::RatRepr;
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(fmt_rat))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rat>, D::Error> {
        let raw = Vec::<RatRepr>::deserialize(d)?;
        raw.into_iter()
            .map(|r| r.into_rat().map_err(serde::de::Error::custom))
            .collect()
    }
}

/// A rational that reads from `"p/q"` strings or integers and writes as `"p/q"`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct RatJson(#[serde(with = "serde_rat")] pub Rat);

pub fn from_json_vec(v: Vec<RatJson>) -> Vec<Rat> {
    v.into_iter().map(|x| x.0).collect()
}

pub fn to_json_vec(v: &[Rat]) -> Vec<RatJson> {
    v.iter().cloned().map(RatJson).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        assert_eq!(parse_rat("6/4").unwrap(), rat(3, 2));
        assert_eq!(parse_rat(" -7 ").unwrap(), ri(-7));
        assert_eq!(parse_rat("3/-6").unwrap(), rat(-1, 2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
        assert_eq!(fmt_rat(&rat(-2, 4)), "-1/2");
        assert_eq!(fmt_rat(&ri(5)), "5");
    }

    #[test]
    fn primitive_scaling() {
        assert_eq!(primitive_i64(&[rat(1, 2), rat(1, 3)]).unwrap(), vec![3, 2]);
        assert_eq!(primitive_i64(&[ri(-4), ri(6)]).unwrap(), vec![-2, 3]);
        assert!(matches!(primitive_i64(&[ri(0), ri(0)]), Err(Error::ZeroVector)));
    }
}
