//! Exact rational scalars and the number-theoretic helpers behind the
//! MILP constants.
//!
//! `Rational` is `num_rational::BigRational`, which reduces after every
//! operation and keeps the denominator positive, so zero is always `0/1`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Int = BigInt;
pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_vec(xs: &[i64]) -> Vec<Rational> {
    xs.iter().map(|&x| int(x)).collect()
}

/// Denominator of `r` in lowest terms; 1 for zero.
pub fn denom(r: &Rational) -> Int {
    r.denom().clone()
}

/// Least common multiple of a non-empty list of positive integers.
pub fn lcm_list(xs: &[Int]) -> Result<Int> {
    if xs.is_empty() {
        return Err(Error::arg("lcm_list needs at least one element"));
    }
    let mut acc = Int::one();
    for x in xs {
        if x < &Int::one() {
            return Err(Error::arg(format!("lcm_list element {x} is not positive")));
        }
        acc = acc.lcm(x);
    }
    Ok(acc)
}

/// Slack used for every irrational norm unless a caller asks otherwise.
pub fn default_slack() -> Rational {
    rat(1, 1_000_000)
}

fn ceil_sqrt(n: &Int) -> Int {
    let s = n.sqrt();
    if &(&s * &s) < n {
        s + 1
    } else {
        s
    }
}

/// A rational `s` with `s >= sqrt(r)` and `s^2 <= r (1 + slack)^2`.
pub fn sqrt_upper(r: &Rational, slack: &Rational) -> Result<Rational> {
    if r.is_negative() {
        return Err(Error::arg(format!("sqrt_upper of negative value {r}")));
    }
    if !slack.is_positive() {
        return Err(Error::arg("sqrt_upper slack must be positive"));
    }
    if r.is_zero() {
        return Ok(Rational::zero());
    }
    // sqrt(p/q) = sqrt(p q)/q; refine the grid 1/(q k) until the bound holds.
    let t = r.numer() * r.denom();
    let one_plus = Rational::one() + slack;
    let bound = r * &one_plus * &one_plus;
    let mut k = Int::one();
    loop {
        let s = Rational::new(ceil_sqrt(&(&t * &k * &k)), r.denom() * &k);
        if &s * &s <= bound {
            return Ok(s);
        }
        k <<= 4;
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact value of a finite float.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(Rational::zero)
}

/// Nearest multiple of `2^-bits`, which keeps rationalized iterates small.
pub fn round_to_dyadic(x: f64, bits: u32) -> Rational {
    let scale = Rational::from_integer(Int::one() << bits);
    (from_f64(x) * &scale).round() / scale
}

/// Parses `p/q`, `p`, decimals (`-1.25`) and scientific notation (`3e-2`).
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: Int = p.trim().parse().map_err(|_| bad())?;
        let q: Int = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let joined: Int = format!("{whole}{frac}0").parse().map_err(|_| bad())?;
    let ten = Int::from(10);
    let mut value = Rational::new(joined, num_traits::pow(ten.clone(), frac.len() + 1));
    let scale = Rational::from_integer(num_traits::pow(ten, exp.unsigned_abs() as usize));
    if exp >= 0 {
        value *= scale;
    } else {
        value /= scale;
    }
    Ok(if neg { -value } else { value })
}

/// Serde adapters writing canonical `p/q` strings and reading any accepted form.
pub mod serde_rat {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Loose {
        Text(String),
        Int(i64),
        Float(f64),
    }

    fn from_loose(l: Loose) -> std::result::Result<Rational, String> {
        match l {
            Loose::Text(s) => parse_rational(&s).map_err(|e| e.to_string()),
            Loose::Int(i) => Ok(int(i)),
            Loose::Float(x) => parse_rational(&x.to_string()).map_err(|e| e.to_string()),
        }
    }

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        from_loose(Loose::deserialize(d)?).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|r| r.to_string()))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<Rational>, D::Error> {
            Vec::<Loose>::deserialize(d)?
                .into_iter()
                .map(|l| from_loose(l).map_err(serde::de::Error::custom))
                .collect()
        }
    }

    pub mod matrix {
        use super::*;

        pub fn serialize<S: Serializer>(
            m: &[Vec<Rational>],
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            s.collect_seq(
                m.iter()
                    .map(|row| row.iter().map(|r| r.to_string()).collect::<Vec<_>>()),
            )
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<Vec<Rational>>, D::Error> {
            Vec::<Vec<Loose>>::deserialize(d)?
                .into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|l| from_loose(l).map_err(serde::de::Error::custom))
                        .collect()
                })
                .collect()
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(
            r: &Option<Rational>,
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            match r {
                Some(r) => s.serialize_some(&r.to_string()),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Option<Rational>, D::Error> {
            Option::<Loose>::deserialize(d)?
                .map(|l| from_loose(l).map_err(serde::de::Error::custom))
                .transpose()
        }
    }

    pub mod option_vec {
        use super::*;

        pub fn serialize<S: Serializer>(
            v: &Option<Vec<Rational>>,
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            match v {
                Some(v) => s.serialize_some(&v.iter().map(|r| r.to_string()).collect::<Vec<_>>()),
                None => s.serialize_none(),
            }
        }
    }
}

/// An objective value on the extended line. `Approx` carries values from
/// the smooth-oracle path, which are never exact.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtValue {
    NegInf,
    Exact(Rational),
    Approx(f64),
    PosInf,
}

impl ExtValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtValue::Exact(_) | ExtValue::Approx(_))
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, ExtValue::Approx(_))
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            ExtValue::Exact(r) => Some(r),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtValue::NegInf => f64::NEG_INFINITY,
            ExtValue::Exact(r) => to_f64(r),
            ExtValue::Approx(x) => *x,
            ExtValue::PosInf => f64::INFINITY,
        }
    }

    /// `self - other`, staying exact when both sides are.
    pub fn minus(&self, other: &ExtValue) -> ExtValue {
        use ExtValue::*;
        match (self, other) {
            (Exact(a), Exact(b)) => Exact(a - b),
            (PosInf, PosInf) | (NegInf, NegInf) => Approx(f64::NAN),
            (PosInf, _) | (_, NegInf) => PosInf,
            (NegInf, _) | (_, PosInf) => NegInf,
            (a, b) => Approx(a.to_f64() - b.to_f64()),
        }
    }

    pub fn plus_rational(&self, r: &Rational) -> ExtValue {
        match self {
            ExtValue::Exact(a) => ExtValue::Exact(a + r),
            ExtValue::Approx(a) => ExtValue::Approx(a + to_f64(r)),
            other => other.clone(),
        }
    }
}

impl PartialOrd for ExtValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtValue::*;
        match (self, other) {
            (Exact(a), Exact(b)) => Some(a.cmp(b)),
            (NegInf, NegInf) | (PosInf, PosInf) => Some(Ordering::Equal),
            (NegInf, _) | (_, PosInf) => Some(Ordering::Less),
            (PosInf, _) | (_, NegInf) => Some(Ordering::Greater),
            (a, b) => a.to_f64().partial_cmp(&b.to_f64()),
        }
    }
}

impl fmt::Display for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtValue::NegInf => write!(f, "-inf"),
            ExtValue::Exact(r) => write!(f, "{r}"),
            ExtValue::Approx(x) => write!(f, "~{x:e}"),
            ExtValue::PosInf => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtValue::Approx(x) if x.is_finite() => s.serialize_f64(*x),
            other => s.serialize_str(&other.to_string()),
        }
    }
}
