//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Unbounded exact rational.
pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("RationalParseError: cannot parse {0:?}")]
pub struct ParseRatError(pub String);

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"a/b"`, `"a"` or `"-a/b"`. Whitespace around the parts is ignored.
pub fn parse_rat(s: &str) -> Result<Rat, ParseRatError> {
    let err = || ParseRatError(s.to_string());
    let t = s.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| err())?;
    let d: BigInt = d.parse().map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Rat::new(n, d))
}

/// Canonical text form; integers print without a denominator.
pub fn fmt_rat(r: &Rat) -> String {
    r.to_string()
}

pub fn fmt_tuple(v: &[Rat]) -> String {
    let parts: Vec<String> = v.iter().map(fmt_rat).collect();
    format!("({})", parts.join(","))
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Huge numerators/denominators: fall back to logarithms.
        let s = if r.is_negative() { -1.0 } else { 1.0 };
        s * ln_abs(r).exp()
    })
}

/// Natural logarithm of |r| without converting `r` itself to a float, so that
/// products of many small probabilities do not underflow.
pub fn ln_abs(r: &Rat) -> f64 {
    ln_bigint(r.numer().abs()) - ln_bigint(r.denom().abs())
}

fn ln_bigint(n: BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().map(f64::ln).unwrap_or(f64::NAN);
    }
    let shift = bits - 900;
    let top: BigInt = n >> shift;
    top.to_f64().map(f64::ln).unwrap_or(f64::NAN) + shift as f64 * std::f64::consts::LN_2
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// `r^n` for a non-negative exponent.
pub fn pow(r: &Rat, n: usize) -> Rat {
    let mut out = Rat::one();
    for _ in 0..n {
        out *= r;
    }
    out
}

pub fn is_unit_fraction(r: &Rat) -> Option<u64> {
    if r.numer().is_one() {
        r.denom().to_u64()
    } else {
        None
    }
}

pub fn zero() -> Rat {
    Rat::zero()
}
