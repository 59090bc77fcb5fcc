//! Exact rational arithmetic helpers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `num / den` with the convention that a zero denominator gives one.
/// Used for competitive ratios, where a zero benchmark is trivially matched.
pub fn ratio_or_one(num: &Rational, den: &Rational) -> Rational {
    if den.is_zero() {
        one()
    } else {
        num / den
    }
}

/// Builds a rational from a `[num, den]` pair, rejecting a zero denominator.
pub fn from_pair(num: i64, den: i64) -> Result<Rational> {
    if den == 0 {
        return Err(Error::input(format!("zero denominator in [{num}, {den}]")));
    }
    Ok(rat(num, den))
}

/// Inverse of [`from_pair`]; fails if either part does not fit in an i64.
pub fn to_pair(q: &Rational) -> Result<(i64, i64)> {
    match (q.numer().to_i64(), q.denom().to_i64()) {
        (Some(n), Some(d)) => Ok((n, d)),
        _ => Err(Error::input(format!("rational {q} does not fit in i64 pair"))),
    }
}

/// Parses `"3/4"`, `"-2"`, or `"0.25"`.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::input(format!("cannot parse rational {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole: BigInt = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            whole.parse().map_err(|_| bad())?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac: BigInt = frac.parse().map_err(|_| bad())?;
        let mag = Rational::new(whole.abs() * &scale + frac, scale);
        return Ok(if negative { -mag } else { mag });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Decimal rendering rounded half away from zero, computed exactly.
pub fn decimal(q: &Rational, places: u32) -> String {
    let scale = BigInt::from(10u32).pow(places);
    let num: BigInt = q.numer().abs() * &scale * 2 + q.denom();
    let scaled = num.div_floor(&(q.denom() * 2));
    let (whole, frac) = scaled.div_rem(&scale);
    let sign = if q.is_negative() && !scaled.is_zero() { "-" } else { "" };
    if places == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{frac:0>width$}", width = places as usize)
    }
}

/// `"num/den (≈ d.dddddd)"`.
pub fn display(q: &Rational) -> String {
    format!("{} (≈ {})", exact(q), decimal(q, 6))
}

/// Always `num/den`, even for integers.
pub fn exact(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn min_of<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if b < a {
        b
    } else {
        a
    }
}
