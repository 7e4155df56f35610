//! Numeric backends shared by the float and exact-rational paths.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A field the geometry and address code can run over.
///
/// `f64` is the fast path and compares with a tolerance; [`BigRational`]
/// is the certification path and compares exactly.
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// True when arithmetic is exact and the tolerance is zero.
    const EXACT: bool;

    /// Closed-membership slack used when no other tolerance is configured.
    fn default_tolerance() -> Self;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact value for hashing remainders; `None` on the float path.
    fn exact_key(&self) -> Option<BigRational>;

    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits every scalar")
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn default_tolerance() -> Self {
        1e-9
    }

    fn exact_key(&self) -> Option<BigRational> {
        None
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn default_tolerance() -> Self {
        BigRational::zero()
    }

    fn exact_key(&self) -> Option<BigRational> {
        Some(self.clone())
    }
}

/// Parses `"3/5"`, `"-0.125"`, `"7e-3"` or `"2.5E+1"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || Error::IrrationalInput(text.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = all_digits.parse().map_err(|_| bad())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    Ok(if scale >= 0 {
        BigRational::from_integer(numer * pow)
    } else {
        BigRational::new(numer, pow)
    })
}

/// Converts a float to the exact rational it represents.
pub fn rational_from_f64(v: f64) -> Result<BigRational> {
    BigRational::from_float(v).ok_or_else(|| Error::IrrationalInput(v.to_string()))
}

pub(crate) fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub(crate) fn norm_sq<S: Scalar>(a: &[S]) -> S {
    dot(a, a)
}
