//! Exact rational values and their text forms.
//!
//! Every probability and rate in this crate is a [`Rational`]: a reduced
//! fraction of arbitrary-precision integers. Floating point appears only when
//! a value is rendered for output or handed to the simulator.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// Builds `num/den` from machine integers.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn from_biguint(value: BigUint) -> Rational {
    Rational::from_integer(BigInt::from_biguint(Sign::Plus, value))
}

/// Parses decimal (`0.35`, `-2`, `1e-3`) or fraction (`7/20`) text exactly.
///
/// No binary floating point is involved, so `"0.1"` becomes exactly `1/10`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let fail = |reason: &str| Error::Parse {
        input: text.to_string(),
        reason: reason.to_string(),
    };
    if s.is_empty() {
        return Err(fail("empty"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_rational(num)?;
        let den = parse_rational(den)?;
        if den.is_zero() {
            return Err(fail("zero denominator"));
        }
        return Ok(num / den);
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..]
                .parse()
                .map_err(|_| fail("malformed exponent"))?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(fail("no digits"));
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(fail("unexpected character"));
    }

    let all_digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = if all_digits.is_empty() {
        BigInt::zero()
    } else {
        all_digits.parse().map_err(|_| fail("malformed digits"))?
    };
    if negative {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Reduced `num/den` text. Integers still carry the denominator (`1/1`).
pub fn to_fraction_string(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Renders `value` to `sig` significant digits, rounding half to even.
///
/// Plain positional notation without exponent; trailing fractional zeros are
/// dropped, so `1/2` renders as `0.5` and `3/1` as `3`.
pub fn to_decimal_string(value: &Rational, sig: u32) -> String {
    assert!(sig >= 1, "need at least one significant digit");
    if value.is_zero() {
        return "0".to_string();
    }
    let negative = value.is_negative();
    let magnitude = value.abs();

    // Decimal exponent e with 10^e <= |value| < 10^(e+1).
    let mut exp =
        magnitude.numer().to_string().len() as i64 - magnitude.denom().to_string().len() as i64;
    if pow10(exp) > magnitude {
        exp -= 1;
    } else if pow10(exp + 1) <= magnitude {
        exp += 1;
    }

    let mut shift = sig as i64 - 1 - exp;
    let mut digits = round_half_even(&(&magnitude * pow10(shift)));
    if digits == num_traits::pow(BigInt::from(10u32), sig as usize) {
        digits /= 10;
        shift -= 1;
    }

    let mut text = digits.to_string();
    if shift > 0 {
        let shift = shift as usize;
        if text.len() <= shift {
            text = format!("{}{}", "0".repeat(shift - text.len() + 1), text);
        }
        let split = text.len() - shift;
        text.insert(split, '.');
        let trimmed = text.trim_end_matches('0').trim_end_matches('.');
        text = trimmed.to_string();
    } else {
        text.push_str(&"0".repeat((-shift) as usize));
    }
    if negative {
        text.insert(0, '-');
    }
    text
}

/// Lossy conversion for simulation parameters and plotting columns.
pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational equal to a finite float.
pub fn from_f64(value: f64) -> Option<Rational> {
    Rational::from_float(value)
}

fn pow10(exp: i64) -> Rational {
    let base = BigInt::from(10u32);
    if exp >= 0 {
        Rational::from_integer(num_traits::pow(base, exp as usize))
    } else {
        Rational::new(BigInt::one(), num_traits::pow(base, (-exp) as usize))
    }
}

fn round_half_even(value: &Rational) -> BigInt {
    let (quot, rem) = value.numer().div_rem(value.denom());
    let twice = rem * 2u32;
    match twice.cmp(value.denom()) {
        std::cmp::Ordering::Less => quot,
        std::cmp::Ordering::Greater => quot + 1,
        std::cmp::Ordering::Equal if quot.is_even() => quot,
        std::cmp::Ordering::Equal => quot + 1,
    }
}
