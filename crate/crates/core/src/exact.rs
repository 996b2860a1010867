//! Arbitrary-precision scalars and the handful of exact helpers every other
//! module leans on.
//!
//! Rationals are `num_rational::BigRational`, which is always kept in lowest
//! terms with a positive denominator.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type ExactInteger = BigInt;
pub type ExactRational = BigRational;

pub fn int(n: u64) -> ExactInteger {
    ExactInteger::from(n)
}

pub fn ratio(num: i64, den: i64) -> ExactRational {
    ExactRational::new(ExactInteger::from(num), ExactInteger::from(den))
}

pub fn rational_from_int(n: u64) -> ExactRational {
    ExactRational::from_integer(int(n))
}

/// `base^exp` with `0^0 = 1`.
pub fn ipow(base: u64, exp: u64) -> ExactInteger {
    num_traits::pow(int(base), exp as usize)
}

/// `base^exp` for rationals with `x^0 = 1` for every `x`, including zero and
/// negative bases.
pub fn rpow(base: &ExactRational, exp: u64) -> ExactRational {
    num_traits::pow(base.clone(), exp as usize)
}

pub fn factorial(n: u64) -> ExactInteger {
    (1..=n).fold(ExactInteger::one(), |acc, k| acc * k)
}

/// Binomial coefficient; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> ExactInteger {
    if k > n {
        return ExactInteger::zero();
    }
    let k = k.min(n - k);
    let mut acc = ExactInteger::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Parses `"num/den"` (den > 0) or a bare integer. Decimal notation is
/// rejected so exact models never see a rounded input.
pub fn parse_rational(text: &str) -> Result<ExactRational> {
    let text = text.trim();
    if text.contains(['.', 'e', 'E']) {
        return Err(Error::domain(format!(
            "`{text}` is not an exact rational; write it as num/den"
        )));
    }
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: ExactInteger = num
        .parse()
        .map_err(|_| Error::domain(format!("bad numerator in `{text}`")))?;
    let den: ExactInteger = den
        .parse()
        .map_err(|_| Error::domain(format!("bad denominator in `{text}`")))?;
    if !den.is_positive() {
        return Err(Error::domain(format!(
            "denominator must be positive in `{text}`"
        )));
    }
    Ok(ExactRational::new(num, den))
}

/// Renders as `num/den`, keeping the `/1` for integers so the format is uniform.
pub fn format_rational(r: &ExactRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &ExactRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Decimal rendering in scientific notation with `digits` significant digits,
/// correctly rounded (half away from zero).
pub fn to_decimal_string(r: &ExactRational, digits: usize) -> String {
    let digits = digits.max(1);
    if r.is_zero() {
        return format!("{:.*}e0", digits - 1, 0.0);
    }
    let sign = if r.is_negative() { "-" } else { "" };
    let (num, den) = (r.numer().abs(), r.denom().clone());

    // Estimate the decimal exponent from digit counts, then correct it.
    let mut exp = num.to_string().len() as i64 - den.to_string().len() as i64;
    let ten = ExactInteger::from(10u32);
    let pow10 = |e: i64| num_traits::pow(ten.clone(), e.unsigned_abs() as usize);
    let ge_pow10 = |e: i64| {
        if e >= 0 {
            num >= &den * pow10(e)
        } else {
            &num * pow10(e) >= den
        }
    };
    while !ge_pow10(exp) {
        exp -= 1;
    }
    while ge_pow10(exp + 1) {
        exp += 1;
    }

    // scaled = round(|r| * 10^(digits-1-exp))
    let shift = digits as i64 - 1 - exp;
    let (n, d) = if shift >= 0 {
        (num * pow10(shift), den)
    } else {
        (num, den * pow10(shift))
    };
    let (q, rem) = n.div_rem(&d);
    let mut scaled = if rem * 2u32 >= d { q + 1u32 } else { q };
    if scaled == pow10(digits as i64) {
        scaled /= 10u32;
        exp += 1;
    }
    let s = scaled.to_string();
    let (head, tail) = s.split_at(1);
    if tail.is_empty() {
        format!("{sign}{head}e{exp}")
    } else {
        format!("{sign}{head}.{tail}e{exp}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(5, 2), int(10));
        assert_eq!(binomial(0, 0), int(1));
        assert_eq!(binomial(5, 6), int(0));
        assert_eq!(binomial(60, 30), "118264581564861424".parse().unwrap());
    }

    #[test]
    fn zero_to_the_zero_is_one() {
        assert_eq!(ipow(0, 0), int(1));
        assert_eq!(rpow(&ratio(0, 1), 0), ratio(1, 1));
        assert_eq!(rpow(&ratio(-3, 7), 0), ratio(1, 1));
        assert_eq!(rpow(&ratio(-1, 2), 3), ratio(-1, 8));
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/4").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("2/8").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("3").unwrap(), ratio(3, 1));
        assert!(parse_rational("0.25").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1/-4").is_err());
        assert!(parse_rational("a/4").is_err());
    }

    #[test]
    fn rational_formatting_keeps_denominator() {
        assert_eq!(format_rational(&ratio(9, 16)), "9/16");
        assert_eq!(format_rational(&ratio(4, 16)), "1/4");
        assert_eq!(format_rational(&ratio(1, 1)), "1/1");
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(
            to_decimal_string(&ratio(9, 16), 17),
            "5.6250000000000000e-1"
        );
        assert_eq!(to_decimal_string(&ratio(1, 3), 5), "3.3333e-1");
        assert_eq!(to_decimal_string(&ratio(2, 3), 5), "6.6667e-1");
        assert_eq!(to_decimal_string(&ratio(1, 1), 3), "1.00e0");
        assert_eq!(to_decimal_string(&ratio(999_999, 1_000_000), 3), "1.00e0");
        assert_eq!(to_decimal_string(&ratio(-125, 1), 2), "-1.3e2");
        assert_eq!(to_decimal_string(&ratio(0, 1), 3), "0.00e0");
        assert_eq!(to_decimal_string(&ratio(1, 1000), 1), "1e-3");
    }

    #[test]
    fn huge_rationals_convert_to_f64() {
        // Neither part fits in an f64, the quotient does.
        let big = ipow(7, 2000);
        let r = ExactRational::new(&big + 1u32, big * 3u32);
        assert!((to_f64(&r) - 1.0 / 3.0).abs() < 1e-16);
        let tiny = ExactRational::new(int(1), ipow(10, 400));
        assert_eq!(to_f64(&tiny), 0.0);
    }
}
