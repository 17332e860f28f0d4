//! Exact rational exponents and the phases e(x) = exp(2 pi i x) built from them.

use crate::error::{Error, Result};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, Signed, Zero};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub type Q = Ratio<i64>;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

pub fn add(a: Q, b: Q) -> Result<Q> {
    a.checked_add(&b)
        .ok_or_else(|| Error::Overflow(format!("{a} + {b}")))
}

pub fn sub(a: Q, b: Q) -> Result<Q> {
    a.checked_sub(&b)
        .ok_or_else(|| Error::Overflow(format!("{a} - {b}")))
}

pub fn mul(a: Q, b: Q) -> Result<Q> {
    a.checked_mul(&b)
        .ok_or_else(|| Error::Overflow(format!("{a} * {b}")))
}

pub fn imul(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b)
        .ok_or_else(|| Error::Overflow(format!("{a} * {b}")))
}

pub fn iadd(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b)
        .ok_or_else(|| Error::Overflow(format!("{a} + {b}")))
}

/// Fractional part in [0, 1).
pub fn frac(x: Q) -> Q {
    x - x.floor()
}

pub fn to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// e(x) = exp(2 pi i x), exact on the eighth roots of unity.
pub fn phase(x: Q) -> Complex64 {
    let f = frac(x);
    let (n, d) = (*f.numer(), *f.denom());
    match d {
        1 => return Complex64::new(1.0, 0.0),
        2 => return Complex64::new(-1.0, 0.0),
        4 => {
            return if n == 1 {
                Complex64::new(0.0, 1.0)
            } else {
                Complex64::new(0.0, -1.0)
            }
        }
        8 => {
            let s = FRAC_1_SQRT_2;
            return match n {
                1 => Complex64::new(s, s),
                3 => Complex64::new(-s, s),
                5 => Complex64::new(-s, -s),
                _ => Complex64::new(s, -s),
            };
        }
        _ => {}
    }
    // reduce to (-1/2, 1/2] for accuracy
    let t = if 2 * n > d { n as f64 / d as f64 - 1.0 } else { n as f64 / d as f64 };
    Complex64::from_polar(1.0, 2.0 * PI * t)
}

pub fn lcm(a: i64, b: i64) -> Result<i64> {
    let g = a.gcd(&b);
    if g == 0 {
        return Ok(0);
    }
    imul(a / g, b).map(|v| v.abs())
}

/// Rational from a string such as "7/6" or "3".
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s}"));
    match s.split_once('/') {
        Some((a, b)) => {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            if b.is_zero() {
                return Err(bad());
            }
            Ok(q(a, b))
        }
        None => Ok(qi(s.parse().map_err(|_| bad())?)),
    }
}

pub fn is_nonneg(x: Q) -> bool {
    !x.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phases_exact_on_small_denominators() {
        assert_eq!(phase(q(1, 2)), Complex64::new(-1.0, 0.0));
        assert_eq!(phase(q(-1, 4)), Complex64::new(0.0, -1.0));
        assert_eq!(phase(q(7, 1)), Complex64::new(1.0, 0.0));
        let z = phase(q(13, 24));
        let w = Complex64::from_polar(1.0, 2.0 * PI * 13.0 / 24.0);
        assert!((z - w).norm() < 1e-15);
    }

    #[test]
    fn overflow_is_an_error() {
        let big = qi(i64::MAX / 2);
        assert!(matches!(mul(big, qi(4)), Err(Error::Overflow(_))));
    }

    #[test]
    fn parse() {
        assert_eq!(parse_q("7/6").unwrap(), q(7, 6));
        assert_eq!(parse_q("-3").unwrap(), qi(-3));
        assert!(parse_q("1/0").is_err());
    }
}
