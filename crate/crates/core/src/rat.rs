//! Small helpers around exact rational numbers.
//!
//! Rationals are serialized everywhere as `"num/den"` strings (plain `"num"`
//! when the denominator is 1), so parsing and formatting live here.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

/// The exact rational type used throughout the crate.
pub type Rat = BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseRatError {
    #[error("InvalidRational: cannot parse {0:?} as a rational number")]
    Invalid(String),
    #[error("ZeroDenominator: denominator is zero in {0:?}")]
    ZeroDenominator(String),
}

/// `rat(n, d)` is the reduced rational n/d.
pub fn rat(n: i64, d: i64) -> Rat {
    assert!(d != 0, "zero denominator");
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// An integer as a rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

/// Parses `"num/den"` or `"num"`.
pub fn parse_rat(s: &str) -> Result<Rat, ParseRatError> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| ParseRatError::Invalid(s.to_string()))?;
    let d: BigInt = match den {
        Some(d) => d
            .parse()
            .map_err(|_| ParseRatError::Invalid(s.to_string()))?,
        None => BigInt::from(1),
    };
    if d.is_zero() {
        return Err(ParseRatError::ZeroDenominator(s.to_string()));
    }
    Ok(Rat::new(n, d))
}

/// Formats as `"num/den"`, or `"num"` for integers.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// p-adic valuation of a nonzero rational; `None` for zero.
pub fn val_p(r: &Rat, p: u64) -> Option<i64> {
    if r.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v: i64 = 0;
    let mut n = r.numer().abs();
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    let mut d = r.denom().abs();
    while (&d % &p).is_zero() {
        d /= &p;
        v -= 1;
    }
    Some(v)
}

/// Ceiling of a rational as a BigInt.
pub fn ceil_rat(r: &Rat) -> BigInt {
    r.ceil().to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["0", "-1", "1/2", "-7/3", "10"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(fmt_rat(&r), s);
        }
        assert_eq!(fmt_rat(&parse_rat("2/4").unwrap()), "1/2");
        assert_eq!(fmt_rat(&parse_rat("3/-6").unwrap()), "-1/2");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(matches!(parse_rat("a/b"), Err(ParseRatError::Invalid(_))));
        assert!(matches!(
            parse_rat("1/0"),
            Err(ParseRatError::ZeroDenominator(_))
        ));
    }

    #[test]
    fn valuations() {
        assert_eq!(val_p(&rat(28, 3), 7), Some(1));
        assert_eq!(val_p(&rat(3, 49), 7), Some(-2));
        assert_eq!(val_p(&rat(5, 1), 7), Some(0));
        assert_eq!(val_p(&rat_int(0), 7), None);
    }
}
