//! Exact rational helpers: parsing, square roots, JSON encoding.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Longest accepted integer literal, in digits.
const MAX_DIGITS: usize = 4096;

fn parse_int(s: &str) -> Result<BigInt> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::input(format!("not an integer: {s:?}")));
    }
    if digits.len() > MAX_DIGITS {
        return Err(Error::input("integer literal too long"));
    }
    s.parse::<BigInt>()
        .map_err(|e| Error::input(format!("not an integer: {s:?} ({e})")))
}

/// Parses `"p"` or `"p/q"` with integer `p`, `q` (`q != 0`).
///
/// Decimal notation is rejected so that exact inputs stay exact.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        None => Ok(BigRational::from_integer(parse_int(s)?)),
        Some((p, q)) => {
            let num = parse_int(p.trim())?;
            let den = parse_int(q.trim())?;
            if den.is_zero() {
                return Err(Error::input("zero denominator"));
            }
            Ok(BigRational::new(num, den))
        }
    }
}

/// Parses a plain decimal such as `"0.3"` or `"-12.5e-3"` into its exact
/// rational value. Also accepts the `p/q` form.
pub fn parse_decimal_exact(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s.contains('/') {
        return parse_rational(s);
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let e: i32 = e
                .parse()
                .map_err(|_| Error::input(format!("bad exponent in {s:?}")))?;
            (m, e)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let neg = int_part.starts_with('-');
    let int_digits = int_part.trim_start_matches(['-', '+']);
    if int_digits.is_empty() && frac_part.is_empty() {
        return Err(Error::input(format!("not a number: {s:?}")));
    }
    if !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::input(format!("not a number: {s:?}")));
    }
    let all = format!("{}{}", if int_digits.is_empty() { "0" } else { int_digits }, frac_part);
    let mut num = parse_int(&all)?;
    if neg {
        num = -num;
    }
    let scale = exp - i32::try_from(frac_part.len()).map_err(|_| Error::input("too many digits"))?;
    if scale.unsigned_abs() as usize > MAX_DIGITS {
        return Err(Error::input("exponent out of range"));
    }
    let ten = BigInt::from(10);
    let p = num_traits::pow(ten, scale.unsigned_abs() as usize);
    Ok(if scale >= 0 {
        BigRational::from_integer(num * p)
    } else {
        BigRational::new(num, p)
    })
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact square root when `q` is the square of a rational.
pub fn exact_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let (n, d) = (q.numer(), q.denom());
    let rn = n.sqrt();
    let rd = d.sqrt();
    (&rn * &rn == *n && &rd * &rd == *d).then(|| BigRational::new(rn, rd))
}

/// `floor(sqrt(q) * 10^digits) / 10^digits`, a rational within `10^-digits`
/// below the true root.
pub fn sqrt_truncated(q: &BigRational, digits: u32) -> BigRational {
    assert!(!q.is_negative(), "square root of a negative rational");
    let scale = num_traits::pow(BigInt::from(10), digits as usize);
    let scaled = q.numer() * &scale * &scale / q.denom();
    BigRational::new(scaled.sqrt(), scale)
}

/// Exact rational serialized as `{"num": "...", "den": "..."}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exact(pub BigRational);

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<BigRational> for Exact {
    fn from(q: BigRational) -> Self {
        Exact(q)
    }
}

#[derive(Serialize, Deserialize)]
struct ExactRepr {
    num: String,
    den: String,
}

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExactRepr {
            num: self.0.numer().to_string(),
            den: self.0.denom().to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = ExactRepr::deserialize(d)?;
        let num = parse_int(&r.num).map_err(D::Error::custom)?;
        let den = parse_int(&r.den).map_err(D::Error::custom)?;
        if den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(Exact(BigRational::new(num, den)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions() {
        assert_eq!(parse_rational("3/10").unwrap(), frac(3, 10));
        assert_eq!(parse_rational(" -6/4 ").unwrap(), frac(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("0.3").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1/").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1/2/3").is_err());
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_decimal_exact("0.3").unwrap(), frac(3, 10));
        assert_eq!(parse_decimal_exact("10").unwrap(), int(10));
        assert_eq!(parse_decimal_exact("-1.25e-1").unwrap(), frac(-1, 8));
        assert_eq!(parse_decimal_exact("2e3").unwrap(), int(2000));
        assert_eq!(parse_decimal_exact(".5").unwrap(), frac(1, 2));
        assert!(parse_decimal_exact("abc").is_err());
        assert!(parse_decimal_exact("1e99999").is_err());
    }

    #[test]
    fn square_roots() {
        assert_eq!(exact_sqrt(&frac(1, 4)), Some(frac(1, 2)));
        assert_eq!(exact_sqrt(&frac(9, 49)), Some(frac(3, 7)));
        assert_eq!(exact_sqrt(&frac(1, 10)), None);
        let r = sqrt_truncated(&frac(1, 10), 50);
        let err = frac(1, 10) - &r * &r;
        assert!(err >= BigRational::zero());
        assert!(err < BigRational::new(1.into(), num_traits::pow(BigInt::from(10), 49)));
    }

    #[test]
    fn exact_json_roundtrip() {
        let e = Exact(frac(-123, 137));
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, r#"{"num":"-123","den":"137"}"#);
        let back: Exact = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
        assert!(serde_json::from_str::<Exact>(r#"{"num":"1","den":"0"}"#).is_err());
    }
}
