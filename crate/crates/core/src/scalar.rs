//! Coefficient rings: exact rationals and complex floats.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub type Rational = BigRational;
pub type Complex = Complex64;

/// Relative tolerance of the float-ring zero test.
pub const FLOAT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ring {
    Rational,
    Complex,
}

impl Ring {
    pub fn name(self) -> &'static str {
        match self {
            Ring::Rational => "rational",
            Ring::Complex => "complex",
        }
    }
}

pub trait Scalar: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    const RING: Ring;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negated(&self) -> Self;
    /// `None` when the value is exactly zero.
    fn recip(&self) -> Option<Self>;
    fn magnitude(&self) -> f64;
    fn is_exact_zero(&self) -> bool;
    /// Zero test relative to `scale`; the exact ring ignores the scale.
    fn negligible(&self, scale: f64) -> bool;
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
    fn render(&self) -> String;
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0.0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    format!("{:.16e}", x)
}

/// JSON number carrying the 17-digit text form (null for non-finite values).
pub fn json_f64(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    match fmt_f64(x).parse::<serde_json::Number>() {
        Ok(n) => Value::Number(n),
        Err(_) => Value::Null,
    }
}

/// Renders a rational as `num/den`.
pub fn rational_text(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `a/b`, an integer, or a decimal literal (with optional exponent) exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Invalid(format!("not a rational: {text:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Invalid(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
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
    let all: BigInt = format!("0{int_part}{frac_part}").parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = Rational::from_integer(all);
    if scale >= 0 {
        r *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

fn json_rational(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => parse_rational(&n.to_string()),
        _ => Err(Error::RingMismatch(format!("expected a rational, got {v}"))),
    }
}

fn json_real(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Invalid(format!("bad number {n}"))),
        Value::String(s) => parse_rational(s)?
            .to_f64()
            .ok_or_else(|| Error::Invalid(format!("bad number {s}"))),
        _ => Err(Error::RingMismatch(format!("expected a real number, got {v}"))),
    }
}

impl Scalar for Rational {
    const RING: Ring = Ring::Rational;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Rational::recip(self))
        }
    }
    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }
    fn negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }
    fn to_json(&self) -> Value {
        Value::String(rational_text(self))
    }
    fn from_json(v: &Value) -> Result<Self> {
        json_rational(v)
    }
    fn render(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            rational_text(self)
        }
    }
}

impl Scalar for Complex {
    const RING: Ring = Ring::Complex;

    fn zero() -> Self {
        Complex::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex::new(1.0, 0.0)
    }
    fn from_i64(v: i64) -> Self {
        Complex::new(v as f64, 0.0)
    }
    fn from_rational(r: &Rational) -> Self {
        Complex::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn recip(&self) -> Option<Self> {
        if self.re == 0.0 && self.im == 0.0 {
            None
        } else {
            Some(self.inv())
        }
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_exact_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn negligible(&self, scale: f64) -> bool {
        self.norm() <= FLOAT_TOL * (1.0 + scale)
    }
    fn to_json(&self) -> Value {
        Value::Array(vec![json_f64(self.re), json_f64(self.im)])
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Array(parts) if parts.len() == 2 => {
                Ok(Complex::new(json_real(&parts[0])?, json_real(&parts[1])?))
            }
            Value::Number(_) => Ok(Complex::new(json_real(v)?, 0.0)),
            _ => Err(Error::RingMismatch(format!(
                "expected a complex value [re, im], got {v}"
            ))),
        }
    }
    fn render(&self) -> String {
        if self.im == 0.0 {
            fmt_f64(self.re)
        } else {
            format!("({}{}{}i)", fmt_f64(self.re), if self.im < 0.0 { "-" } else { "+" }, fmt_f64(self.im.abs()))
        }
    }
}

/// Exact rational from a small fraction.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rational_forms() {
        assert_eq!(parse_rational("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("-7").unwrap(), ratio(-7, 1));
        assert_eq!(parse_rational("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("-1.5e-1").unwrap(), ratio(-3, 20));
        assert_eq!(parse_rational("2e2").unwrap(), ratio(200, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn seventeen_digit_format() {
        assert_eq!(fmt_f64(5.0 / 6.0), "8.3333333333333337e-1");
        assert_eq!(fmt_f64(0.0), "0.0");
        assert_eq!(json_f64(1.0).to_string(), "1.0000000000000000e+0");
    }

    #[test]
    fn float_zero_test_is_scale_aware() {
        let tiny = Complex::new(1e-8, 0.0);
        assert!(!tiny.negligible(0.0));
        assert!(tiny.negligible(100.0));
        assert!(ratio(0, 1).negligible(1e9));
        assert!(!ratio(1, 1_000_000_000).negligible(1e9));
    }

    #[test]
    fn json_round_trip() {
        let r = ratio(-5, 3);
        assert_eq!(Rational::from_json(&r.to_json()).unwrap(), r);
        let c = Complex::new(0.5, -2.0);
        assert_eq!(Complex::from_json(&c.to_json()).unwrap(), c);
        assert!(Rational::from_json(&serde_json::json!([1, 2])).is_err());
    }
}
