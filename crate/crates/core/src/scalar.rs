//! Dual-mode arithmetic. Every algorithm in this crate is generic over a
//! [`Scalar`], instantiated either with arbitrary-precision rationals (exact
//! decisions, bit-for-bit reproducible) or with `f64` (fast, tolerance-based).

use crate::error::{CoreError, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt::Debug;

/// Exact rational scalar.
pub type Rat = num_rational::BigRational;

pub trait Scalar: Clone + PartialEq + Debug + Send + Sync + 'static {
    /// True when equality of values is decidable (rational mode).
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Exact conversion: every finite f64 is a dyadic rational.
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    /// None when dividing by zero.
    fn div(&self, rhs: &Self) -> Option<Self>;
    fn neg(&self) -> Self;

    fn is_zero(&self) -> bool;
    /// -1, 0, +1.
    fn sign(&self) -> i8;
    fn abs(&self) -> Self;
    /// max(self, 0)
    fn relu(&self) -> Self;
    /// Total order; values are never NaN by construction.
    fn cmp_total(&self, rhs: &Self) -> Ordering;

    /// Parse from the serialized form ("p/q" or a float literal).
    fn parse(text: &str) -> Result<Self>;
    /// Serialized form round-tripping through `parse` without loss.
    fn render(&self) -> String;

    fn is_positive(&self) -> bool {
        self.sign() > 0
    }
    fn lt(&self, rhs: &Self) -> bool {
        self.cmp_total(rhs) == Ordering::Less
    }
    fn le(&self, rhs: &Self) -> bool {
        self.cmp_total(rhs) != Ordering::Greater
    }
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn zero() -> Self {
        <Rat as Zero>::zero()
    }
    fn one() -> Self {
        <Rat as One>::one()
    }
    fn from_int(n: i64) -> Self {
        Rat::from_integer(BigInt::from(n))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rat::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64(v: f64) -> Self {
        Rat::from_float(v).expect("finite float expected")
    }
    fn to_f64(&self) -> f64 {
        rat_to_f64(self)
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Option<Self> {
        if Zero::is_zero(rhs) {
            None
        } else {
            Some(self / rhs)
        }
    }
    fn neg(&self) -> Self {
        -self
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn sign(&self) -> i8 {
        if Zero::is_zero(self) {
            0
        } else if Signed::is_positive(self) {
            1
        } else {
            -1
        }
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn relu(&self) -> Self {
        if Signed::is_positive(self) {
            self.clone()
        } else {
            <Rat as Zero>::zero()
        }
    }
    fn cmp_total(&self, rhs: &Self) -> Ordering {
        Ord::cmp(self, rhs)
    }

    fn parse(text: &str) -> Result<Self> {
        parse_rational(text)
    }
    fn render(&self) -> String {
        if Zero::is_zero(&(self.denom() - BigInt::from(1))) {
            format!("{}", self.numer())
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Option<Self> {
        if *rhs == 0.0 {
            None
        } else {
            Some(self / rhs)
        }
    }
    fn neg(&self) -> Self {
        -self
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn sign(&self) -> i8 {
        if *self == 0.0 {
            0
        } else if *self > 0.0 {
            1
        } else {
            -1
        }
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn relu(&self) -> Self {
        if *self > 0.0 {
            *self
        } else {
            0.0
        }
    }
    fn cmp_total(&self, rhs: &Self) -> Ordering {
        self.partial_cmp(rhs).expect("NaN scalar")
    }

    fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n: f64 = n
                .trim()
                .parse()
                .map_err(|_| CoreError::ScalarParse(text.to_string()))?;
            let d: f64 = d
                .trim()
                .parse()
                .map_err(|_| CoreError::ScalarParse(text.to_string()))?;
            if d == 0.0 {
                return Err(CoreError::ScalarParse(text.to_string()));
            }
            return Ok(n / d);
        }
        t.parse()
            .map_err(|_| CoreError::ScalarParse(text.to_string()))
    }
    fn render(&self) -> String {
        // 17 significant digits: round-trips every f64.
        format!("{:.16e}", self)
    }
}

/// Faithful conversion that avoids BigInt-to-f64 overflow for huge
/// numerators: scale numerator and denominator down together first.
fn rat_to_f64(r: &Rat) -> f64 {
    let num = r.numer();
    let den = r.denom();
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    // Keep both operands comfortably inside f64 range.
    let shift = (nb.max(db) - 900).max(0) as u64;
    let n = (num >> shift).to_string().parse::<f64>().unwrap_or(f64::NAN);
    let d = (den >> shift).to_string().parse::<f64>().unwrap_or(f64::NAN);
    if d == 0.0 {
        // Denominator underflowed the shift; fall back to bit-length estimate.
        return if Signed::is_negative(num) {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
    }
    n / d
}

fn parse_rational(text: &str) -> Result<Rat> {
    let t = text.trim();
    let err = || CoreError::ScalarParse(text.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let numer: BigInt = n.trim().parse().map_err(|_| err())?;
        let denom: BigInt = d.trim().parse().map_err(|_| err())?;
        if Zero::is_zero(&denom) {
            return Err(err());
        }
        return Ok(Rat::new(numer, denom));
    }
    if let Ok(i) = t.parse::<BigInt>() {
        return Ok(Rat::from_integer(i));
    }
    // Decimal or scientific literal: go through f64 (exact dyadic value).
    let v: f64 = t.parse().map_err(|_| err())?;
    if !v.is_finite() {
        return Err(err());
    }
    Ok(Rat::from_float(v).ok_or_else(err)?)
}

/// Convenience constructor used throughout the tests.
pub fn rat(num: i64, den: i64) -> Rat {
    <Rat as Scalar>::from_ratio(num, den)
}

/// Carry an exact rational into another scalar type; fails when either
/// component exceeds 64 bits.
pub fn rat_to_scalar<S: Scalar>(r: &Rat) -> Option<S> {
    use num_traits::ToPrimitive;
    Some(S::from_ratio(r.numer().to_i64()?, r.denom().to_i64()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parse_and_render_round_trip() {
        for s in ["3/4", "-7/2", "0", "12", "-5"] {
            let r = <Rat as Scalar>::parse(s).unwrap();
            let again = <Rat as Scalar>::parse(&r.render()).unwrap();
            assert_eq!(r, again);
        }
        assert_eq!(<Rat as Scalar>::parse("6/8").unwrap(), rat(3, 4));
        assert_eq!(rat(3, 4).render(), "3/4");
        assert_eq!(rat(-8, 2).render(), "-4");
        assert!(<Rat as Scalar>::parse("1/0").is_err());
        assert!(<Rat as Scalar>::parse("abc").is_err());
    }

    #[test]
    fn rational_parse_accepts_decimal_literals() {
        assert_eq!(<Rat as Scalar>::parse("0.5").unwrap(), rat(1, 2));
        assert_eq!(<Rat as Scalar>::parse("-0.25").unwrap(), rat(-1, 4));
    }

    #[test]
    fn float_render_round_trips() {
        for v in [0.1, -3.25, 1.0 / 3.0, 1e-13, 123456.789] {
            let s = v.render();
            let back: f64 = <f64 as Scalar>::parse(&s).unwrap();
            assert_eq!(v, back, "render {s} lost bits");
        }
    }

    #[test]
    fn arithmetic_basics() {
        let a = rat(1, 3);
        let b = rat(1, 6);
        assert_eq!(a.add(&b), rat(1, 2));
        assert_eq!(a.sub(&b), rat(1, 6));
        assert_eq!(a.mul(&b), rat(1, 18));
        assert_eq!(a.div(&b).unwrap(), rat(2, 1));
        assert!(a.div(&rat(0, 1)).is_none());
        assert_eq!(rat(-2, 5).relu(), rat(0, 1));
        assert_eq!(rat(2, 5).relu(), rat(2, 5));
        assert_eq!(rat(-2, 5).sign(), -1);
    }

    #[test]
    fn f64_conversion_is_exact_for_dyadics() {
        let r = <Rat as Scalar>::from_f64(0.375);
        assert_eq!(r, rat(3, 8));
        assert_eq!(r.to_f64(), 0.375);
    }

    #[test]
    fn huge_rationals_convert_without_overflow() {
        let big = Rat::new(BigInt::from(10).pow(400), BigInt::from(3));
        assert!(big.to_f64().is_infinite());
        let tiny = Rat::new(BigInt::from(3), BigInt::from(10).pow(400));
        assert_eq!(tiny.to_f64(), 0.0);
        let balanced = Rat::new(BigInt::from(10).pow(350) * 7, BigInt::from(10).pow(350) * 2);
        assert!((balanced.to_f64() - 3.5).abs() < 1e-12);
    }
}
