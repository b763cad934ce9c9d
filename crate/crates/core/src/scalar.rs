//! Scalar backends.
//!
//! Every quantity in the crate is computed over one of two scalar types: the
//! exact rational field [`Rat`] (arbitrary precision, used for identity
//! checks) or double-precision complex numbers [`C64`] (used wherever Bethe
//! roots enter). Code is generic over [`Scalar`], so mixing the two backends
//! in one expression is rejected at compile time rather than coerced.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
pub use num_traits::{One, Zero};

pub type Rat = num_rational::BigRational;
pub type C64 = num_complex::Complex64;

pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
    + Send
    + Sync
    + 'static
{
    /// True for the exact rational backend.
    const EXACT: bool;

    fn from_int(n: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn inv(&self) -> Self;
    fn powi(&self, e: i64) -> Self;
    fn conj(&self) -> Self;
    /// Magnitude as `f64`; approximate for exact values.
    fn mag(&self) -> f64;
    fn to_c64(&self) -> C64;
    /// `Some(x)` when the value is a real number in the open interval (0, 1).
    fn as_unit_interval_real(&self) -> Option<f64>;
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn from_int(n: i64) -> Self {
        Rat::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rat::new(BigInt::from(num), BigInt::from(den))
    }

    fn inv(&self) -> Self {
        assert!(!<Rat as Zero>::is_zero(self), "division by zero");
        self.recip()
    }

    fn powi(&self, e: i64) -> Self {
        if e == 0 {
            return <Rat as One>::one();
        }
        let exp = i32::try_from(e).expect("exponent out of range");
        num_traits::Pow::pow(self, exp)
    }

    fn conj(&self) -> Self {
        self.clone()
    }

    fn mag(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }

    fn to_c64(&self) -> C64 {
        C64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn as_unit_interval_real(&self) -> Option<f64> {
        if self.is_positive() && *self < <Rat as One>::one() {
            self.to_f64()
        } else {
            None
        }
    }
}

impl Scalar for C64 {
    const EXACT: bool = false;

    fn from_int(n: i64) -> Self {
        C64::new(n as f64, 0.0)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        C64::new(num as f64 / den as f64, 0.0)
    }

    fn inv(&self) -> Self {
        C64::new(1.0, 0.0) / self
    }

    fn powi(&self, e: i64) -> Self {
        let exp = i32::try_from(e).expect("exponent out of range");
        num_complex::Complex::powi(self, exp)
    }

    fn conj(&self) -> Self {
        num_complex::Complex::conj(self)
    }

    fn mag(&self) -> f64 {
        self.norm()
    }

    fn to_c64(&self) -> C64 {
        *self
    }

    fn as_unit_interval_real(&self) -> Option<f64> {
        if self.im == 0.0 && self.re > 0.0 && self.re < 1.0 {
            Some(self.re)
        } else {
            None
        }
    }
}

/// Integer power `z^(x2/2)` of a complex number given a doubled exponent.
///
/// Even `x2` stays on the principal sheet automatically; odd `x2` uses the
/// principal square root, fixing the branch once for the whole crate.
pub fn zpow_half(z: C64, x2: i64) -> C64 {
    let whole = x2.div_euclid(2);
    let rem = x2.rem_euclid(2);
    let base = Scalar::powi(&z, whole);
    if rem == 0 {
        base
    } else {
        base * z.sqrt()
    }
}

/// Parse a decimal or `a/b` literal into an exact rational.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: i64 = num.trim().parse().ok()?;
        let d: i64 = den.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Rat::new(BigInt::from(n), BigInt::from(d)));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let sign = if int.trim_start().starts_with('-') { -1 } else { 1 };
        let whole: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().ok()? };
        let digits = frac.len() as u32;
        if digits > 18 {
            return None;
        }
        let frac_num: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
        let den = 10i64.checked_pow(digits)?;
        let num = whole.checked_mul(den)?.checked_add(sign * frac_num)?;
        return Some(Rat::new(BigInt::from(num), BigInt::from(den)));
    }
    let n: i64 = s.parse().ok()?;
    Some(Rat::from_integer(BigInt::from(n)))
}
