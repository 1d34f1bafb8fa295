//! Coefficient fields.
//!
//! Two modes share every algebraic routine: exact complex rationals, used
//! for zero-tolerance identities, and `Complex64` for series work. Only
//! `+`, `*`, negation and division by integers are needed by the polynomial
//! layer, so the exact mode never loses information.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Complex numbers with arbitrary-precision rational parts.
pub type ExactComplex = Complex<BigRational>;

/// Real companion field of a [`Scalar`] (used for `hbar`, rescaling factors).
pub trait RealScalar:
    Clone
    + Debug
    + std::fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_rational(q: &BigRational) -> Self;
    /// Exact conversion from a binary float (always succeeds for finite input).
    fn from_f64(x: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;
    /// Square root, `None` when it is not representable in the field.
    fn sqrt(&self) -> Option<Self>;
    fn recip(&self) -> Self;

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }
}

impl RealScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_rational(q: &BigRational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }
    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| f64::sqrt(*self))
    }
    fn recip(&self) -> Self {
        1.0 / *self
    }
}

impl RealScalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let num = self.numer().to_biguint()?;
        let den = self.denom().to_biguint()?;
        let (rn, rd) = (num.sqrt(), den.sqrt());
        (&rn * &rn == num && &rd * &rd == den)
            .then(|| BigRational::new(BigInt::from(rn), BigInt::from(rd)))
    }
    fn recip(&self) -> Self {
        num_traits::Inv::inv(self.clone())
    }
}

/// Coefficient field of a jet.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    type Real: RealScalar;

    /// `true` for the rational field.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn i() -> Self;
    fn from_parts(re: Self::Real, im: Self::Real) -> Self;
    fn from_biguint(n: &BigUint) -> Self;
    fn from_c64(c: Complex64) -> Self;
    fn to_c64(&self) -> Complex64;
    fn conj(&self) -> Self;
    fn re(&self) -> Self::Real;
    fn im(&self) -> Self::Real;
    fn scale(&self, r: &Self::Real) -> Self;
    fn div_biguint(&self, n: &BigUint) -> Self;

    fn from_real(r: Self::Real) -> Self {
        Self::from_parts(r, Self::Real::zero())
    }

    fn from_u64(n: u64) -> Self {
        Self::from_biguint(&BigUint::from(n))
    }

    fn from_i64(n: i64) -> Self {
        let mag = Self::from_u64(n.unsigned_abs());
        if n < 0 {
            -mag
        } else {
            mag
        }
    }

    fn abs_sqr(&self) -> Self::Real {
        let (re, im) = (self.re(), self.im());
        re.clone() * re + im.clone() * im
    }

    fn powu(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            k >>= 1;
            if k > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Scalar for Complex64 {
    type Real = f64;
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn i() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
    fn from_biguint(n: &BigUint) -> Self {
        Complex64::new(n.to_f64().unwrap_or(f64::INFINITY), 0.0)
    }
    fn from_c64(c: Complex64) -> Self {
        c
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn re(&self) -> f64 {
        self.re
    }
    fn im(&self) -> f64 {
        self.im
    }
    fn scale(&self, r: &f64) -> Self {
        self * *r
    }
    fn div_biguint(&self, n: &BigUint) -> Self {
        self / n.to_f64().unwrap_or(f64::INFINITY)
    }
    fn from_u64(n: u64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
}

impl Scalar for ExactComplex {
    type Real = BigRational;
    const EXACT: bool = true;

    fn zero() -> Self {
        Complex::new(Zero::zero(), Zero::zero())
    }
    fn one() -> Self {
        Complex::new(One::one(), Zero::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn i() -> Self {
        Complex::new(Zero::zero(), One::one())
    }
    fn from_parts(re: BigRational, im: BigRational) -> Self {
        Complex::new(re, im)
    }
    fn from_biguint(n: &BigUint) -> Self {
        Complex::new(BigRational::from_integer(BigInt::from(n.clone())), Zero::zero())
    }
    fn from_c64(c: Complex64) -> Self {
        let re = BigRational::from_float(c.re).expect("finite real part");
        let im = BigRational::from_float(c.im).expect("finite imaginary part");
        Complex::new(re, im)
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(RealScalar::to_f64(&self.re), RealScalar::to_f64(&self.im))
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn re(&self) -> BigRational {
        self.re.clone()
    }
    fn im(&self) -> BigRational {
        self.im.clone()
    }
    fn scale(&self, r: &BigRational) -> Self {
        Complex::new(&self.re * r, &self.im * r)
    }
    fn div_biguint(&self, n: &BigUint) -> Self {
        let d = BigRational::from_integer(BigInt::from(n.clone()));
        Complex::new(&self.re / &d, &self.im / &d)
    }
}

/// `n!` as an exact integer.
pub fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// `C(n, k)` as an exact integer (zero when `k > n`).
pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// `ln(n!)`, exact summation for small `n`.
pub fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Rational `num/den` lifted into a scalar field.
pub fn ratio<T: Scalar>(num: i64, den: i64) -> T {
    T::from_real(T::Real::from_ratio(num, den))
}

/// Complex rational `(re_num + i im_num) / den` in either field.
pub fn complex_ratio<T: Scalar>(re_num: i64, im_num: i64, den: i64) -> T {
    T::from_parts(
        T::Real::from_ratio(re_num, den),
        T::Real::from_ratio(im_num, den),
    )
}
