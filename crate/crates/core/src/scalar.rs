//! Coefficient fields for the exterior-algebra layer.
//!
//! [`ExactScalar`] is the field Q(i)(√2): every number `a + b·√2` with `a`, `b`
//! Gaussian rationals. It contains √2 and √−2 = i·√2, which is all the Clifford
//! actions need, so identity checks run without rounding. `Complex64` is the
//! floating-point mirror used for spectral assembly.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Field operations shared by the exact and floating-point backends.
pub trait Scalar:
    nalgebra::Scalar
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn conj(&self) -> Self;
    fn from_i64(v: i64) -> Self;
    fn sqrt2() -> Self;
    fn imag_unit() -> Self;
    fn to_c64(&self) -> Complex64;

    /// The branch √−2 = i·√2.
    fn sqrt_minus2() -> Self {
        Self::imag_unit() * Self::sqrt2()
    }
}

impl Scalar for Complex64 {
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn sqrt2() -> Self {
        Complex64::new(std::f64::consts::SQRT_2, 0.0)
    }
    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
}

/// Gaussian rational `re + i·im`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self::new(rat(re), rat(im))
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
}

impl Zero for GaussRational {
    fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussRational {
    fn one() -> Self {
        Self::new(BigRational::one(), BigRational::zero())
    }
}

impl Add for GaussRational {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for GaussRational {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for GaussRational {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let re = &self.re * &o.re - &self.im * &o.im;
        let im = &self.re * &o.im + &self.im * &o.re;
        Self::new(re, im)
    }
}

impl Neg for GaussRational {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

/// Element `a + b·√2` of Q(i)(√2).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    pub rational: GaussRational,
    pub sqrt2: GaussRational,
}

impl ExactScalar {
    pub fn new(rational: GaussRational, sqrt2: GaussRational) -> Self {
        Self { rational, sqrt2 }
    }

    pub fn from_gauss(g: GaussRational) -> Self {
        Self::new(g, GaussRational::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        let r = BigRational::new(BigInt::from(num), BigInt::from(den));
        Self::from_gauss(GaussRational::new(r, BigRational::zero()))
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = |g: &GaussRational| format!("({} + {}i)", g.re, g.im);
        if self.sqrt2.is_zero() {
            write!(f, "{}", g(&self.rational))
        } else {
            write!(f, "{} + {}·√2", g(&self.rational), g(&self.sqrt2))
        }
    }
}

impl Zero for ExactScalar {
    fn zero() -> Self {
        Self::new(GaussRational::zero(), GaussRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.sqrt2.is_zero()
    }
}

impl One for ExactScalar {
    fn one() -> Self {
        Self::from_gauss(GaussRational::one())
    }
}

impl Add for ExactScalar {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        if o.is_zero() {
            return self;
        }
        if self.is_zero() {
            return o;
        }
        Self::new(self.rational + o.rational, self.sqrt2 + o.sqrt2)
    }
}

impl Sub for ExactScalar {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.rational - o.rational, self.sqrt2 - o.sqrt2)
    }
}

impl Mul for ExactScalar {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        // (a + b√2)(c + d√2) = (ac + 2bd) + (ad + bc)√2
        let two = GaussRational::from_ints(2, 0);
        let rational = self.rational.clone() * o.rational.clone()
            + two * self.sqrt2.clone() * o.sqrt2.clone();
        let sqrt2 = self.rational * o.sqrt2 + self.sqrt2 * o.rational;
        Self::new(rational, sqrt2)
    }
}

impl Neg for ExactScalar {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.rational, -self.sqrt2)
    }
}

impl AddAssign for ExactScalar {
    fn add_assign(&mut self, o: Self) {
        *self = std::mem::replace(self, ExactScalar::zero()) + o;
    }
}

impl SubAssign for ExactScalar {
    fn sub_assign(&mut self, o: Self) {
        *self = std::mem::replace(self, ExactScalar::zero()) - o;
    }
}

impl MulAssign for ExactScalar {
    fn mul_assign(&mut self, o: Self) {
        *self = std::mem::replace(self, ExactScalar::zero()) * o;
    }
}

impl Scalar for ExactScalar {
    fn conj(&self) -> Self {
        Self::new(self.rational.conj(), self.sqrt2.conj())
    }
    fn from_i64(v: i64) -> Self {
        Self::from_gauss(GaussRational::from_ints(v, 0))
    }
    fn sqrt2() -> Self {
        Self::new(GaussRational::zero(), GaussRational::one())
    }
    fn imag_unit() -> Self {
        Self::from_gauss(GaussRational::from_ints(0, 1))
    }
    fn to_c64(&self) -> Complex64 {
        self.rational.to_c64() + self.sqrt2.to_c64() * std::f64::consts::SQRT_2
    }
}

pub fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    // Direct conversion is exact-rounded for moderate sizes; fall back to a
    // scaled quotient when numerator or denominator overflow f64.
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let n = r.numer();
    let d = r.denom();
    let shift = (n.bits() as i64).max(d.bits() as i64) - 900;
    let (n2, d2) = if shift > 0 {
        (n >> shift as usize, d >> shift as usize)
    } else {
        (n.clone(), d.clone())
    };
    n2.to_f64().unwrap_or(0.0) / d2.to_f64().unwrap_or(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_minus_two_squares_to_minus_two() {
        let s = ExactScalar::sqrt_minus2();
        assert_eq!(s.clone() * s, ExactScalar::from_i64(-2));
        let r = ExactScalar::sqrt2();
        assert_eq!(r.clone() * r, ExactScalar::from_i64(2));
    }

    #[test]
    fn float_mirror_matches() {
        let x = ExactScalar::new(GaussRational::from_ints(1, -3), GaussRational::from_ints(2, 5));
        let y = ExactScalar::new(GaussRational::from_ints(-7, 1), GaussRational::from_ints(0, 4));
        let exact = (x.clone() * y.conj()).to_c64();
        let float = x.to_c64() * y.to_c64().conj();
        assert!((exact - float).norm() < 1e-12);
    }

    #[test]
    fn huge_rationals_convert() {
        let big = BigRational::new(BigInt::from(10).pow(400u32), BigInt::from(10).pow(399u32) * 4);
        assert!((rat_to_f64(&big) - 2.5).abs() < 1e-12);
    }
}
