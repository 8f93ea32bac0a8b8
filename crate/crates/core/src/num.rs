//! Coefficient arithmetic: exact Gaussian rationals and floating complex
//! numbers behind one trait.
//!
//! Everything downstream (polynomials, resultants, charts) is generic over
//! [`Coeff`]. The exact type exists because zero tests on resultants and
//! tangent cones must not depend on floating arithmetic; the floating type
//! is what the root finder and the path tracker consume.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Coefficient ring shared by the exact and floating polynomial stacks.
///
/// Both implementors form a field; `is_exact()` tells callers whether
/// `is_zero` is a decision procedure or a floating comparison.
pub trait Coeff:
    Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn add_ref(&self, rhs: &Self) -> Self;
    fn sub_ref(&self, rhs: &Self) -> Self;
    fn mul_ref(&self, rhs: &Self) -> Self;
    fn div_ref(&self, rhs: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn conj_ref(&self) -> Self;
    /// Magnitude estimate used for pivoting and scale heuristics.
    fn abs_est(&self) -> f64;
    fn to_c64(&self) -> Complex64;
    /// True when arithmetic is exact and `is_zero` is decisive.
    fn is_exact() -> bool;
}

/// A complex number with rational real and imaginary parts.
///
/// This is the coefficient field for every computation whose answer hinges
/// on an exact zero: discriminants, section reductions, tangent cones, cone
/// vertices.
#[derive(Clone, PartialEq, Eq)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRational { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        GaussRational {
            re: BigRational::from_integer(BigInt::from(re)),
            im: BigRational::from_integer(BigInt::from(im)),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        GaussRational {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// |z|^2 = re^2 + im^2, exact.
    pub fn norm_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Exact square root in Q(i) if one exists.
    ///
    /// Solves (p + qi)^2 = self over the rationals; returns `None` when the
    /// value is not a perfect square in the field.
    pub fn sqrt_exact(&self) -> Option<GaussRational> {
        // (p + qi)^2 = p^2 - q^2 + 2pq i.
        // With a = re, b = im:  p^2 = (a + sqrt(a^2+b^2))/2, q = b/(2p).
        let norm = self.norm_sq();
        let r = rational_sqrt(&norm)?;
        if self.im.is_zero() {
            if !self.re.is_negative() {
                let p = rational_sqrt(&self.re)?;
                return Some(GaussRational::new(p, BigRational::zero()));
            }
            let q = rational_sqrt(&(-&self.re))?;
            return Some(GaussRational::new(BigRational::zero(), q));
        }
        let two = BigRational::from_integer(BigInt::from(2));
        let p_sq = (&self.re + &r) / &two;
        let p = rational_sqrt(&p_sq)?;
        if p.is_zero() {
            return None;
        }
        let q = &self.im / &(&two * &p);
        Some(GaussRational::new(p, q))
    }
}

/// Exact rational square root, if the numerator and denominator are both
/// perfect squares.
pub fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    if x.is_negative() {
        return None;
    }
    let num = x.numer().sqrt();
    let den = x.denom().sqrt();
    if &(&num * &num) == x.numer() && &(&den * &den) == x.denom() {
        Some(BigRational::new(num, den))
    } else {
        None
    }
}

impl fmt::Debug for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else {
            write!(f, "({}{}{}i)", self.re, if self.im.is_negative() { "" } else { "+" }, self.im)
        }
    }
}

impl Coeff for GaussRational {
    fn zero() -> Self {
        GaussRational::from_ints(0, 0)
    }
    fn one() -> Self {
        GaussRational::from_ints(1, 0)
    }
    fn from_i64(n: i64) -> Self {
        GaussRational::from_ints(n, 0)
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        GaussRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        GaussRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        GaussRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
    fn div_ref(&self, rhs: &Self) -> Self {
        let n = rhs.norm_sq();
        assert!(!n.is_zero(), "division by zero GaussRational");
        GaussRational::new(
            (&self.re * &rhs.re + &self.im * &rhs.im) / &n,
            (&self.im * &rhs.re - &self.re * &rhs.im) / &n,
        )
    }
    fn neg_ref(&self) -> Self {
        GaussRational::new(-&self.re, -&self.im)
    }
    fn conj_ref(&self) -> Self {
        GaussRational::new(self.re.clone(), -&self.im)
    }
    fn abs_est(&self) -> f64 {
        self.to_c64().norm()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
    fn is_exact() -> bool {
        true
    }
}

impl Coeff for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div_ref(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn conj_ref(&self) -> Self {
        self.conj()
    }
    fn abs_est(&self) -> f64 {
        self.norm()
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn is_exact() -> bool {
        false
    }
}

/// Rational-to-f64 conversion that survives numerators and denominators far
/// outside the f64 range by cancelling a common power of two first.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if let Some(v) = x.to_f64() {
        if v.is_finite() && (v != 0.0 || x.is_zero()) {
            return v;
        }
    }
    let shift = x.numer().bits() as i64 - x.denom().bits() as i64;
    let scaled = if shift > 0 {
        x / BigRational::from_integer(BigInt::one() << shift as usize)
    } else {
        x * BigRational::from_integer(BigInt::one() << (-shift) as usize)
    };
    let base = scaled.to_f64().unwrap_or(0.0);
    base * 2f64.powi(shift as i32)
}

/// A Gaussian integer, used by the fraction-free determinant path where
/// rational normalization per operation would dominate.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GaussInt {
    pub re: BigInt,
    pub im: BigInt,
}

impl GaussInt {
    pub fn zero() -> Self {
        GaussInt { re: BigInt::zero(), im: BigInt::zero() }
    }

    pub fn one() -> Self {
        GaussInt { re: BigInt::one(), im: BigInt::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        GaussInt { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        GaussInt { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        GaussInt {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }

    pub fn neg(&self) -> Self {
        GaussInt { re: -&self.re, im: -&self.im }
    }

    /// Exact division (the quotient must be a Gaussian integer, as it is
    /// inside Bareiss elimination by construction).
    pub fn exact_div(&self, rhs: &Self) -> Self {
        let norm = &rhs.re * &rhs.re + &rhs.im * &rhs.im;
        let re_num = &self.re * &rhs.re + &self.im * &rhs.im;
        let im_num = &self.im * &rhs.re - &self.re * &rhs.im;
        debug_assert!((&re_num % &norm).is_zero() && (&im_num % &norm).is_zero(), "non-exact Gaussian division");
        GaussInt { re: re_num / &norm, im: im_num / norm }
    }

    pub fn to_rational(&self) -> GaussRational {
        GaussRational::new(
            BigRational::from_integer(self.re.clone()),
            BigRational::from_integer(self.im.clone()),
        )
    }

    /// Nearest-Gaussian-integer division: the remainder of a - round(a/b) b
    /// has norm at most half of |b|^2, which makes Z\[i\] Euclidean.
    pub fn round_div(&self, rhs: &Self) -> Self {
        let n = &rhs.re * &rhs.re + &rhs.im * &rhs.im;
        let re_num = &self.re * &rhs.re + &self.im * &rhs.im;
        let im_num = &self.im * &rhs.re - &self.re * &rhs.im;
        GaussInt { re: round_ratio(&re_num, &n), im: round_ratio(&im_num, &n) }
    }
}

/// Nearest integer to a/n for n > 0.
fn round_ratio(a: &BigInt, n: &BigInt) -> BigInt {
    let two_a = a << 1usize;
    let num = two_a + n;
    let den = n << 1usize;
    // floor(num/den)
    let q = &num / &den;
    let r = &num % &den;
    if r.sign() == num_bigint::Sign::Minus {
        q - BigInt::one()
    } else {
        q
    }
}

/// Gcd in the Euclidean domain Z\[i\]; the result is determined up to units,
/// which is all content stripping needs.
pub fn gauss_gcd(a: &GaussInt, b: &GaussInt) -> GaussInt {
    let mut x = a.clone();
    let mut y = b.clone();
    while !y.is_zero() {
        let q = x.round_div(&y);
        let r = x.sub(&q.mul(&y));
        x = y;
        y = r;
    }
    x
}

pub fn gcd_int(a: &BigInt, b: &BigInt) -> BigInt {
    let mut x = a.clone();
    if x.sign() == num_bigint::Sign::Minus {
        x = -x;
    }
    let mut y = b.clone();
    if y.sign() == num_bigint::Sign::Minus {
        y = -y;
    }
    while !y.is_zero() {
        let r = &x % &y;
        x = y;
        y = r;
    }
    if x.is_zero() {
        BigInt::one()
    } else {
        x
    }
}

pub fn lcm_int(a: &BigInt, b: &BigInt) -> BigInt {
    if b.is_zero() {
        return a.clone();
    }
    a / gcd_int(a, b) * b
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// by continued fractions. Keeps exact frame scalings compact.
pub fn rational_approx(x: f64, max_den: u64) -> BigRational {
    assert!(x.is_finite());
    let negative = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e18 {
            break;
        }
        let ai = BigInt::from(a as i64);
        let p2 = &ai * &p1 + &p0;
        let q2 = &ai * &q1 + &q0;
        if q2 > BigInt::from(max_den) {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a;
        if frac < 1e-18 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1.is_zero() {
        return BigRational::zero();
    }
    let r = BigRational::new(p1, q1);
    if negative {
        -r
    } else {
        r
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $impl:ident) => {
        impl $trait for GaussRational {
            type Output = GaussRational;
            fn $method(self, rhs: GaussRational) -> GaussRational {
                Coeff::$impl(&self, &rhs)
            }
        }
        impl<'a> $trait<&'a GaussRational> for &'a GaussRational {
            type Output = GaussRational;
            fn $method(self, rhs: &'a GaussRational) -> GaussRational {
                Coeff::$impl(self, rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, sub_ref);
forward_binop!(Mul, mul, mul_ref);
forward_binop!(Div, div, div_ref);

impl Neg for GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        self.neg_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(re: i64, im: i64) -> GaussRational {
        GaussRational::from_ints(re, im)
    }

    #[test]
    fn gauss_rational_field_ops() {
        let a = g(1, 2);
        let b = g(3, -1);
        assert_eq!(a.mul_ref(&b), g(5, 5));
        let q = a.mul_ref(&b).div_ref(&b);
        assert_eq!(q, a);
        assert_eq!(a.conj_ref(), g(1, -2));
    }

    #[test]
    fn exact_sqrt() {
        // (1+2i)^2 = -3+4i
        let sq = g(-3, 4);
        let r = sq.sqrt_exact().unwrap();
        assert_eq!(r.mul_ref(&r), sq);
        // 2 is not a square in Q(i)
        assert!(g(2, 0).sqrt_exact().is_none());
        // -4 = (2i)^2
        let r = g(-4, 0).sqrt_exact().unwrap();
        assert_eq!(r.mul_ref(&r), g(-4, 0));
        // 9/4
        let x = GaussRational::from_ratio(9, 4);
        let r = x.sqrt_exact().unwrap();
        assert_eq!(r.mul_ref(&r), x);
    }

    #[test]
    fn rational_approx_is_tight() {
        let x = 1.0 / 3.0_f64.sqrt();
        let r = rational_approx(x, 1 << 26);
        let err = (rational_to_f64(&r) - x).abs();
        assert!(err < 1e-13, "approximation error {err}");
        assert_eq!(rational_approx(0.5, 1 << 26), BigRational::new(BigInt::from(1), BigInt::from(2)));
    }

    #[test]
    fn huge_rational_to_f64() {
        let big = BigRational::new(BigInt::from(3) << 1200, BigInt::one() << 100);
        let v = rational_to_f64(&big);
        assert!(v.is_infinite() || v > 1e300);
        let small = BigRational::new(BigInt::from(3), BigInt::one() << 1200);
        let inv = rational_to_f64(&small);
        assert!(inv >= 0.0 && inv < 1e-300);
        let mid = BigRational::new(BigInt::from(7) << 600, BigInt::one() << 601);
        assert!((rational_to_f64(&mid) - 3.5).abs() < 1e-12);
    }
}
