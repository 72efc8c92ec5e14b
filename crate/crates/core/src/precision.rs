//! Working-precision scalars for quadrature: `f64` and a double-double type
//! with roughly 32 significant digits.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};

use crate::symbolic::rational::rational_to_f64;

/// Real scalar usable by the quadrature kernels.
pub trait Real:
    Copy
    + fmt::Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Num
    + Neg<Output = Self>
{
    /// Unit roundoff.
    const EPSILON: f64;

    fn from_f64(x: f64) -> Self;
    fn from_rational(q: &BigRational) -> Self;
    fn to_f64(self) -> f64;
    fn exp(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn sqrt(self) -> Self;
    fn pi() -> Self;

    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }
}

impl Real for f64 {
    const EPSILON: f64 = f64::EPSILON;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_rational(q: &BigRational) -> Self {
        rational_to_f64(q)
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
}

pub fn cexp<R: Real>(z: Complex<R>) -> Complex<R> {
    let m = z.re.exp();
    let (s, c) = z.im.sin_cos();
    Complex::new(m * c, m * s)
}

/// Modulus rounded to double precision (used for error bookkeeping).
pub fn cabs<R: Real>(z: Complex<R>) -> f64 {
    z.re.to_f64().hypot(z.im.to_f64())
}

pub fn to_c64<R: Real>(z: Complex<R>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

pub fn from_c64<R: Real>(z: Complex<f64>) -> Complex<R> {
    Complex::new(R::from_f64(z.re), R::from_f64(z.im))
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Default)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const fn new(hi: f64, lo: f64) -> Self {
        DoubleDouble { hi, lo }
    }

    pub const PI: DoubleDouble = DoubleDouble::new(3.141592653589793, 1.2246467991473532e-16);
    pub const LN2: DoubleDouble = DoubleDouble::new(0.6931471805599453, 2.3190468138462996e-17);

    fn renorm(hi: f64, lo: f64) -> Self {
        let (h, l) = quick_two_sum(hi, lo);
        DoubleDouble { hi: h, lo: l }
    }

    /// Exact multiplication by a power of two.
    pub fn ldexp(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        DoubleDouble {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        Self::renorm(p, e + self.lo * b)
    }

    pub fn square(self) -> Self {
        self * self
    }

    /// `exp(x) - 1` for `|x| <= ln2/2`.
    fn expm1_small(x: Self) -> Self {
        // Scale down by 2^-9, sum the series, then undo with s -> 2s + s^2.
        let r = x.ldexp(-9);
        let mut term = r;
        let mut sum = r;
        let mut n = 1.0;
        loop {
            n += 1.0;
            term = (term * r).div_f64(n);
            sum = sum + term;
            if term.hi.abs() <= 1e-36 * sum.hi.abs().max(1e-300) {
                break;
            }
        }
        for _ in 0..9 {
            sum = sum.ldexp(1) + sum.square();
        }
        sum
    }

    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        let (s, f) = two_sum(self.hi, -p);
        let q2 = (s + (f - e + self.lo)) / b;
        Self::renorm(q1, q2)
    }

    fn sin_cos_taylor(r: Self) -> (Self, Self) {
        let r2 = r.square();
        // sin
        let mut term = r;
        let mut s = r;
        let mut n = 1.0;
        loop {
            term = -(term * r2).div_f64((n + 1.0) * (n + 2.0));
            n += 2.0;
            s = s + term;
            if term.hi.abs() <= 1e-35 {
                break;
            }
        }
        // cos
        let mut term = DoubleDouble::from(1.0);
        let mut c = term;
        let mut n = 0.0;
        loop {
            term = -(term * r2).div_f64((n + 1.0) * (n + 2.0));
            n += 2.0;
            c = c + term;
            if term.hi.abs() <= 1e-35 {
                break;
            }
        }
        (s, c)
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DD({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.hi + self.lo)
    }
}

impl PartialEq for DoubleDouble {
    fn eq(&self, other: &Self) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Self::renorm(s, e + f)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        Self::renorm(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (h, l) = quick_two_sum(q1, q2);
        DoubleDouble::new(h, l) + DoubleDouble::from(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, b: Self) -> Self {
        let q = (self / b).hi.trunc();
        self - b.mul_f64(q)
    }
}

impl Zero for DoubleDouble {
    fn zero() -> Self {
        DoubleDouble::from(0.0)
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        DoubleDouble::from(1.0)
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = String;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, String> {
        if radix != 10 {
            return Err("only radix 10 is supported".into());
        }
        s.parse::<f64>()
            .map(DoubleDouble::from)
            .map_err(|e| e.to_string())
    }
}

impl Real for DoubleDouble {
    const EPSILON: f64 = 4.93e-32;

    fn from_f64(x: f64) -> Self {
        DoubleDouble::from(x)
    }

    fn from_rational(q: &BigRational) -> Self {
        let hi = rational_to_f64(q);
        let lo = BigRational::from_float(hi)
            .map(|h| rational_to_f64(&(q - h)))
            .unwrap_or(0.0);
        Self::renorm(hi, lo)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn exp(self) -> Self {
        if self.hi > 709.0 {
            return DoubleDouble::from(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return DoubleDouble::zero();
        }
        let k = (self.hi / Self::LN2.hi).round();
        let r = self - Self::LN2.mul_f64(k);
        let e = Self::expm1_small(r) + DoubleDouble::one();
        e.ldexp(k.to_i32().unwrap_or(0))
    }

    fn sin_cos(self) -> (Self, Self) {
        let half_pi = Self::PI.ldexp(-1);
        let k = (self.hi / half_pi.hi).round();
        let r = self - half_pi.mul_f64(k);
        let (s, c) = Self::sin_cos_taylor(r);
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return DoubleDouble::zero();
        }
        let x = DoubleDouble::from(self.hi.sqrt());
        x + (self - x.square()) / x.ldexp(1)
    }

    fn pi() -> Self {
        Self::PI
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(x: DoubleDouble, hi: f64, lo: f64, rel: f64) {
        let d = (x - DoubleDouble::new(hi, lo)).to_f64().abs();
        assert!(d <= rel * hi.abs(), "{x:?} vs {hi:e}+{lo:e}: diff {d:e}");
    }

    // References from a 50-digit evaluation, split into (hi, lo).
    #[test]
    fn elementary_functions_reach_thirty_digits() {
        let tol = 1e-30;
        close(DoubleDouble::from(1.0).exp(), 2.718281828459045, 1.4456468917292502e-16, tol);
        close(DoubleDouble::from(-7.3).exp(), 0.0006755387751938444, -2.9077504938462766e-20, tol);
        close(DoubleDouble::from(40.5).exp(), 3.8808469624362035e+17, -27.9768278124273, tol);
        close(DoubleDouble::from(0.5).sin_cos().0, 0.479425538604203, -5.103969860556013e-18, tol);
        close(DoubleDouble::from(2.7).sin_cos().1, -0.9040721420170612, -1.5081926583976142e-17, tol);
        close(DoubleDouble::from(100.3).sin_cos().0, -0.22891692244520673, 2.6396031437971418e-18, 1e-29);
        close(DoubleDouble::from(2.0).sqrt(), 1.4142135623730951, -9.667293313452913e-17, tol);
        close(DoubleDouble::from(1.0) / DoubleDouble::from(3.0), 0.3333333333333333, 1.850371707708594e-17, tol);
    }

    #[test]
    fn rational_conversion_keeps_low_part() {
        let q = BigRational::new(1.into(), 3.into());
        close(DoubleDouble::from_rational(&q), 0.3333333333333333, 1.850371707708594e-17, 1e-31);
    }

    #[test]
    fn complex_exp_generic() {
        let z = Complex::new(0.3, -1.2);
        let a = cexp(z);
        let b = to_c64(cexp(from_c64::<DoubleDouble>(z)));
        assert!((a - b).norm() < 1e-15);
        assert!((a - z.exp()).norm() < 1e-15);
    }
}
