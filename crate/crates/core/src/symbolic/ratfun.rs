//! Rational functions in `t`, kept in lowest terms with a monic denominator.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::tpoly::TPoly;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RatFunRepr", into = "RatFunRepr")]
pub struct RatFun {
    num: TPoly,
    den: TPoly,
}

#[derive(Serialize, Deserialize)]
struct RatFunRepr {
    num: TPoly,
    den: TPoly,
}

impl TryFrom<RatFunRepr> for RatFun {
    type Error = String;
    fn try_from(r: RatFunRepr) -> std::result::Result<Self, String> {
        RatFun::new(r.num, r.den).ok_or_else(|| "zero denominator".to_string())
    }
}

impl From<RatFun> for RatFunRepr {
    fn from(r: RatFun) -> Self {
        RatFunRepr {
            num: r.num,
            den: r.den,
        }
    }
}

impl RatFun {
    /// Normalized `num/den`; `None` if `den` is zero.
    pub fn new(num: TPoly, den: TPoly) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        if num.is_zero() {
            return Some(Self::zero());
        }
        let g = TPoly::gcd(&num, &den);
        let (mut num, mut den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g), den.div_exact(&g))
        };
        let lc = den.leading();
        if !lc.is_one() {
            let inv = lc.recip();
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        Some(RatFun { num, den })
    }

    pub fn from_poly(p: TPoly) -> Self {
        RatFun {
            num: p,
            den: TPoly::one(),
        }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_poly(TPoly::constant(c))
    }

    pub fn from_int(c: i64) -> Self {
        Self::from_poly(TPoly::from_int(c))
    }

    pub fn zero() -> Self {
        Self::from_poly(TPoly::zero())
    }

    pub fn one() -> Self {
        Self::from_poly(TPoly::one())
    }

    pub fn t() -> Self {
        Self::from_poly(TPoly::t())
    }

    pub fn num(&self) -> &TPoly {
        &self.num
    }

    pub fn den(&self) -> &TPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn inv(&self) -> Result<RatFun> {
        RatFun::new(self.den.clone(), self.num.clone()).ok_or(Error::SingularOverQt)
    }

    pub fn scale(&self, c: &BigRational) -> RatFun {
        if c.is_zero() {
            return RatFun::zero();
        }
        RatFun {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    /// d/dt.
    pub fn derivative(&self) -> RatFun {
        let n = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        let d = &self.den * &self.den;
        RatFun::new(n, d).expect("nonzero denominator")
    }

    /// Numerical value; errors when `t` is (numerically) a pole.
    pub fn eval(&self, t: Complex64) -> Result<Complex64> {
        let d = self.den.eval(t);
        let scale = self
            .den
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| super::rational::rational_to_f64(c).abs() * t.norm().powi(k as i32))
            .sum::<f64>();
        if d.norm() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::PoleAt(t));
        }
        Ok(self.num.eval(t) / d)
    }

    /// Exact value at a rational point; `None` at a pole.
    pub fn eval_rational(&self, t: &BigRational) -> Option<BigRational> {
        let d = self.den.eval_rational(t);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval_rational(t) / d)
    }
}

impl fmt::Display for RatFun {
    /// Canonical string with integer coefficients, e.g. `-1/(2*t)` or
    /// `(t^2 - 1)/(t + 3)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        // num/den = (sn * N) / (sd * D) with integer primitive N, D.
        let (n_int, sn) = self.num.integer_content_form();
        let (d_int, sd) = self.den.integer_content_form();
        let ratio = sn / sd;
        let to_poly = |ints: &[num_bigint::BigInt]| {
            TPoly::new(
                ints.iter()
                    .map(|c| BigRational::from_integer(c.clone()))
                    .collect(),
            )
        };
        let n = to_poly(&n_int).scale(&BigRational::from_integer(ratio.numer().clone()));
        let d = to_poly(&d_int).scale(&BigRational::from_integer(ratio.denom().clone()));
        let n_str = n.to_string();
        let d_str = d.to_string();
        let n_atomic = n.term_count() == 1;
        let d_atomic = d.term_count() == 1
            && (d.is_constant() || d.leading().is_one());
        let n_part = if n_atomic { n_str } else { format!("({n_str})") };
        let d_part = if d_atomic { d_str } else { format!("({d_str})") };
        write!(f, "{n_part}/{d_part}")
    }
}

impl fmt::Debug for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFun({self})")
    }
}

impl Add for &RatFun {
    type Output = RatFun;
    fn add(self, rhs: &RatFun) -> RatFun {
        if self.den == rhs.den {
            return RatFun::new(&self.num + &rhs.num, self.den.clone()).expect("nonzero");
        }
        let n = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RatFun::new(n, &self.den * &rhs.den).expect("nonzero")
    }
}

impl Sub for &RatFun {
    type Output = RatFun;
    fn sub(self, rhs: &RatFun) -> RatFun {
        self + &(-rhs)
    }
}

impl Mul for &RatFun {
    type Output = RatFun;
    fn mul(self, rhs: &RatFun) -> RatFun {
        if self.is_zero() || rhs.is_zero() {
            return RatFun::zero();
        }
        RatFun::new(&self.num * &rhs.num, &self.den * &rhs.den).expect("nonzero")
    }
}

impl Div for &RatFun {
    type Output = RatFun;
    /// Panics on division by zero; use [`RatFun::inv`] for a checked inverse.
    fn div(self, rhs: &RatFun) -> RatFun {
        self * &rhs.inv().expect("division by the zero rational function")
    }
}

impl Neg for &RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        RatFun {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Neg for RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for RatFun {
            type Output = RatFun;
            fn $m(self, rhs: RatFun) -> RatFun {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl From<TPoly> for RatFun {
    fn from(p: TPoly) -> Self {
        RatFun::from_poly(p)
    }
}

impl Zero for RatFun {
    fn zero() -> Self {
        RatFun::zero()
    }
    fn is_zero(&self) -> bool {
        RatFun::is_zero(self)
    }
}

impl One for RatFun {
    fn one() -> Self {
        RatFun::one()
    }
}
