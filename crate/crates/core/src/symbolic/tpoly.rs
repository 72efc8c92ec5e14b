//! Dense univariate polynomials in `t` over the rationals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::rational::{fmt_rational, rational_to_f64};

/// Polynomial in `t` with rational coefficients, stored by ascending degree.
///
/// The coefficient vector never carries trailing zeros, so the zero
/// polynomial is the empty vector.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct TPoly {
    coeffs: Vec<BigRational>,
}

impl TPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        TPoly { coeffs }
    }

    pub fn zero() -> Self {
        TPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(BigRational::from_integer(c.into()))
    }

    /// `c * t^k`
    pub fn monomial(c: BigRational, k: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigRational::zero(); k + 1];
        coeffs[k] = c;
        TPoly { coeffs }
    }

    /// The polynomial `t`.
    pub fn t() -> Self {
        Self::monomial(BigRational::one(), 1)
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(c.into()))
                .collect(),
        )
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        TPoly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let inv = self.leading().recip();
        self.scale(&inv)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from_integer(k.into()))
                .collect(),
        )
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &TPoly) -> (TPoly, TPoly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lc_inv = divisor.leading().recip();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (TPoly::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for k in (dd..rem.len()).rev() {
            if rem[k].is_zero() {
                continue;
            }
            let q = &rem[k] * &lc_inv;
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                let idx = k - dd + j;
                rem[idx] = &rem[idx] - &q * dc;
            }
            quot[k - dd] = q;
        }
        rem.truncate(dd);
        (TPoly::new(quot), TPoly::new(rem))
    }

    /// Exact division, asserting a zero remainder in debug builds.
    pub fn div_exact(&self, divisor: &TPoly) -> TPoly {
        let (q, r) = self.div_rem(divisor);
        debug_assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    /// Monic gcd (zero only when both inputs are zero).
    pub fn gcd(a: &TPoly, b: &TPoly) -> TPoly {
        let mut x = a.clone();
        let mut y = b.clone();
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y);
            x = y;
            y = r.primitive_rational();
        }
        x.monic()
    }

    /// Scales so that all coefficients are integers with gcd 1 and the
    /// leading coefficient is positive. Keeps gcd computations from
    /// growing rational coefficients.
    pub fn primitive_rational(&self) -> TPoly {
        if self.is_zero() {
            return TPoly::zero();
        }
        let (ints, _) = self.integer_content_form();
        TPoly::new(ints.into_iter().map(BigRational::from_integer).collect())
    }

    /// Returns integer coefficients `c_k` and a rational factor `s` with
    /// `self = s * sum c_k t^k`, gcd(c) = 1 and leading `c` positive.
    pub fn integer_content_form(&self) -> (Vec<BigInt>, BigRational) {
        if self.is_zero() {
            return (Vec::new(), BigRational::one());
        }
        let lcm = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
            .collect();
        let mut g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if ints.last().is_some_and(|c| c.is_negative()) {
            g = -g;
        }
        let ints: Vec<BigInt> = ints.iter().map(|c| c / &g).collect();
        (ints, BigRational::new(g, lcm))
    }

    pub fn eval_rational(&self, t: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * t + c)
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| {
            acc * t + rational_to_f64(c)
        })
    }

    /// Coefficients rounded to double precision, ascending degree.
    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational_to_f64).collect()
    }

    pub fn pow(&self, n: u32) -> TPoly {
        let mut acc = TPoly::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Squarefree decomposition by Yun's algorithm: pairs `(factor, multiplicity)`
    /// with monic, pairwise coprime squarefree factors.
    pub fn squarefree_decomposition(&self) -> Vec<(TPoly, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let df = f.derivative();
        let a0 = TPoly::gcd(&f, &df);
        let mut b = f.div_exact(&a0);
        let mut c = df.div_exact(&a0);
        let mut d = &c - &b.derivative();
        let mut i = 1;
        while b.degree().unwrap_or(0) > 0 {
            let a = TPoly::gcd(&b, &d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.clone(), i));
            }
            b = b.div_exact(&a);
            c = d.div_exact(&a);
            d = &c - &b.derivative();
            i += 1;
        }
        out
    }

    pub(crate) fn as_single_term(&self) -> Option<(BigRational, usize)> {
        let mut nz = self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero());
        let first = nz.next()?;
        if nz.next().is_some() {
            return None;
        }
        Some((first.1.clone(), first.0))
    }

    pub(crate) fn term_count(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }
}

impl fmt::Display for TPoly {
    /// Canonical form: descending degree, e.g. `1/3*t^2 - t + 2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            write_term(f, &mag, k, "t")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TPoly({self})")
    }
}

/// Writes `mag * var^k` for a positive rational `mag`.
pub(crate) fn write_term(
    f: &mut fmt::Formatter<'_>,
    mag: &BigRational,
    k: usize,
    var: &str,
) -> fmt::Result {
    match (mag.is_one(), k) {
        (_, 0) => write!(f, "{}", fmt_rational(mag)),
        (true, 1) => write!(f, "{var}"),
        (true, _) => write!(f, "{var}^{k}"),
        (false, 1) => write!(f, "{}*{var}", fmt_rational(mag)),
        (false, _) => write!(f, "{}*{var}^{k}", fmt_rational(mag)),
    }
}

impl Add for &TPoly {
    type Output = TPoly;
    fn add(self, rhs: &TPoly) -> TPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        TPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &TPoly {
    type Output = TPoly;
    fn sub(self, rhs: &TPoly) -> TPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        TPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &TPoly {
    type Output = TPoly;
    fn mul(self, rhs: &TPoly) -> TPoly {
        if self.is_zero() || rhs.is_zero() {
            return TPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        TPoly::new(out)
    }
}

impl Neg for &TPoly {
    type Output = TPoly;
    fn neg(self) -> TPoly {
        TPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for TPoly {
            type Output = TPoly;
            fn $m(self, rhs: TPoly) -> TPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for TPoly {
    type Output = TPoly;
    fn neg(self) -> TPoly {
        -&self
    }
}

impl From<BigRational> for TPoly {
    fn from(c: BigRational) -> Self {
        TPoly::constant(c)
    }
}

impl serde::Serialize for TPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            seq.serialize_element(&fmt_rational(c))?;
        }
        seq.end()
    }
}

impl<'de> serde::Deserialize<'de> for TPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        let coeffs = raw
            .iter()
            .map(|s| {
                super::rational::parse_rational(s)
                    .ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TPoly::new(coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn display_is_descending() {
        let p = TPoly::new(vec![q(2, 1), q(-1, 1), q(1, 3)]);
        assert_eq!(p.to_string(), "1/3*t^2 - t + 2");
        assert_eq!(TPoly::zero().to_string(), "0");
        assert_eq!((-TPoly::t()).to_string(), "-t");
    }

    #[test]
    fn div_rem_and_gcd() {
        let a = TPoly::from_ints(&[-1, 0, 1]); // t^2 - 1
        let b = TPoly::from_ints(&[-1, 1]); // t - 1
        let (qq, r) = a.div_rem(&b);
        assert_eq!(qq, TPoly::from_ints(&[1, 1]));
        assert!(r.is_zero());
        let g = TPoly::gcd(&a, &TPoly::from_ints(&[2, -2]).scale(&q(1, 7)));
        assert_eq!(g, TPoly::from_ints(&[-1, 1]));
    }

    #[test]
    fn squarefree_reports_multiplicity() {
        let p = TPoly::from_ints(&[-1, 1]).pow(2); // (t-1)^2
        let sf = p.squarefree_decomposition();
        assert_eq!(sf, vec![(TPoly::from_ints(&[-1, 1]), 2)]);
        let p = &TPoly::from_ints(&[-1, 1]).pow(3) * &TPoly::from_ints(&[2, 0, 1]);
        let sf = p.squarefree_decomposition();
        assert_eq!(sf.len(), 2);
        assert_eq!(sf[0], (TPoly::from_ints(&[2, 0, 1]), 1));
        assert_eq!(sf[1], (TPoly::from_ints(&[-1, 1]), 3));
    }

    #[test]
    fn integer_content_form_normalizes_sign() {
        let p = TPoly::new(vec![q(1, 2), q(-3, 4)]);
        let (ints, s) = p.integer_content_form();
        assert_eq!(ints, vec![BigInt::from(-2), BigInt::from(3)]);
        assert_eq!(s, q(-1, 4));
    }
}
