//! Laurent polynomials in `u` whose coefficients are polynomials in `t`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::tpoly::{write_term, TPoly};

/// Element of `Q[t][u, 1/u]`. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct LaurentPoly {
    terms: BTreeMap<i64, TPoly>,
}

/// Variable selector for [`LaurentPoly::partial`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    U,
    T,
}

/// Arithmetic selector for [`poly_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

pub fn poly_arith(a: &LaurentPoly, b: &LaurentPoly, op: ArithOp) -> LaurentPoly {
    match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
    }
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_tpoly(TPoly::one())
    }

    pub fn from_tpoly(p: TPoly) -> Self {
        Self::monomial(p, 0)
    }

    /// `c(t) * u^k`
    pub fn monomial(c: TPoly, k: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(k, c);
        }
        LaurentPoly { terms }
    }

    pub fn u() -> Self {
        Self::monomial(TPoly::one(), 1)
    }

    pub fn t() -> Self {
        Self::from_tpoly(TPoly::t())
    }

    pub fn from_terms(iter: impl IntoIterator<Item = (i64, TPoly)>) -> Self {
        let mut out = LaurentPoly::zero();
        for (k, c) in iter {
            out.add_term(k, &c);
        }
        out
    }

    pub fn terms(&self) -> &BTreeMap<i64, TPoly> {
        &self.terms
    }

    pub fn coeff(&self, k: i64) -> TPoly {
        self.terms.get(&k).cloned().unwrap_or_else(TPoly::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest u-exponent present.
    pub fn top_exponent(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Lowest u-exponent present.
    pub fn bottom_exponent(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    /// Largest t-degree over all coefficients.
    pub fn t_degree(&self) -> usize {
        self.terms
            .values()
            .filter_map(TPoly::degree)
            .max()
            .unwrap_or(0)
    }

    pub fn add_term(&mut self, k: i64, c: &TPoly) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(k).or_insert_with(TPoly::zero);
        *entry = &*entry + c;
        if entry.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        LaurentPoly::from_terms(self.terms.iter().map(|(&k, p)| (k, p.scale(c))))
    }

    pub fn scale_poly(&self, c: &TPoly) -> Self {
        LaurentPoly::from_terms(self.terms.iter().map(|(&k, p)| (k, p * c)))
    }

    /// Multiply by `u^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(&e, p)| (e + k, p.clone())).collect(),
        }
    }

    /// Exact formal partial derivative.
    pub fn partial(&self, var: Var) -> Self {
        match var {
            Var::U => LaurentPoly::from_terms(self.terms.iter().map(|(&k, p)| {
                (k - 1, p.scale(&BigRational::from_integer(k.into())))
            })),
            Var::T => LaurentPoly::from_terms(self.terms.iter().map(|(&k, p)| (k, p.derivative()))),
        }
    }

    /// Coefficients in u after substituting a numeric `t`.
    pub fn specialize(&self, t: Complex64) -> Vec<(i64, Complex64)> {
        self.terms.iter().map(|(&k, p)| (k, p.eval(t))).collect()
    }

    pub fn eval(&self, t: Complex64, u: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&k, p)| p.eval(t) * u.powi(k as i32))
            .sum()
    }

    pub fn has_negative_exponents(&self) -> bool {
        self.bottom_exponent().is_some_and(|k| k < 0)
    }

    pub fn depends_on_u(&self) -> bool {
        self.terms.keys().any(|&k| k != 0)
    }
}

impl fmt::Display for LaurentPoly {
    /// Canonical form: u-exponents descending, each coefficient printed with
    /// descending t-degrees; multi-term coefficients are parenthesized.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&k, c) in self.terms.iter().rev() {
            let u_part = match k {
                0 => String::new(),
                1 => "u".to_string(),
                _ => format!("u^{k}"),
            };
            if let Some((q, j)) = c.as_single_term() {
                let neg = q.is_negative();
                if first {
                    if neg {
                        write!(f, "-")?;
                    }
                } else {
                    write!(f, " {} ", if neg { '-' } else { '+' })?;
                }
                let mag = q.abs();
                if u_part.is_empty() {
                    write_term(f, &mag, j, "t")?;
                } else if j == 0 && mag == BigRational::from_integer(1.into()) {
                    write!(f, "{u_part}")?;
                } else {
                    write_term(f, &mag, j, "t")?;
                    write!(f, "*{u_part}")?;
                }
            } else {
                if !first {
                    write!(f, " + ")?;
                }
                if u_part.is_empty() {
                    write!(f, "({c})")?;
                } else {
                    write!(f, "({c})*{u_part}")?;
                }
            }
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({self})")
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (&k, c) in &rhs.terms {
            out.add_term(k, c);
        }
        out
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (&k, c) in &rhs.terms {
            out.add_term(k, &-c);
        }
        out
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (&a, p) in &self.terms {
            for (&b, q) in &rhs.terms {
                out.add_term(a + b, &(p * q));
            }
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.iter().map(|(&k, p)| (k, -p)).collect(),
        }
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Zero for LaurentPoly {
    fn zero() -> Self {
        LaurentPoly::zero()
    }
    fn is_zero(&self) -> bool {
        LaurentPoly::is_zero(self)
    }
}
