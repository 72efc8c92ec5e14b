//! Recursive-descent parser for polynomial expressions in `t` and `u`.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr    := ['+'|'-'] term (('+'|'-') term)*
//! term    := factor (('*'|'/') factor | factor)*      -- juxtaposition multiplies
//! factor  := ['-'] primary ['^' ['-'] integer]
//! primary := integer | 't' | 'u' | '(' expr ')'
//! ```
//!
//! Division is only allowed by a nonzero monomial `c*u^k` (constant in `t`);
//! negative powers only of such monomials.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::laurent::LaurentPoly;
use super::tpoly::TPoly;
use crate::error::{Error, Result};

pub fn parse_laurent(input: &str) -> Result<LaurentPoly> {
    let mut p = Parser {
        src: input.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.peek().is_none() {
        return Err(Error::parse(0, "empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if let Some(c) = p.peek() {
        return Err(Error::parse(p.pos, format!("unexpected character {:?}", c as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<LaurentPoly> {
        self.skip_ws();
        let mut acc = if self.eat(b'-') {
            -self.term()?
        } else {
            self.eat(b'+');
            self.term()?
        };
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<LaurentPoly> {
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            if self.eat(b'*') {
                acc = &acc * &self.factor()?;
            } else if self.eat(b'/') {
                let at = self.pos;
                let d = self.factor()?;
                acc = &acc * &invert_monomial(&d).ok_or_else(|| {
                    Error::parse(at, "can only divide by a nonzero constant or power of u")
                })?;
            } else if matches!(self.peek(), Some(b'(' | b't' | b'u' | b'0'..=b'9')) {
                acc = &acc * &self.factor()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<LaurentPoly> {
        self.skip_ws();
        if self.eat(b'-') {
            return Ok(-self.factor()?);
        }
        let base = self.primary()?;
        if self.eat(b'^') {
            self.skip_ws();
            let neg = self.eat(b'-');
            self.skip_ws();
            let at = self.pos;
            let n = self.integer()?;
            let n: u32 = n
                .try_into()
                .map_err(|_| Error::parse(at, "exponent too large"))?;
            let pos = pow(&base, n);
            if neg {
                return invert_monomial(&pos).ok_or_else(|| {
                    Error::parse(at, "negative powers only of nonzero constants or u")
                });
            }
            return Ok(pos);
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<LaurentPoly> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(Error::parse(self.pos, "expected ')'"));
                }
                Ok(e)
            }
            Some(b't') => {
                self.pos += 1;
                Ok(LaurentPoly::t())
            }
            Some(b'u') => {
                self.pos += 1;
                Ok(LaurentPoly::u())
            }
            Some(b'0'..=b'9') => {
                let n = self.integer()?;
                Ok(LaurentPoly::from_tpoly(TPoly::constant(
                    BigRational::from_integer(n),
                )))
            }
            Some(c) => Err(Error::parse(self.pos, format!("unexpected character {:?}", c as char))),
            None => Err(Error::parse(self.pos, "unexpected end of input")),
        }
    }

    fn integer(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::parse(start, "expected integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digits parse"))
    }
}

fn pow(base: &LaurentPoly, n: u32) -> LaurentPoly {
    let mut acc = LaurentPoly::one();
    for _ in 0..n {
        acc = &acc * base;
    }
    acc
}

/// Inverse of `c * u^k` with `c` a nonzero rational constant.
fn invert_monomial(p: &LaurentPoly) -> Option<LaurentPoly> {
    let mut it = p.terms().iter();
    let (&k, c) = it.next()?;
    if it.next().is_some() || !c.is_constant() {
        return None;
    }
    let c = c.leading();
    if c.is_zero() {
        return None;
    }
    let inv = if c.is_one() { c } else { c.recip() };
    Some(LaurentPoly::monomial(TPoly::constant(inv), -k))
}
