//! Fiberwise twisted de Rham cohomology `H^1(V, e^{g_t})` for the product
//! family `f = pr_1 : A^1 x V -> A^1`, its Gauss-Manin connection over
//! `Q(t)` and a scalar ODE obtained from a cyclic vector.
//!
//! Relative 1-forms are written `P(t, u) du`. The twisted differential of a
//! function `Q` is `∇Q = (∂_u Q + Q ∂_u g) du`, and `∂_t` acts on a form by
//! `[P du] ↦ [(∂_t P + P ∂_t g) du]`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::linalg::{kernel, vec_mat};
use crate::symbolic::{LaurentPoly, RatFun, TPoly, Var};

/// Fiber `V` of the product family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberType {
    AffineLine,
    PuncturedLine,
}

impl FiberType {
    pub fn as_str(self) -> &'static str {
        match self {
            FiberType::AffineLine => "affine_line",
            FiberType::PuncturedLine => "punctured_line",
        }
    }
}

impl std::str::FromStr for FiberType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "affine_line" => Ok(FiberType::AffineLine),
            "punctured_line" => Ok(FiberType::PuncturedLine),
            other => Err(Error::InvalidSpec(format!("unknown fiber type {other:?}"))),
        }
    }
}

/// A family `g(t, u)` on `A^1 x V`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub fiber: FiberType,
    pub g: LaurentPoly,
    pub label: String,
}

impl ProblemSpec {
    pub fn new(fiber: FiberType, g: LaurentPoly, label: impl Into<String>) -> Result<Self> {
        if !g.depends_on_u() {
            return Err(Error::InvalidSpec(
                "g must depend on u (f = t and g algebraically independent)".into(),
            ));
        }
        if fiber == FiberType::AffineLine && g.has_negative_exponents() {
            return Err(Error::InvalidSpec(
                "negative powers of u are not regular on the affine line".into(),
            ));
        }
        Ok(ProblemSpec {
            fiber,
            g,
            label: label.into(),
        })
    }

    pub fn parse(fiber: FiberType, g: &str, label: impl Into<String>) -> Result<Self> {
        Self::new(fiber, crate::symbolic::parse_laurent(g)?, label)
    }

    /// Top u-degree `d` of `g` (0 when `g` only has negative powers).
    pub fn degree_at_infinity(&self) -> usize {
        self.g.top_exponent().map_or(0, |k| k.max(0) as usize)
    }

    /// Pole order `e` of `g` at `u = 0` (0 on the affine line).
    pub fn order_at_zero(&self) -> usize {
        match self.fiber {
            FiberType::AffineLine => 0,
            FiberType::PuncturedLine => self.g.bottom_exponent().map_or(0, |k| (-k).max(0) as usize),
        }
    }

    /// Coefficient of `u^d` with `d >= 1`, if any.
    pub fn leading_at_infinity(&self) -> Option<TPoly> {
        let d = self.degree_at_infinity();
        (d >= 1).then(|| self.g.coeff(d as i64))
    }

    /// Coefficient of `u^{-e}` with `e >= 1`, if any.
    pub fn leading_at_zero(&self) -> Option<TPoly> {
        let e = self.order_at_zero();
        (e >= 1).then(|| self.g.coeff(-(e as i64)))
    }
}

/// Monomial basis `ω_i = u^{e_i} du` of the fiber cohomology.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyBasis {
    pub rank: usize,
    pub exponents: Vec<i64>,
}

impl CohomologyBasis {
    pub fn index_of(&self, exponent: i64) -> Option<usize> {
        self.exponents.iter().position(|&e| e == exponent)
    }

    fn window(&self) -> Option<(i64, i64)> {
        Some((*self.exponents.first()?, *self.exponents.last()?))
    }

    /// Human-readable names of the basis forms, e.g. `du/u`, `u*du`.
    pub fn form_names(&self) -> Vec<String> {
        self.exponents
            .iter()
            .map(|&e| match e {
                0 => "du".to_string(),
                1 => "u*du".to_string(),
                -1 => "du/u".to_string(),
                _ => format!("u^{e}*du"),
            })
            .collect()
    }
}

pub fn fiber_basis(spec: &ProblemSpec) -> Result<CohomologyBasis> {
    let d = spec.degree_at_infinity() as i64;
    let e = spec.order_at_zero() as i64;
    if d == 0 && e == 0 {
        return Err(Error::DegenerateFamily("g is constant in u".into()));
    }
    let (lo, hi) = match spec.fiber {
        FiberType::AffineLine => (0, d - 2),
        FiberType::PuncturedLine if e == 0 => (-1, d - 2),
        FiberType::PuncturedLine => (-e, d - 1),
    };
    let exponents: Vec<i64> = (lo..=hi).collect();
    Ok(CohomologyBasis {
        rank: exponents.len(),
        exponents,
    })
}

type RatLaurent = BTreeMap<i64, RatFun>;

fn to_rat_laurent(p: &LaurentPoly) -> RatLaurent {
    p.terms()
        .iter()
        .map(|(&k, c)| (k, RatFun::from_poly(c.clone())))
        .collect()
}

fn add_scaled(acc: &mut RatLaurent, other: &RatLaurent, factor: &RatFun) {
    for (&k, c) in other {
        let delta = factor * c;
        let entry = acc.entry(k).or_insert_with(RatFun::zero);
        *entry = &*entry + &delta;
        if entry.is_zero() {
            acc.remove(&k);
        }
    }
}

/// `∇(u^k) = (k u^{k-1} + u^k ∂_u g) du`.
fn nabla_monomial(k: i64, dg: &RatLaurent) -> RatLaurent {
    let mut out = RatLaurent::new();
    if k != 0 {
        out.insert(k - 1, RatFun::from_int(k));
    }
    add_scaled(&mut out, &dg.iter().map(|(&j, c)| (j + k, c.clone())).collect(), &RatFun::one());
    out
}

/// Coordinates of `[P du]` in the basis `ω_i = u^{e_i} du`.
pub fn reduce_form(p: &LaurentPoly, spec: &ProblemSpec, basis: &CohomologyBasis) -> Result<Vec<RatFun>> {
    reduce_rat_form(to_rat_laurent(p), spec, basis)
}

fn reduce_rat_form(mut p: RatLaurent, spec: &ProblemSpec, basis: &CohomologyBasis) -> Result<Vec<RatFun>> {
    if spec.fiber == FiberType::AffineLine && p.keys().next().is_some_and(|&k| k < 0) {
        return Err(Error::InvalidSpec("form has a pole at u = 0 on the affine line".into()));
    }
    let dg = to_rat_laurent(&spec.g.partial(Var::U));
    let d = spec.degree_at_infinity() as i64;
    let e = spec.order_at_zero() as i64;
    // Rank zero (affine line, d = 1): top-degree descent clears every term.
    let (lo, hi) = basis.window().unwrap_or((i64::MIN, i64::MIN));

    let budget = 10_000;
    let mut steps = 0;
    while let Some((m, c)) = p.iter().next_back().map(|(&m, c)| (m, c.clone())) {
        if m <= hi {
            break;
        }
        let k = if d >= 1 { m - d + 1 } else { m + 1 };
        kill_term(&mut p, m, c, k, &dg, true)?;
        steps += 1;
        if steps > budget {
            return Err(Error::ReductionDiverges(format!("top degree stuck at {m}")));
        }
    }
    while let Some((m, c)) = p.iter().next().map(|(&m, c)| (m, c.clone())) {
        if m >= lo {
            break;
        }
        let k = if e >= 1 { m + e + 1 } else { m + 1 };
        kill_term(&mut p, m, c, k, &dg, false)?;
        steps += 1;
        if steps > budget {
            return Err(Error::ReductionDiverges(format!("bottom degree stuck at {m}")));
        }
    }
    Ok(basis
        .exponents
        .iter()
        .map(|ex| p.get(ex).cloned().unwrap_or_else(RatFun::zero))
        .collect())
}

/// Subtracts `(c / lead) ∇(u^k)` where `lead` is the coefficient of `u^m` in
/// `∇(u^k)`; `top` selects whether `m` must be its top or bottom exponent.
fn kill_term(p: &mut RatLaurent, m: i64, c: RatFun, k: i64, dg: &RatLaurent, top: bool) -> Result<()> {
    let nab = nabla_monomial(k, dg);
    let extreme = if top {
        nab.keys().next_back()
    } else {
        nab.keys().next()
    };
    if extreme != Some(&m) {
        return Err(Error::ReductionDiverges(format!(
            "∇(u^{k}) does not have u^{m} as its {} term",
            if top { "top" } else { "bottom" }
        )));
    }
    let factor = -(&c / &nab[&m]);
    add_scaled(p, &nab, &factor);
    debug_assert!(!p.contains_key(&m));
    Ok(())
}

/// Twisted differential `∇Q = ∂_u Q + Q ∂_u g` (the coefficient of `du`).
pub fn twisted_differential(q: &LaurentPoly, spec: &ProblemSpec) -> LaurentPoly {
    &q.partial(Var::U) + &(q * &spec.g.partial(Var::U))
}

/// `∂_t` acting on the relative form `P du`.
pub fn gauss_manin_derivative(p: &LaurentPoly, spec: &ProblemSpec) -> LaurentPoly {
    &p.partial(Var::T) + &(p * &spec.g.partial(Var::T))
}

/// Matrix of `∂_t` on the fiber cohomology.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionMatrix {
    pub a: Vec<Vec<RatFun>>,
    pub convention: String,
}

pub const CONNECTION_CONVENTION: &str =
    "Y'(t) = A(t) Y(t) with Y_i(t) = ∫_c ω_i e^{g_t}; A_ij = coefficient of [ω_j] in ∂_t[ω_i]";

impl ConnectionMatrix {
    pub fn rank(&self) -> usize {
        self.a.len()
    }

    /// Numerical value at `t`; refuses poles.
    pub fn eval(&self, t: Complex64) -> Result<DMatrix<Complex64>> {
        let r = self.rank();
        let mut m = DMatrix::zeros(r, r);
        for i in 0..r {
            for j in 0..r {
                m[(i, j)] = self.a[i][j].eval(t)?;
            }
        }
        Ok(m)
    }

    /// Monic denominators of all entries that are not polynomials.
    pub fn denominators(&self) -> Vec<TPoly> {
        let mut out: Vec<TPoly> = Vec::new();
        for x in self.a.iter().flatten() {
            if !x.is_polynomial() && !out.contains(x.den()) {
                out.push(x.den().clone());
            }
        }
        out
    }

    pub fn entry_strings(&self) -> Vec<Vec<String>> {
        self.a
            .iter()
            .map(|row| row.iter().map(ToString::to_string).collect())
            .collect()
    }
}

pub fn connection_matrix(spec: &ProblemSpec, basis: &CohomologyBasis) -> Result<ConnectionMatrix> {
    let a = basis
        .exponents
        .iter()
        .map(|&e| {
            let form = LaurentPoly::monomial(TPoly::one(), e);
            reduce_form(&gauss_manin_derivative(&form, spec), spec, basis)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConnectionMatrix {
        a,
        convention: CONNECTION_CONVENTION.to_string(),
    })
}

/// `Σ_j p_j(t) (d/dt)^j y = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalarOde {
    pub order: usize,
    /// `p_0, ..., p_order`.
    pub coefficients: Vec<TPoly>,
}

impl fmt::Display for ScalarOde {
    /// E.g. `t*y'' + y' + t*y`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coefficients.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let y = match j {
                0 => "y".to_string(),
                1..=3 => format!("y{}", "'".repeat(j)),
                _ => format!("y^({j})"),
            };
            let (neg, body) = match c.as_single_term() {
                Some((q, k)) => {
                    let mag = TPoly::monomial(q.abs(), k);
                    let body = if mag.is_one() {
                        y
                    } else {
                        format!("{mag}*{y}")
                    };
                    (q.is_negative(), body)
                }
                None => (false, format!("({c})*{y}")),
            };
            match (first, neg) {
                (true, true) => write!(f, "-{body}")?,
                (true, false) => write!(f, "{body}")?,
                (false, true) => write!(f, " - {body}")?,
                (false, false) => write!(f, " + {body}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Successive derivatives of `Y_start` written in the basis: `v_0 = e_start`,
/// `v_{k+1} = v_k' + v_k A`, so that `(d/dt)^k Y_start = v_k · Y`.
pub fn derivative_rows(a: &ConnectionMatrix, start: usize, count: usize) -> Vec<Vec<RatFun>> {
    let r = a.rank();
    let mut rows = Vec::with_capacity(count);
    let mut v: Vec<RatFun> = (0..r)
        .map(|i| if i == start { RatFun::one() } else { RatFun::zero() })
        .collect();
    for _ in 0..count {
        let next: Vec<RatFun> = v
            .iter()
            .map(RatFun::derivative)
            .zip(vec_mat(&v, &a.a))
            .map(|(x, y)| &x + &y)
            .collect();
        rows.push(std::mem::replace(&mut v, next));
    }
    rows
}

pub fn cyclic_ode(a: &ConnectionMatrix, start: usize) -> Result<ScalarOde> {
    let r = a.rank();
    if r == 0 {
        return Ok(ScalarOde {
            order: 0,
            coefficients: vec![TPoly::one()],
        });
    }
    if start >= r {
        return Err(Error::IndexOutOfRange { index: start, len: r });
    }
    let rows = derivative_rows(a, start, r + 1);
    for m in 1..=r {
        // Columns v_0..v_m; look for c with Σ c_j v_j = 0.
        let mat: Vec<Vec<RatFun>> = (0..r)
            .map(|i| (0..=m).map(|j| rows[j][i].clone()).collect())
            .collect();
        let ker = kernel(&mat, m + 1);
        if let Some(c) = ker.into_iter().next() {
            return Ok(normalize_ode(c));
        }
    }
    unreachable!("r + 1 vectors in an r-dimensional space are dependent")
}

/// Clears denominators and removes the rational content; the top
/// coefficient ends up with a positive leading coefficient.
fn normalize_ode(c: Vec<RatFun>) -> ScalarOde {
    let top = c.last().expect("nonempty").clone();
    let c: Vec<RatFun> = c.iter().map(|x| x / &top).collect();
    let mut lcm = TPoly::one();
    for x in &c {
        let g = TPoly::gcd(&lcm, x.den());
        lcm = (&lcm * x.den()).div_exact(&g);
    }
    let polys: Vec<TPoly> = c
        .iter()
        .map(|x| (&(x.num() * &lcm)).div_exact(x.den()))
        .collect();
    let den_lcm = polys
        .iter()
        .flat_map(|p| p.coeffs().iter())
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let scaled: Vec<TPoly> = polys
        .iter()
        .map(|p| p.scale(&BigRational::from_integer(den_lcm.clone())))
        .collect();
    let mut g = scaled
        .iter()
        .flat_map(|p| p.coeffs().iter())
        .fold(BigInt::zero(), |acc, q| acc.gcd(q.numer()));
    if scaled.last().expect("nonempty").leading().is_negative() {
        g = -g;
    }
    let inv = BigRational::new(BigInt::one(), g);
    let coefficients: Vec<TPoly> = scaled.iter().map(|p| p.scale(&inv)).collect();
    ScalarOde {
        order: coefficients.len() - 1,
        coefficients,
    }
}

/// Substitutes `Y' = A Y` into the operator; returns the resulting row
/// vector, identically zero iff the ODE annihilates `Y_start`.
pub fn ode_residual(a: &ConnectionMatrix, start: usize, ode: &ScalarOde) -> Vec<RatFun> {
    let r = a.rank();
    let rows = derivative_rows(a, start, ode.order + 1);
    (0..r)
        .map(|i| {
            ode.coefficients.iter().zip(&rows).fold(RatFun::zero(), |acc, (p, v)| {
                &acc + &(&RatFun::from_poly(p.clone()) * &v[i])
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{parse_laurent, rat};

    fn airy() -> ProblemSpec {
        ProblemSpec::parse(FiberType::AffineLine, "u^3/3 - t*u", "airy").unwrap()
    }
    fn bessel() -> ProblemSpec {
        ProblemSpec::parse(FiberType::PuncturedLine, "(t/2)*(u - u^-1)", "bessel").unwrap()
    }
    fn gaussian() -> ProblemSpec {
        ProblemSpec::parse(FiberType::AffineLine, "-t*u^2", "gaussian").unwrap()
    }
    fn linear() -> ProblemSpec {
        ProblemSpec::parse(FiberType::AffineLine, "t*u", "linear").unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(ProblemSpec::parse(FiberType::AffineLine, "t^2 + 1", "x").is_err());
        assert!(ProblemSpec::parse(FiberType::AffineLine, "u^-1", "x").is_err());
        assert!(ProblemSpec::parse(FiberType::PuncturedLine, "u^-1", "x").is_ok());
    }

    #[test]
    fn basis_examples() {
        let b = fiber_basis(&airy()).unwrap();
        assert_eq!((b.rank, b.exponents.clone()), (2, vec![0, 1]));
        assert_eq!(fiber_basis(&linear()).unwrap().rank, 0);
        let b = fiber_basis(&bessel()).unwrap();
        assert_eq!((b.rank, b.exponents.clone()), (2, vec![-1, 0]));
        assert_eq!(b.form_names(), vec!["du/u", "du"]);
    }

    #[test]
    fn basis_edge_windows_on_punctured_line() {
        // No pole at 0: forms du/u, du, ..., u^{d-2} du.
        let s = ProblemSpec::parse(FiberType::PuncturedLine, "t*u^2 + u", "x").unwrap();
        assert_eq!(fiber_basis(&s).unwrap().exponents, vec![-1, 0]);
        // Only a pole at 0.
        let s = ProblemSpec::parse(FiberType::PuncturedLine, "t*u^-2", "x").unwrap();
        assert_eq!(fiber_basis(&s).unwrap().exponents, vec![-2, -1]);
        // Reduction works in both windows.
        for s in [
            ProblemSpec::parse(FiberType::PuncturedLine, "t*u^2 + u", "x").unwrap(),
            ProblemSpec::parse(FiberType::PuncturedLine, "t*u^-2", "x").unwrap(),
        ] {
            let b = fiber_basis(&s).unwrap();
            let q = parse_laurent("u^3 - 2*u^-3 + t").unwrap();
            let exact = twisted_differential(&q, &s);
            assert!(reduce_form(&exact, &s, &b).unwrap().iter().all(RatFun::is_zero));
        }
    }

    #[test]
    fn reduce_examples() {
        let s = airy();
        let b = fiber_basis(&s).unwrap();
        let c = reduce_form(&parse_laurent("u^2").unwrap(), &s, &b).unwrap();
        assert_eq!(c, vec![RatFun::t(), RatFun::zero()]);

        let s = bessel();
        let b = fiber_basis(&s).unwrap();
        let c = reduce_form(&parse_laurent("u^-2").unwrap(), &s, &b).unwrap();
        assert_eq!(c, vec![RatFun::zero(), RatFun::from_int(-1)]);

        for (i, &e) in b.exponents.iter().enumerate() {
            let c = reduce_form(&LaurentPoly::monomial(TPoly::one(), e), &s, &b).unwrap();
            for (j, x) in c.iter().enumerate() {
                assert_eq!(x.is_one(), i == j);
                assert!(i == j || x.is_zero());
            }
        }
    }

    #[test]
    fn connection_examples() {
        let s = airy();
        let a = connection_matrix(&s, &fiber_basis(&s).unwrap()).unwrap();
        assert_eq!(
            a.a,
            vec![vec![RatFun::zero(), RatFun::from_int(-1)], vec![-RatFun::t(), RatFun::zero()]]
        );

        let s = gaussian();
        let a = connection_matrix(&s, &fiber_basis(&s).unwrap()).unwrap();
        let expected = RatFun::new(TPoly::from_int(-1), TPoly::from_ints(&[0, 2])).unwrap();
        assert_eq!(a.a, vec![vec![expected]]);
        assert_eq!(a.entry_strings(), vec![vec!["-1/(2*t)".to_string()]]);

        let s = bessel();
        let a = connection_matrix(&s, &fiber_basis(&s).unwrap()).unwrap();
        let minus_inv_t = -RatFun::t().inv().unwrap();
        assert_eq!(
            a.a,
            vec![vec![RatFun::zero(), RatFun::one()], vec![RatFun::from_int(-1), minus_inv_t]]
        );
    }

    #[test]
    fn cyclic_ode_examples() {
        let s = airy();
        let a = connection_matrix(&s, &fiber_basis(&s).unwrap()).unwrap();
        let ode = cyclic_ode(&a, 0).unwrap();
        assert_eq!(ode.coefficients, vec![-TPoly::t(), TPoly::zero(), TPoly::one()]);
        assert_eq!(ode.to_string(), "y'' - t*y");

        let s = bessel();
        let a = connection_matrix(&s, &fiber_basis(&s).unwrap()).unwrap();
        let ode = cyclic_ode(&a, 0).unwrap();
        assert_eq!(ode.coefficients, vec![TPoly::t(), TPoly::one(), TPoly::t()]);
        assert_eq!(ode.to_string(), "t*y'' + y' + t*y");
        assert!(ode_residual(&a, 0, &ode).iter().all(RatFun::is_zero));

        let s = linear();
        let a = connection_matrix(&s, &fiber_basis(&s).unwrap()).unwrap();
        let ode = cyclic_ode(&a, 0).unwrap();
        assert_eq!((ode.order, ode.to_string()), (0, "y".to_string()));

        let s = gaussian();
        let a = connection_matrix(&s, &fiber_basis(&s).unwrap()).unwrap();
        let ode = cyclic_ode(&a, 0).unwrap();
        // y' = -y/(2t)  ->  2t y' + y = 0
        assert_eq!(ode.coefficients, vec![TPoly::one(), TPoly::from_ints(&[0, 2])]);
    }

    #[test]
    fn basis_change_covariance() {
        // ω~ = T ω with a constant rational T; then Ã = T A T^{-1}.
        use crate::symbolic::linalg::{inverse, mat_mul};
        let s = bessel();
        let b = fiber_basis(&s).unwrap();
        let a = connection_matrix(&s, &b).unwrap();
        let t_mat = vec![
            vec![RatFun::constant(rat(2, 1)), RatFun::constant(rat(1, 3))],
            vec![RatFun::constant(rat(-1, 1)), RatFun::constant(rat(5, 7))],
        ];
        let forms: Vec<LaurentPoly> = t_mat
            .iter()
            .map(|row| {
                row.iter().zip(&b.exponents).fold(LaurentPoly::zero(), |acc, (c, &e)| {
                    &acc + &LaurentPoly::monomial(TPoly::one(), e).scale(&c.num().leading())
                })
            })
            .collect();
        // Row i of (T A) from direct reduction; then express in ω~ via T^{-1}.
        let direct: Vec<Vec<RatFun>> = forms
            .iter()
            .map(|w| reduce_form(&gauss_manin_derivative(w, &s), &s, &b).unwrap())
            .collect();
        let t_inv = inverse(&t_mat).unwrap();
        let a_tilde_direct = mat_mul(&direct, &t_inv);
        let a_tilde = mat_mul(&mat_mul(&t_mat, &a.a), &t_inv);
        assert_eq!(a_tilde_direct, a_tilde);
    }
}
