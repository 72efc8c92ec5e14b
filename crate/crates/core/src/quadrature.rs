//! Periods `∫_c P(u) e^{g_t(u)} du` by globally adaptive nested
//! Clenshaw-Curtis quadrature (16/32 points) along cycle polylines.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cohomology::{CohomologyBasis, ProblemSpec};
use crate::cycles::{EndTag, RapidDecayCycle};
use crate::error::{Error, Result};
use crate::precision::{cabs, cexp, from_c64, to_c64, DoubleDouble, Real};
use crate::symbolic::{LaurentPoly, TPoly};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    Double,
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    /// Relative tolerance.
    pub tol: f64,
    pub abs_floor: f64,
    pub max_intervals: usize,
    pub precision: Precision,
}

impl QuadratureOptions {
    pub fn new(tol: f64) -> Self {
        QuadratureOptions {
            tol,
            abs_floor: 0.0,
            max_intervals: 40_000,
            precision: Precision::Double,
        }
    }

    pub fn extended(tol: f64) -> Self {
        QuadratureOptions {
            precision: Precision::Extended,
            ..Self::new(tol)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodValue {
    pub value: Complex64,
    pub error_estimate: f64,
    pub truncation_bound: f64,
}

impl PeriodValue {
    pub fn total_error(&self) -> f64 {
        self.error_estimate + self.truncation_bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodMatrix {
    pub t: Complex64,
    /// `entries[i][j] = ∫_{c_i} ω_j e^{g_t}`.
    pub entries: Vec<Vec<PeriodValue>>,
}

impl PeriodMatrix {
    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn values(&self) -> DMatrix<Complex64> {
        let r = self.rank();
        DMatrix::from_fn(r, r, |i, j| self.entries[i][j].value)
    }

    pub fn max_error(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(PeriodValue::total_error)
            .fold(0.0, f64::max)
    }
}

/// A quadrature result before tolerance bookkeeping.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    /// `∫ |f| |du|`, the roundoff scale.
    pub magnitude: f64,
}

const N: usize = 32;

struct Rule<R> {
    x: Vec<R>,
    w32: Vec<R>,
    w16: Vec<R>,
}

fn cc_weights<R: Real>(n: usize) -> Vec<R> {
    let nf = R::from_f64(n as f64);
    (0..=n)
        .map(|k| {
            let mut s = R::one();
            for j in 1..=n / 2 {
                let b = if j == n / 2 { R::one() } else { R::from_f64(2.0) };
                let (_, c) = (R::pi() * R::from_f64((2 * j * k) as f64) / nf).sin_cos();
                s = s - b * c / R::from_f64((4 * j * j - 1) as f64);
            }
            let c = if k == 0 || k == n { R::one() } else { R::from_f64(2.0) };
            c * s / nf
        })
        .collect()
}

impl<R: Real> Rule<R> {
    fn new() -> Self {
        let x = (0..=N)
            .map(|k| (R::pi() * R::from_f64(k as f64) / R::from_f64(N as f64)).sin_cos().1)
            .collect();
        Rule {
            x,
            w32: cc_weights(N),
            w16: cc_weights(N / 2),
        }
    }
}

struct Piece<R> {
    a: Complex<R>,
    b: Complex<R>,
    value: Complex<R>,
    err: f64,
    mag: f64,
}

struct Keyed(f64, usize);

impl PartialEq for Keyed {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Keyed {}
impl PartialOrd for Keyed {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Keyed {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0).then(o.1.cmp(&self.1))
    }
}

fn apply<R: Real, F>(rule: &Rule<R>, f: &F, a: Complex<R>, b: Complex<R>, arc: bool) -> Piece<R>
where
    F: Fn(Complex<R>) -> Complex<R>,
{
    let half = R::one() / R::from_f64(2.0);
    let mid = (a + b) * half;
    let h = (b - a) * half;
    let hs = if arc {
        Complex::new((h.re * h.re + h.im * h.im).sqrt(), R::zero())
    } else {
        h
    };
    let mut fine = Complex::new(R::zero(), R::zero());
    let mut coarse = Complex::new(R::zero(), R::zero());
    let mut mag = 0.0;
    for k in 0..=N {
        let fk = f(mid + h * rule.x[k]);
        fine = fine + fk * rule.w32[k];
        mag += rule.w32[k].to_f64() * cabs(fk);
        if k % 2 == 0 {
            coarse = coarse + fk * rule.w16[k / 2];
        }
    }
    let value = fine * hs;
    let err = cabs((fine - coarse) * hs);
    let err = if err.is_finite() { err } else { f64::INFINITY };
    Piece {
        a,
        b,
        value,
        err,
        mag: mag * cabs(h),
    }
}

/// Integrates `f` along the polyline `nodes`; with `arc` the measure is
/// `|du|` instead of `du`.
pub fn integrate_polyline<R: Real, F>(nodes: &[Complex64], f: F, arc: bool, opts: &QuadratureOptions) -> Result<Integral>
where
    F: Fn(Complex<R>) -> Complex<R>,
{
    let rule = Rule::<R>::new();
    let mut pieces: Vec<Piece<R>> = nodes
        .windows(2)
        .filter(|w| w[0] != w[1])
        .map(|w| apply(&rule, &f, from_c64(w[0]), from_c64(w[1]), arc))
        .collect();
    let mut heap: BinaryHeap<Keyed> = pieces.iter().enumerate().map(|(i, p)| Keyed(p.err, i)).collect();
    let half = R::one() / R::from_f64(2.0);
    let mut live = pieces.len();
    loop {
        let mut value = Complex::new(R::zero(), R::zero());
        let mut err = 0.0;
        let mut mag = 0.0;
        for k in &heap {
            let p = &pieces[k.1];
            value = value + p.value;
            err += p.err;
            mag += p.mag;
        }
        let floor = opts.abs_floor.max(64.0 * R::EPSILON * mag);
        let target = opts.tol * cabs(value) + floor;
        if err <= target {
            return Ok(Integral {
                value: to_c64(value),
                error: err,
                magnitude: mag,
            });
        }
        if live >= opts.max_intervals || !err.is_finite() {
            return Err(Error::ToleranceNotMet {
                achieved: err,
                target,
            });
        }
        // Refine a batch of the worst pieces before re-summing.
        let batch = (live / 8).max(1);
        for _ in 0..batch {
            let Some(Keyed(e, i)) = heap.pop() else { break };
            if e <= 0.0 {
                heap.push(Keyed(e, i));
                break;
            }
            let (a, b) = (pieces[i].a, pieces[i].b);
            let m = (a + b) * half;
            let left = apply(&rule, &f, a, m, arc);
            let right = apply(&rule, &f, m, b, arc);
            heap.push(Keyed(left.err, pieces.len()));
            pieces.push(left);
            heap.push(Keyed(right.err, pieces.len()));
            pieces.push(right);
            live += 1;
        }
    }
}

/// Laurent polynomial in `u` with numeric coefficients, stored densely.
struct Dense<R> {
    low: i64,
    coeffs: Vec<Complex<R>>,
}

fn tpoly_at<R: Real>(p: &TPoly, t: Complex<R>) -> Complex<R> {
    p.coeffs()
        .iter()
        .rev()
        .fold(Complex::new(R::zero(), R::zero()), |acc, c| {
            acc * t + Complex::new(R::from_rational(c), R::zero())
        })
}

fn cpow<R: Real>(u: Complex<R>, k: i64) -> Complex<R> {
    let base = if k < 0 {
        Complex::new(R::one(), R::zero()) / u
    } else {
        u
    };
    let mut n = k.unsigned_abs();
    let mut acc = Complex::new(R::one(), R::zero());
    let mut b = base;
    while n > 0 {
        if n & 1 == 1 {
            acc = acc * b;
        }
        b = b * b;
        n >>= 1;
    }
    acc
}

impl<R: Real> Dense<R> {
    fn new(p: &LaurentPoly, t: Complex64) -> Self {
        let t = from_c64::<R>(t);
        let (Some(low), Some(top)) = (p.bottom_exponent(), p.top_exponent()) else {
            return Dense {
                low: 0,
                coeffs: Vec::new(),
            };
        };
        let mut coeffs = vec![Complex::new(R::zero(), R::zero()); (top - low + 1) as usize];
        for (&k, c) in p.terms() {
            coeffs[(k - low) as usize] = tpoly_at(c, t);
        }
        Dense { low, coeffs }
    }

    fn eval(&self, u: Complex<R>) -> Complex<R> {
        let h = self
            .coeffs
            .iter()
            .rev()
            .fold(Complex::new(R::zero(), R::zero()), |acc, &c| acc * u + c);
        if self.low == 0 {
            h
        } else {
            h * cpow(u, self.low)
        }
    }
}

/// Bound on `∫ |P e^g| |du|` beyond a valley-tagged terminal node.
fn tail_bound(spec: &ProblemSpec, form: &LaurentPoly, t: Complex64, u: Complex64, tag: EndTag) -> Result<f64> {
    let g = spec.g.eval(t, u);
    if g.re >= 0.0 {
        return Err(Error::NonDecayingTail { re_g: g.re });
    }
    let f = (form.eval(t, u) * g.exp()).norm();
    let r = u.norm();
    let (lc, deg, slack) = match tag {
        EndTag::ValleyInfinity(_) => (
            spec.leading_at_infinity(),
            spec.degree_at_infinity(),
            form.top_exponent().unwrap_or(0).max(0) as f64 + 1.0,
        ),
        EndTag::ValleyZero(_) => (
            spec.leading_at_zero(),
            spec.order_at_zero(),
            (-form.bottom_exponent().unwrap_or(0)).max(0) as f64 + 1.0,
        ),
        EndTag::Interior => return Ok(0.0),
    };
    let lc = lc.map_or(0.0, |p| p.eval(t).norm());
    let n = deg as f64;
    let rate = match tag {
        EndTag::ValleyZero(_) => n * lc * r.powf(-n) / 2.0,
        _ => n * lc * r.powf(n) / 2.0,
    } - slack;
    if rate <= 0.0 {
        return Err(Error::NonDecayingTail { re_g: g.re });
    }
    Ok(f * r / rate)
}

fn integrate_form<R: Real>(cycle: &RapidDecayCycle, form: &LaurentPoly, spec: &ProblemSpec, t: Complex64, opts: &QuadratureOptions) -> Result<Integral> {
    let p = Dense::<R>::new(form, t);
    let g = Dense::<R>::new(&spec.g, t);
    integrate_polyline(&cycle.nodes, |u| p.eval(u) * cexp(g.eval(u)), false, opts)
}

/// `∫_c P(t,u) e^{g_t(u)} du` for a relative form `P du`.
pub fn integrate_period(cycle: &RapidDecayCycle, form: &LaurentPoly, spec: &ProblemSpec, t: Complex64, opts: &QuadratureOptions) -> Result<PeriodValue> {
    if form.is_zero() {
        return Ok(PeriodValue {
            value: Complex64::new(0.0, 0.0),
            error_estimate: 0.0,
            truncation_bound: 0.0,
        });
    }
    let mut truncation_bound = 0.0;
    if !cycle.closed {
        for (tag, u) in [(cycle.start, cycle.nodes[0]), (cycle.end, *cycle.nodes.last().expect("nodes"))] {
            truncation_bound += tail_bound(spec, form, t, u, tag)?;
        }
    }
    let integral = match opts.precision {
        Precision::Double => integrate_form::<f64>(cycle, form, spec, t, opts)?,
        Precision::Extended => integrate_form::<DoubleDouble>(cycle, form, spec, t, opts)?,
    };
    let eps = match opts.precision {
        Precision::Double => f64::EPSILON,
        Precision::Extended => DoubleDouble::EPSILON,
    };
    let target = opts.tol * integral.value.norm() + opts.abs_floor.max(64.0 * eps * integral.magnitude);
    if integral.error + truncation_bound > target {
        return Err(Error::ToleranceNotMet {
            achieved: integral.error + truncation_bound,
            target,
        });
    }
    Ok(PeriodValue {
        value: integral.value,
        error_estimate: integral.error,
        truncation_bound,
    })
}

/// `∫_c |Q| |e^{g_t}| |du|` to a few digits (scale for Stokes residuals).
pub fn weighted_length(cycle: &RapidDecayCycle, q: &LaurentPoly, spec: &ProblemSpec, t: Complex64) -> Result<f64> {
    if q.is_zero() {
        return Ok(0.0);
    }
    let qd = Dense::<f64>::new(q, t);
    let g = Dense::<f64>::new(&spec.g, t);
    let opts = QuadratureOptions::new(1e-6);
    let integral = integrate_polyline(
        &cycle.nodes,
        |u| Complex64::new(qd.eval(u).norm() * g.eval(u).re.exp(), 0.0),
        true,
        &opts,
    )?;
    Ok(integral.value.re)
}

pub fn period_matrix(spec: &ProblemSpec, t: Complex64, cycles: &[RapidDecayCycle], basis: &CohomologyBasis, opts: &QuadratureOptions) -> Result<PeriodMatrix> {
    let r = basis.rank;
    assert_eq!(cycles.len(), r, "one cycle per basis form");
    let flat = (0..r * r)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / r, k % r);
            let form = LaurentPoly::monomial(TPoly::one(), basis.exponents[j]);
            integrate_period(&cycles[i], &form, spec, t, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PeriodMatrix {
        t,
        entries: flat.chunks(r.max(1)).map(<[_]>::to_vec).collect(),
    })
}
