//! Numerical checks of the period solutions: ODE residuals, exactness of
//! twisted-exact forms, nondegeneracy of the pairing and monodromy.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cohomology::{twisted_differential, FiberType, ProblemSpec};
use crate::cycles::{CycleBasis, RapidDecayCycle};
use crate::error::{Error, Result};
use crate::pipeline::Problem;
use crate::quadrature::{integrate_period, weighted_length, QuadratureOptions};
use crate::symbolic::{rat, LaurentPoly, TPoly};

/// Seed of the first random gauge `Q`; check `k` uses `STOKES_SEED + k`.
pub const STOKES_SEED: u64 = 20_240_601;

/// Relative tolerance of the periods feeding finite differences.
const PERIOD_TOL: f64 = 1e-13;
/// Monodromy periods are computed in extended precision to this tolerance.
const MONODROMY_PERIOD_TOL: f64 = 1e-20;
const LOOP_VERTICES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub ode: f64,
    pub stokes: f64,
    pub monodromy: f64,
    pub duality: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            ode: 1e-6,
            stokes: 1e-8,
            monodromy: 1e-6,
            duality: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Below,
    Above,
    Within,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub inputs: BTreeMap<String, String>,
    pub residual: f64,
    pub threshold: f64,
    /// How `residual` is compared to `threshold`.
    pub pass_if: Comparison,
    pub passed: bool,
    #[serde(default)]
    pub details: BTreeMap<String, serde_json::Value>,
}

impl CheckRecord {
    fn below(name: &str, residual: f64, threshold: f64) -> Self {
        CheckRecord {
            name: name.into(),
            inputs: BTreeMap::new(),
            residual,
            threshold,
            pass_if: Comparison::Below,
            passed: residual < threshold,
            details: BTreeMap::new(),
        }
    }

    fn vacuous(name: &str, threshold: f64) -> Self {
        Self::below(name, 0.0, threshold).detail("note", json!("rank zero"))
    }

    fn input(mut self, key: &str, value: impl ToString) -> Self {
        self.inputs.insert(key.into(), value.to_string());
        self
    }

    fn detail(mut self, key: &str, value: serde_json::Value) -> Self {
        self.details.insert(key.into(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub label: String,
    pub t: Complex64,
    pub records: Vec<CheckRecord>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn new(label: &str, t: Complex64, records: Vec<CheckRecord>) -> Self {
        let passed = records.iter().all(|r| r.passed);
        VerificationReport {
            label: label.into(),
            t,
            records,
            passed,
        }
    }
}

pub fn fmt_complex(z: Complex64) -> String {
    // `+ 0.0` folds negative zero.
    format!("{},{}", z.re + 0.0, z.im + 0.0)
}

fn matrix_json(m: &DMatrix<Complex64>) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    json!(rows)
}

fn step_size(p: &Problem, t: Complex64) -> f64 {
    (p.singular.distance(t) / 4.0).min(0.1)
}

fn periods_at(p: &Problem, base: &CycleBasis, tau: Complex64) -> Result<DMatrix<Complex64>> {
    let c = p.track(base, &[tau])?;
    Ok(p.periods(&c, &QuadratureOptions::new(PERIOD_TOL))?.values())
}

/// Residual `‖P' - P Aᵀ‖ / ‖P‖` with `P'` from a Richardson-extrapolated
/// four-point stencil (`t ± h`, `t ± ih`).
pub fn check_ode(p: &Problem, t: Complex64, tol: f64) -> Result<CheckRecord> {
    if p.rank() == 0 {
        return Ok(CheckRecord::vacuous("ode", tol).input("t", fmt_complex(t)));
    }
    p.admissible(t, 0.0)?;
    let h = step_size(p, t);
    let base = p.cycles_at(t)?;
    let y0 = p.periods(&base, &QuadratureOptions::new(PERIOD_TOL))?.values();
    let a = p.connection.eval(t)?;
    let i = Complex64::new(0.0, 1.0);
    let stencil = |h: f64| -> Result<DMatrix<Complex64>> {
        let dr = (periods_at(p, &base, t + h)? - periods_at(p, &base, t - h)?) / Complex64::new(2.0 * h, 0.0);
        let di = (periods_at(p, &base, t + i * h)? - periods_at(p, &base, t - i * h)?) / (i * 2.0 * h);
        Ok((dr + di) * Complex64::new(0.5, 0.0))
    };
    let coarse = stencil(h)?;
    let fine = stencil(h / 2.0)?;
    let deriv = (fine * Complex64::new(16.0, 0.0) - coarse) / Complex64::new(15.0, 0.0);
    let residual = (&deriv - &y0 * a.transpose()).norm() / y0.norm();
    Ok(CheckRecord::below("ode", residual, tol)
        .input("t", fmt_complex(t))
        .input("h", h)
        .input("period_tol", PERIOD_TOL)
        .detail("derivative", matrix_json(&deriv)))
}

/// Plain central differences at `h, h/2, h/4`; the residual should fall
/// by about 4 per halving.
pub fn check_ode_convergence(p: &Problem, t: Complex64) -> Result<CheckRecord> {
    let (lo, hi) = (1.5, 2.5);
    if p.rank() == 0 {
        return Ok(CheckRecord::vacuous("ode_convergence", lo).input("t", fmt_complex(t)));
    }
    p.admissible(t, 0.0)?;
    let h0 = step_size(p, t);
    let base = p.cycles_at(t)?;
    let y0 = p.periods(&base, &QuadratureOptions::new(PERIOD_TOL))?.values();
    let ay = &y0 * p.connection.eval(t)?.transpose();
    let mut residuals = Vec::new();
    for k in 0..3 {
        let h = h0 / f64::from(1 << k);
        let d = (periods_at(p, &base, t + h)? - periods_at(p, &base, t - h)?) / Complex64::new(2.0 * h, 0.0);
        residuals.push((d - &ay).norm() / y0.norm());
    }
    let orders: Vec<f64> = residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let worst = orders
        .iter()
        .copied()
        .max_by(|a, b| (a - 2.0).abs().total_cmp(&(b - 2.0).abs()))
        .unwrap_or(2.0);
    let mut rec = CheckRecord::below("ode_convergence", worst, hi)
        .input("t", fmt_complex(t))
        .input("h", h0)
        .detail("residuals", json!(residuals))
        .detail("orders", json!(orders));
    rec.pass_if = Comparison::Within;
    rec.threshold = lo;
    rec.passed = orders.iter().all(|o| (lo..=hi).contains(o));
    rec.details.insert("window".into(), json!([lo, hi]));
    Ok(rec)
}

/// Random gauge function with u-degrees bounded by `d + 2` (and by `e + 2`
/// towards `u = 0` on the punctured line).
pub fn random_gauge<G: Rng>(spec: &ProblemSpec, rng: &mut G) -> LaurentPoly {
    let top = spec.degree_at_infinity() as i64 + 2;
    let bottom = match spec.fiber {
        FiberType::AffineLine => 0,
        FiberType::PuncturedLine => -(spec.order_at_zero() as i64 + 2),
    };
    let mut q = LaurentPoly::zero();
    for k in bottom..=top {
        if rng.random_bool(0.5) {
            let tdeg = rng.random_range(0..=2usize);
            let coeffs = (0..=tdeg)
                .map(|_| rat(rng.random_range(-5..=5), rng.random_range(1..=4)))
                .collect();
            q.add_term(k, &TPoly::new(coeffs));
        }
    }
    q
}

/// `|∫_c ∇Q e^{g_t} du| / ∫_c |Q e^{g_t}| |du|`.
pub fn stokes_residual(p: &Problem, t: Complex64, cycle: &RapidDecayCycle, q: &LaurentPoly) -> Result<f64> {
    let scale = weighted_length(cycle, q, &p.spec, t)?;
    if scale == 0.0 {
        return Ok(0.0);
    }
    let form = twisted_differential(q, &p.spec);
    let opts = QuadratureOptions {
        abs_floor: 1e-13 * scale,
        ..QuadratureOptions::new(1e-12)
    };
    let v = integrate_period(cycle, &form, &p.spec, t, &opts)?;
    Ok(v.value.norm() / scale)
}

pub fn check_stokes(p: &Problem, t: Complex64, cycle: &RapidDecayCycle, q: &LaurentPoly, tol: f64) -> Result<CheckRecord> {
    Ok(CheckRecord::below("stokes", stokes_residual(p, t, cycle, q)?, tol)
        .input("t", fmt_complex(t))
        .input("q", q))
}

/// One record per seed; each is the worst residual over all basis cycles.
pub fn stokes_suite(p: &Problem, t: Complex64, count: u64, tol: f64) -> Result<Vec<CheckRecord>> {
    let cycles = p.cycles_at(t)?;
    (0..count)
        .map(|k| {
            let seed = STOKES_SEED + k;
            let q = random_gauge(&p.spec, &mut ChaCha8Rng::seed_from_u64(seed));
            let mut worst: f64 = 0.0;
            for c in &cycles.cycles {
                worst = worst.max(stokes_residual(p, t, c, &q)?);
            }
            Ok(CheckRecord::below("stokes", worst, tol)
                .input("t", fmt_complex(t))
                .input("seed", seed)
                .input("q", &q))
        })
        .collect()
}

/// Normalized determinant `|det P| / Π ‖row_i‖`, condition number and
/// numerical rank of a period matrix.
pub fn duality_measures(m: &DMatrix<Complex64>) -> (f64, f64, usize) {
    if m.nrows() == 0 {
        return (1.0, 1.0, 0);
    }
    let norms: f64 = m.row_iter().map(|r| r.norm()).product();
    let det = m.determinant().norm() / norms;
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    let rank = sv.iter().filter(|&&s| s > 1e-10 * max).count();
    (det, max / min, rank)
}

pub fn check_duality(p: &Problem, t: Complex64, floor: f64) -> Result<CheckRecord> {
    let cycles = p.cycles_at(t)?;
    let m = p.periods(&cycles, &QuadratureOptions::new(PERIOD_TOL))?.values();
    let (det, cond, rank) = duality_measures(&m);
    let mut rec = CheckRecord::below("duality", det, floor)
        .input("t", fmt_complex(t))
        .detail("condition_number", json!(cond))
        .detail("numerical_rank", json!(rank))
        .detail("symbolic_rank", json!(p.rank()));
    rec.pass_if = Comparison::Above;
    rec.passed = det > floor && rank == p.rank();
    Ok(rec)
}

/// Entries of the connection matrix as `f64` coefficient lists.
struct NumericConnection {
    r: usize,
    entries: Vec<(Vec<f64>, Vec<f64>)>,
}

fn horner(c: &[f64], t: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &x| acc * t + x)
}

impl NumericConnection {
    fn new(p: &Problem) -> Self {
        NumericConnection {
            r: p.rank(),
            entries: p
                .connection
                .a
                .iter()
                .flatten()
                .map(|x| (x.num().to_f64_coeffs(), x.den().to_f64_coeffs()))
                .collect(),
        }
    }

    fn eval(&self, t: Complex64) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.r, self.r, |i, j| {
            let (n, d) = &self.entries[i * self.r + j];
            horner(n, t) / horner(d, t)
        })
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Dormand-Prince 5(4) for `Φ' = A(t(s)) t'(s) Φ` along the segment `a → b`.
fn transport_segment(na: &NumericConnection, a: Complex64, b: Complex64, mut phi: DMatrix<Complex64>, rtol: f64) -> Result<DMatrix<Complex64>> {
    let dt = b - a;
    let rhs = |s: f64, y: &DMatrix<Complex64>| na.eval(a + dt * s) * dt * y;
    let mut s = 0.0;
    let mut h: f64 = 0.01;
    let mut steps = 0;
    while s < 1.0 {
        steps += 1;
        if steps > 1_000_000 {
            return Err(Error::ToleranceNotMet {
                achieved: h,
                target: rtol,
            });
        }
        h = h.min(1.0 - s);
        let mut k: Vec<DMatrix<Complex64>> = Vec::with_capacity(7);
        for st in 0..7 {
            let mut y = phi.clone();
            for (j, kj) in k.iter().enumerate() {
                if A[st][j] != 0.0 {
                    y += kj * Complex64::new(h * A[st][j], 0.0);
                }
            }
            k.push(rhs(s + C[st] * h, &y));
        }
        let mut new = phi.clone();
        for j in 0..6 {
            new += &k[j] * Complex64::new(h * A[6][j], 0.0);
        }
        let mut err = DMatrix::zeros(phi.nrows(), phi.ncols());
        for j in 0..7 {
            let bj = if j < 6 { A[6][j] } else { 0.0 };
            err += &k[j] * Complex64::new(h * (bj - B4[j]), 0.0);
        }
        let scale = rtol * phi.norm().max(new.norm()) + 1e-300;
        let ratio = err.norm() / scale;
        if ratio <= 1.0 {
            s += h;
            phi = new;
        }
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 {
            return Err(Error::ToleranceNotMet {
                achieved: ratio,
                target: 1.0,
            });
        }
    }
    Ok(phi)
}

/// Transport matrix `T` with `Y(end) = T Y(start)` for solutions of
/// `Y' = A Y` continued along the polyline `start, path...`.
pub fn ode_transport(p: &Problem, start: Complex64, path: &[Complex64], rtol: f64) -> Result<DMatrix<Complex64>> {
    let na = NumericConnection::new(p);
    let mut phi = DMatrix::identity(p.rank(), p.rank());
    let mut a = start;
    for &b in path {
        if b != a {
            phi = transport_segment(&na, a, b, phi, rtol)?;
        }
        a = b;
    }
    Ok(phi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Monodromy {
    /// From tracked cycles: `P_loop = M P`.
    pub cycles: DMatrix<Complex64>,
    /// From ODE continuation of the period solutions.
    pub ode: DMatrix<Complex64>,
}

impl Monodromy {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        if self.cycles.nrows() == 0 {
            return Vec::new();
        }
        let mut ev: Vec<Complex64> = self
            .cycles
            .clone()
            .schur()
            .eigenvalues()
            .map(|v| v.iter().copied().collect())
            .unwrap_or_default();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        ev
    }

    pub fn mismatch(&self) -> f64 {
        let n = self.ode.norm();
        if n == 0.0 {
            0.0
        } else {
            (&self.cycles - &self.ode).norm() / n
        }
    }
}

/// Monodromy of the cycle family along a closed polyline based at `t0`
/// (`path` must end at `t0`).
pub fn monodromy_along(p: &Problem, t0: Complex64, path: &[Complex64]) -> Result<Monodromy> {
    let r = p.rank();
    if r == 0 {
        p.track(&p.cycles_at(t0)?, path)?;
        return Ok(Monodromy {
            cycles: DMatrix::zeros(0, 0),
            ode: DMatrix::zeros(0, 0),
        });
    }
    let opts = QuadratureOptions::extended(MONODROMY_PERIOD_TOL);
    let base = p.cycles_at(t0)?;
    let moved = p.track(&base, path)?;
    let p0 = p.periods(&base, &opts)?.values();
    let p1 = p.periods(&moved, &opts)?.values();
    let inv = p0.clone().try_inverse().ok_or(Error::SingularOverQt)?;
    let transport = ode_transport(p, t0, path, 1e-13)?;
    Ok(Monodromy {
        cycles: &p1 * &inv,
        ode: &p0 * transport.transpose() * &inv,
    })
}

/// Counterclockwise loop from `t0` around the singular point `index`.
pub fn loop_around(p: &Problem, index: usize, t0: Complex64) -> Result<Vec<Complex64>> {
    let roots = &p.singular.roots;
    let target = roots.get(index).ok_or(Error::IndexOutOfRange {
        index,
        len: roots.len(),
    })?;
    let sigma = target.center();
    let others = roots
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != index)
        .map(|(_, q)| (q.center() - sigma).norm() - q.radius)
        .fold(f64::INFINITY, f64::min);
    let d0 = (t0 - sigma).norm();
    let rho = d0.min(others / 2.0);
    if rho <= 4.0 * target.radius || rho <= 0.0 {
        return Err(Error::LoopHitsSingularity(sigma));
    }
    let dir = (t0 - sigma) / d0;
    let mut path = Vec::new();
    let circle: Vec<Complex64> = (1..=LOOP_VERTICES)
        .map(|k| sigma + dir * Complex64::from_polar(rho, TAU * k as f64 / LOOP_VERTICES as f64))
        .collect();
    if rho < d0 {
        path.push(sigma + dir * rho);
        path.extend(circle);
        path.push(t0);
    } else {
        path.extend(circle);
        *path.last_mut().expect("circle") = t0;
    }
    let mut a = t0;
    for &b in &path {
        for (k, q) in roots.iter().enumerate() {
            let margin = if k == index { 0.0 } else { q.radius };
            if crate::singular::segment_distance(a, b, q.center()) <= q.radius + margin {
                return Err(Error::LoopHitsSingularity(q.center()));
            }
        }
        a = b;
    }
    Ok(path)
}

pub fn check_monodromy(p: &Problem, index: usize, t0: Complex64, tol: f64) -> Result<(CheckRecord, Monodromy)> {
    let path = loop_around(p, index, t0)?;
    let m = monodromy_along(p, t0, &path)?;
    let det = if m.cycles.nrows() == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        m.cycles.determinant()
    };
    let residual = m.mismatch();
    let mut rec = CheckRecord::below("monodromy", residual, tol)
        .input("sigma", fmt_complex(p.singular.roots[index].center()))
        .input("index", index)
        .input("t0", fmt_complex(t0))
        .detail("m_cycles", matrix_json(&m.cycles))
        .detail("m_ode", matrix_json(&m.ode))
        .detail("det", json!([det.re, det.im]))
        .detail(
            "eigenvalues",
            json!(m.eigenvalues().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()),
        );
    rec.passed = residual < tol && det.norm() > 1e-8;
    Ok((rec, m))
}

/// All checks at one basepoint.
pub fn verify_all(p: &Problem, t: Complex64, th: &Thresholds, stokes_count: u64) -> Result<VerificationReport> {
    p.admissible(t, 0.0)?;
    let mut records = vec![check_ode(p, t, th.ode)?, check_ode_convergence(p, t)?];
    records.extend(stokes_suite(p, t, stokes_count, th.stokes)?);
    records.push(check_duality(p, t, th.duality)?);
    for k in 0..p.singular.len() {
        match check_monodromy(p, k, t, th.monodromy) {
            Ok((rec, _)) => records.push(rec),
            Err(Error::LoopHitsSingularity(c)) => {
                // No admissible loop from this basepoint; nothing to compare.
                records.push(
                    CheckRecord::below("monodromy", 0.0, th.monodromy)
                        .input("index", k)
                        .input("t0", fmt_complex(t))
                        .detail("skipped", json!(format!("loop meets singular value {}", fmt_complex(c)))),
                );
            }
            Err(e) => return Err(e),
        }
    }
    Ok(VerificationReport::new(&p.spec.label, t, records))
}
