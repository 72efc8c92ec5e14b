//! Valley sectors of `e^{g_t}` and polyline rapid-decay cycles.
//!
//! A cycle is stored as the continuous angles of its valley ends plus the
//! fiber geometry at the current `t`; the node list is rebuilt from those
//! data whenever `t` changes. Angles are never reduced mod 2π once a basis
//! exists, so tracking around a loop in `t` records how ends wind.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cohomology::{fiber_basis, FiberType, ProblemSpec};
use crate::error::{Error, Result};
use crate::singular::{complex_polynomial_roots, critical_polynomial, segment_distance, SingularSet};
use crate::symbolic::TPoly;

/// Tail tolerance used when a caller does not choose one.
pub const DEFAULT_TAIL_TOL: f64 = 1e-40;

const ARC_STEP: f64 = PI / 16.0;
const LOOP_VERTICES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    /// Center angle in `[0, 2π)`.
    pub center: f64,
    pub half_width: f64,
    pub decay_degree: usize,
    pub lc: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValleyConfig {
    pub t: Complex64,
    pub at_infinity: Vec<Sector>,
    pub at_zero: Vec<Sector>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndTag {
    Interior,
    ValleyInfinity(usize),
    ValleyZero(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RapidDecayCycle {
    pub nodes: Vec<Complex64>,
    pub start: EndTag,
    pub end: EndTag,
    pub closed: bool,
    pub r_infinity: f64,
    pub r_zero: f64,
    /// Continuous angle of the start end (valley ends only).
    pub start_angle: Option<f64>,
    pub end_angle: Option<f64>,
}

impl RapidDecayCycle {
    pub fn tags(&self) -> [EndTag; 2] {
        [self.start, self.end]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleBasis {
    pub t: Complex64,
    pub cycles: Vec<RapidDecayCycle>,
    /// Continuous valley-center labels, indexed by sector label.
    pub infinity_centers: Vec<f64>,
    pub zero_centers: Vec<f64>,
    pub tail_tol: f64,
}

impl CycleBasis {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }
}

fn eval_checked(p: &TPoly, t: Complex64) -> Result<Complex64> {
    let v = p.eval(t);
    let scale: f64 = p
        .to_f64_coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| c.abs() * t.norm().powi(k as i32))
        .sum();
    if v.norm() <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::AtSingularT(t));
    }
    Ok(v)
}

fn wrap(theta: f64) -> f64 {
    let x = theta.rem_euclid(TAU);
    if x >= TAU {
        0.0
    } else {
        x
    }
}

fn sectors(lc: Complex64, degree: usize, offset: f64) -> Vec<Sector> {
    let n = degree as f64;
    let mut out: Vec<Sector> = (0..degree)
        .map(|j| Sector {
            center: wrap((offset + TAU * j as f64) / n),
            half_width: PI / (2.0 * n),
            decay_degree: degree,
            lc,
        })
        .collect();
    out.sort_by(|a, b| a.center.total_cmp(&b.center));
    out
}

pub fn valley_config(spec: &ProblemSpec, t: Complex64) -> Result<ValleyConfig> {
    let d = spec.degree_at_infinity();
    let e = spec.order_at_zero();
    let at_infinity = match spec.leading_at_infinity() {
        Some(p) => {
            let lc = eval_checked(&p, t)?;
            // arg lc + d θ ≡ π
            sectors(lc, d, PI - lc.arg())
        }
        None => Vec::new(),
    };
    let at_zero = match spec.leading_at_zero() {
        Some(p) => {
            let lc = eval_checked(&p, t)?;
            // arg lc - e φ ≡ π
            sectors(lc, e, lc.arg() - PI)
        }
        None => Vec::new(),
    };
    assert_eq!(at_infinity.len(), d);
    assert_eq!(at_zero.len(), e);
    Ok(ValleyConfig {
        t,
        at_infinity,
        at_zero,
    })
}

/// Critical points of `g_t` on the fiber (roots of `∂_u g` away from 0).
pub fn critical_points(spec: &ProblemSpec, t: Complex64) -> Vec<Complex64> {
    let h = critical_polynomial(spec);
    let top = h.top_exponent().unwrap_or(0).max(0) as usize;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); top + 1];
    for (k, c) in h.specialize(t) {
        if k >= 0 {
            coeffs[k as usize] = c;
        }
    }
    complex_polynomial_roots(&coeffs)
        .into_iter()
        .filter(|z| z.norm() > 1e-300)
        .collect()
}

/// Waypoint radii `(outer, inner)` enclosing / enclosed by all critical points.
fn waypoint_radii(spec: &ProblemSpec, t: Complex64) -> (f64, f64) {
    let crit = critical_points(spec, t);
    let outer = 1.0 + crit.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let inner = 1.0 / (1.0 + crit.iter().map(|z| 1.0 / z.norm()).fold(0.0, f64::max));
    (outer, inner)
}

/// Smallest `R` with `|lc| R^d / 2 >= -ln(tol) + d ln R + 50`, then enlarged
/// until `Re g` at the valley center really is that negative.
fn truncation_radius(lc: f64, d: usize, tol: f64, floor: f64, re_g: impl Fn(f64) -> f64) -> f64 {
    let need = -tol.ln() + 50.0;
    let n = d as f64;
    let mut r: f64 = 1.0;
    for _ in 0..100 {
        let next = (2.0 * (need + n * r.ln().max(0.0)) / lc).powf(1.0 / n);
        if (next - r).abs() <= 1e-12 * r {
            r = next;
            break;
        }
        r = next;
    }
    r = r.max(2.0 * floor);
    for _ in 0..60 {
        if re_g(r) <= tol.ln() - 30.0 {
            break;
        }
        r *= 1.5;
    }
    r
}

/// Fiber geometry at one `t`: waypoint and truncation radii.
#[derive(Debug, Clone, Copy)]
struct Geometry {
    outer: f64,
    inner: f64,
    r_infinity: f64,
    r_zero: f64,
}

fn geometry(spec: &ProblemSpec, t: Complex64, inf_centers: &[f64], zero_centers: &[f64], tail_tol: f64) -> Result<Geometry> {
    let (outer, inner) = waypoint_radii(spec, t);
    let d = spec.degree_at_infinity();
    let e = spec.order_at_zero();
    let mut r_infinity = 2.0 * outer;
    if let Some(p) = spec.leading_at_infinity() {
        let lc = eval_checked(&p, t)?.norm();
        for &theta in inf_centers {
            let r = truncation_radius(lc, d, tail_tol, outer, |r| {
                spec.g.eval(t, Complex64::from_polar(r, theta)).re
            });
            r_infinity = r_infinity.max(r);
        }
    }
    let mut r_zero = inner / 2.0;
    if let Some(p) = spec.leading_at_zero() {
        let lc = eval_checked(&p, t)?.norm();
        for &phi in zero_centers {
            let s = truncation_radius(lc, e, tail_tol, 1.0 / inner, |s| {
                spec.g.eval(t, Complex64::from_polar(1.0 / s, phi)).re
            });
            r_zero = r_zero.min(1.0 / s);
        }
    }
    Ok(Geometry {
        outer,
        inner,
        r_infinity,
        r_zero,
    })
}

/// Log-polar interpolation from `(r0, a0)` to `(r1, a1)`, endpoints included.
fn spiral(r0: f64, a0: f64, r1: f64, a1: f64) -> Vec<Complex64> {
    let (l0, l1) = (r0.ln(), r1.ln());
    let pieces = ((a1 - a0).abs() / ARC_STEP)
        .ceil()
        .max(((l1 - l0).abs() / 0.25).ceil())
        .max(1.0) as usize;
    (0..=pieces)
        .map(|k| {
            let s = k as f64 / pieces as f64;
            Complex64::from_polar((l0 + (l1 - l0) * s).exp(), a0 + (a1 - a0) * s)
        })
        .collect()
}

fn unit_loop() -> Vec<Complex64> {
    let mut nodes: Vec<Complex64> = (0..LOOP_VERTICES)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / LOOP_VERTICES as f64))
        .collect();
    nodes.push(nodes[0]);
    nodes
}

fn build_nodes(start: EndTag, end: EndTag, a: f64, b: f64, geo: &Geometry) -> Vec<Complex64> {
    let (ra, rho_a) = match start {
        EndTag::ValleyZero(_) => (geo.r_zero, geo.inner),
        _ => (geo.r_infinity, geo.outer),
    };
    let (rb, rho_b) = match end {
        EndTag::ValleyZero(_) => (geo.r_zero, geo.inner),
        _ => (geo.r_infinity, geo.outer),
    };
    let mut nodes = vec![Complex64::from_polar(ra, a)];
    nodes.extend(spiral(rho_a, a, rho_b, b));
    nodes.push(Complex64::from_polar(rb, b));
    nodes
}

fn make_cycle(start: EndTag, end: EndTag, a: f64, b: f64, geo: &Geometry) -> RapidDecayCycle {
    RapidDecayCycle {
        nodes: build_nodes(start, end, a, b, geo),
        start,
        end,
        closed: false,
        r_infinity: geo.r_infinity,
        r_zero: geo.r_zero,
        start_angle: Some(a),
        end_angle: Some(b),
    }
}

fn make_loop(geo: &Geometry) -> RapidDecayCycle {
    RapidDecayCycle {
        nodes: unit_loop(),
        start: EndTag::Interior,
        end: EndTag::Interior,
        closed: true,
        r_infinity: geo.r_infinity,
        r_zero: geo.r_zero,
        start_angle: None,
        end_angle: None,
    }
}

pub fn cycle_basis(spec: &ProblemSpec, t: Complex64, cfg: &ValleyConfig) -> Result<CycleBasis> {
    cycle_basis_with_tail(spec, t, cfg, DEFAULT_TAIL_TOL)
}

/// Consecutive valleys are joined counterclockwise: path `j` runs from
/// valley `j-1` (cyclically) to valley `j`.
pub fn cycle_basis_with_tail(spec: &ProblemSpec, t: Complex64, cfg: &ValleyConfig, tail_tol: f64) -> Result<CycleBasis> {
    let rank = fiber_basis(spec)?.rank;
    if rank == 0 {
        return Err(Error::RankZero);
    }
    let inf: Vec<f64> = cfg.at_infinity.iter().map(|s| s.center).collect();
    let zero: Vec<f64> = cfg.at_zero.iter().map(|s| s.center).collect();
    let geo = geometry(spec, t, &inf, &zero, tail_tol)?;

    let chain = |centers: &[f64], tag: fn(usize) -> EndTag| -> Vec<RapidDecayCycle> {
        let n = centers.len();
        (0..n.saturating_sub(1))
            .map(|j| {
                let i = (j + n - 1) % n;
                let b = if j == 0 { centers[0] + TAU } else { centers[j] };
                make_cycle(tag(i), tag(j), centers[i], b, &geo)
            })
            .collect()
    };

    let mut cycles = chain(&inf, EndTag::ValleyInfinity);
    if spec.fiber == FiberType::PuncturedLine {
        cycles.extend(chain(&zero, EndTag::ValleyZero));
        if !inf.is_empty() && !zero.is_empty() {
            let a = zero[0];
            let mut b = inf[0];
            while b - a > PI {
                b -= TAU;
            }
            while b - a <= -PI {
                b += TAU;
            }
            cycles.push(make_cycle(EndTag::ValleyZero(0), EndTag::ValleyInfinity(0), a, b, &geo));
        }
        cycles.push(make_loop(&geo));
    }
    assert_eq!(cycles.len(), rank, "cycle count must equal the cohomology rank");
    Ok(CycleBasis {
        t,
        cycles,
        infinity_centers: inf,
        zero_centers: zero,
        tail_tol,
    })
}

/// Deforms `basis` along the polyline `path` (prefixed by `basis.t` if it
/// does not start there), following valley centers continuously.
pub fn track_cycles(spec: &ProblemSpec, basis: &CycleBasis, path: &[Complex64], sing: &SingularSet) -> Result<CycleBasis> {
    let d = spec.degree_at_infinity() as f64;
    let e = spec.order_at_zero() as f64;
    let lc_inf = spec.leading_at_infinity();
    let lc_zero = spec.leading_at_zero();

    let mut pts = vec![basis.t];
    pts.extend_from_slice(path);
    pts.dedup();

    let mut out = basis.clone();
    let mut t = basis.t;
    let mut shift_inf = 0.0;
    let mut shift_zero = 0.0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        for p in &sing.roots {
            if segment_distance(a, b, p.center()) <= 2.0 * p.radius {
                return Err(Error::SingularProximity {
                    center: p.center(),
                    radius: 2.0 * p.radius,
                });
            }
        }
        let mut s = 0.0;
        let mut ds: f64 = 0.125;
        while s < 1.0 {
            let s1 = (s + ds).min(1.0);
            let t1 = a + (b - a) * s1;
            let step_arg = |p: &Option<TPoly>| -> Result<f64> {
                match p {
                    Some(p) => Ok((eval_checked(p, t1)? / eval_checked(p, t)?).arg()),
                    None => Ok(0.0),
                }
            };
            let di = step_arg(&lc_inf)?;
            let dz = step_arg(&lc_zero)?;
            if di.abs() > PI / 4.0 || dz.abs() > PI / 4.0 {
                ds /= 2.0;
                if ds < 1e-12 {
                    return Err(Error::StepCollision(t1));
                }
                continue;
            }
            if d > 0.0 {
                shift_inf -= di / d;
            }
            if e > 0.0 {
                shift_zero += dz / e;
            }
            t = t1;
            s = s1;
            ds = (ds * 2.0).min(0.25);
        }
    }

    let moved = |tag: EndTag, angle: Option<f64>| {
        angle.map(|x| match tag {
            EndTag::ValleyInfinity(_) => x + shift_inf,
            EndTag::ValleyZero(_) => x + shift_zero,
            EndTag::Interior => x,
        })
    };
    out.t = t;
    out.infinity_centers.iter_mut().for_each(|x| *x += shift_inf);
    out.zero_centers.iter_mut().for_each(|x| *x += shift_zero);
    let geo = geometry(spec, t, &out.infinity_centers, &out.zero_centers, basis.tail_tol)?;
    for c in &mut out.cycles {
        *c = if c.closed {
            make_loop(&geo)
        } else {
            let a = moved(c.start, c.start_angle).expect("valley start");
            let b = moved(c.end, c.end_angle).expect("valley end");
            make_cycle(c.start, c.end, a, b, &geo)
        };
    }
    Ok(out)
}
