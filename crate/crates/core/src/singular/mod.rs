//! A finite set of parameter values containing every `t` where the fibration
//! or its cohomology bundle can degenerate.
//!
//! The set is an over-approximation assembled from
//!
//! * zeros of the leading coefficients of `g` at `u = ∞` and `u = 0`,
//! * zeros of the discriminant-type resultant `Res_u(h, ∂_u h)` where `h` is
//!   `∂_u g` cleared of its pole at `u = 0` (critical points colliding or
//!   escaping),
//! * denominators of the connection matrix.

pub mod roots;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use roots::{complex_polynomial_roots, root_isolate, IsolationPrecision, RootBall};

use crate::cohomology::{ConnectionMatrix, FiberType, ProblemSpec};
use crate::error::{Error, Result};
use crate::symbolic::{determinant, LaurentPoly, RatFun, TPoly, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    LeadingCoeffVanishes,
    CriticalPointDegeneration,
    ConnectionPole,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefiningPoly {
    pub poly: TPoly,
    pub display: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularPoint {
    pub center_re: f64,
    pub center_im: f64,
    pub radius: f64,
    pub provenance: Vec<Provenance>,
}

impl SingularPoint {
    pub fn center(&self) -> Complex64 {
        Complex64::new(self.center_re, self.center_im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSet {
    pub defining_polys: Vec<DefiningPoly>,
    pub roots: Vec<SingularPoint>,
}

impl SingularSet {
    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    /// Distance from `t` to the nearest ball (negative inside a ball);
    /// `+∞` for an empty set.
    pub fn distance(&self, t: Complex64) -> f64 {
        self.roots
            .iter()
            .map(|p| (t - p.center()).norm() - p.radius)
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the ball nearest to `t`.
    pub fn nearest(&self, t: Complex64) -> Option<usize> {
        (0..self.roots.len()).min_by(|&a, &b| {
            let da = (t - self.roots[a].center()).norm();
            let db = (t - self.roots[b].center()).norm();
            da.total_cmp(&db)
        })
    }

    /// Errors if `t` lies within `margin` of a ball.
    pub fn check_point(&self, t: Complex64, margin: f64) -> Result<()> {
        for p in &self.roots {
            if (t - p.center()).norm() <= p.radius + margin {
                return Err(Error::SingularProximity {
                    center: p.center(),
                    radius: p.radius + margin,
                });
            }
        }
        Ok(())
    }

    /// Errors if the segment `[a, b]` passes within `margin` of a ball.
    pub fn check_segment(&self, a: Complex64, b: Complex64, margin: f64) -> Result<()> {
        for p in &self.roots {
            let c = p.center();
            if segment_distance(a, b, c) <= p.radius + margin {
                return Err(Error::SingularProximity {
                    center: c,
                    radius: p.radius + margin,
                });
            }
        }
        Ok(())
    }
}

pub(crate) fn segment_distance(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (c - a).norm();
    }
    let s = ((c - a) * ab.conj()).re / len2;
    let s = s.clamp(0.0, 1.0);
    (a + ab * s - c).norm()
}

/// `h(u)` = `∂_u g` times the power of `u` making it a polynomial with
/// `h(0) ≠ 0` generically; its roots are the critical points on the fiber.
pub fn critical_polynomial(spec: &ProblemSpec) -> LaurentPoly {
    let dg = spec.g.partial(Var::U);
    match spec.fiber {
        FiberType::AffineLine => dg,
        FiberType::PuncturedLine => {
            let shift = -dg.bottom_exponent().unwrap_or(0);
            dg.shift(shift)
        }
    }
}

/// `Res_u(h, ∂_u h)` as a polynomial in `t`; `None` when `h` has no
/// u-dependence (no critical points at all).
pub fn critical_resultant(spec: &ProblemSpec) -> Option<TPoly> {
    let h = critical_polynomial(spec);
    let n = h.top_exponent().unwrap_or(0);
    if n < 1 {
        return None;
    }
    let dh = h.partial(Var::U);
    let res = resultant(&h, &dh);
    debug_assert!(res.is_polynomial());
    Some(res.num().clone())
}

/// Sylvester resultant in `u` of two polynomials with `Q[t]` coefficients.
fn resultant(p: &LaurentPoly, q: &LaurentPoly) -> RatFun {
    let m = p.top_exponent().unwrap_or(0) as usize;
    let n = q.top_exponent().unwrap_or(0) as usize;
    let size = m + n;
    if size == 0 {
        return RatFun::one();
    }
    let mut rows = Vec::with_capacity(size);
    for i in 0..n {
        let mut row = vec![RatFun::zero(); size];
        for k in 0..=m {
            row[i + k] = RatFun::from_poly(p.coeff((m - k) as i64));
        }
        rows.push(row);
    }
    for i in 0..m {
        let mut row = vec![RatFun::zero(); size];
        for k in 0..=n {
            row[i + k] = RatFun::from_poly(q.coeff((n - k) as i64));
        }
        rows.push(row);
    }
    determinant(&rows)
}

pub fn singular_set(spec: &ProblemSpec, a: &ConnectionMatrix) -> Result<SingularSet> {
    let mut defining = Vec::new();
    let mut push = |poly: TPoly, provenance: Provenance| -> Result<()> {
        if poly.is_zero() {
            return Err(Error::DegenerateFamily(format!(
                "defining polynomial for {provenance:?} vanishes identically"
            )));
        }
        defining.push(DefiningPoly {
            display: poly.to_string(),
            poly,
            provenance,
        });
        Ok(())
    };
    if let Some(lc) = spec.leading_at_infinity() {
        push(lc, Provenance::LeadingCoeffVanishes)?;
    }
    if let Some(lc) = spec.leading_at_zero() {
        push(lc, Provenance::LeadingCoeffVanishes)?;
    }
    if let Some(res) = critical_resultant(spec) {
        push(res, Provenance::CriticalPointDegeneration)?;
    }
    for den in a.denominators() {
        push(den, Provenance::ConnectionPole)?;
    }

    // Isolate the roots of the squarefree lcm once so balls are disjoint,
    // then attribute each root to the defining polynomials it annihilates.
    let mut radical = TPoly::one();
    for d in &defining {
        for (f, _) in d.poly.squarefree_decomposition() {
            let g = TPoly::gcd(&radical, &f);
            radical = &radical * &f.div_exact(&g);
        }
    }
    let balls = root_isolate(&radical, IsolationPrecision::default())?;
    let roots = balls
        .iter()
        .map(|b| {
            let mut provenance: Vec<Provenance> = defining
                .iter()
                .filter(|d| {
                    let g = TPoly::gcd(&d.poly, &radical);
                    let rest = radical.div_exact(&g);
                    vanishes_here(&g, &rest, b.center)
                })
                .map(|d| d.provenance)
                .collect();
            provenance.sort();
            provenance.dedup();
            SingularPoint {
                center_re: b.center.re,
                center_im: b.center.im,
                radius: b.radius,
                provenance,
            }
        })
        .collect();
    Ok(SingularSet {
        defining_polys: defining,
        roots,
    })
}

/// For coprime `g`, `rest` with `g * rest` squarefree and `z` near a root of
/// the product: decides which factor owns the root.
fn vanishes_here(g: &TPoly, rest: &TPoly, z: Complex64) -> bool {
    if g.degree().unwrap_or(0) == 0 {
        return false;
    }
    if rest.degree().unwrap_or(0) == 0 {
        return true;
    }
    relative_value(g, z) < relative_value(rest, z)
}

fn relative_value(p: &TPoly, z: Complex64) -> f64 {
    let scale: f64 = p
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| crate::symbolic::rational::rational_to_f64(c).abs() * z.norm().powi(k as i32))
        .sum();
    p.eval(z).norm() / scale.max(f64::MIN_POSITIVE)
}
