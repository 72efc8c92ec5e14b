//! Complex root isolation for rational polynomials.
//!
//! Roots of the squarefree part are approximated by Aberth-Ehrlich iteration
//! and certified with Smith's inclusion theorem: with Weierstrass corrections
//! `W_i = p(z_i) / (lc ∏_{j≠i} (z_i - z_j))`, every connected component of
//! `∪ D(z_i, n|W_i|)` made of `k` disks holds exactly `k` roots. A disk that
//! meets no other disk therefore isolates exactly one root.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::TPoly;

/// Closed disk certified to contain exactly one distinct root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootBall {
    pub center: Complex64,
    pub radius: f64,
    pub multiplicity: usize,
}

impl RootBall {
    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.radius
    }
}

/// Controls for [`root_isolate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsolationPrecision {
    /// Aberth sweeps before giving up.
    pub max_iterations: usize,
    /// Extra Newton polishing sweeps after convergence.
    pub polish_sweeps: usize,
}

impl Default for IsolationPrecision {
    fn default() -> Self {
        IsolationPrecision {
            max_iterations: 500,
            polish_sweeps: 2,
        }
    }
}

impl IsolationPrecision {
    pub fn with_polish(polish_sweeps: usize) -> Self {
        IsolationPrecision {
            polish_sweeps,
            ..Self::default()
        }
    }
}

/// Isolates every distinct complex root of `p`, reporting multiplicities.
pub fn root_isolate(p: &TPoly, precision: IsolationPrecision) -> Result<Vec<RootBall>> {
    assert!(!p.is_zero(), "root_isolate of the zero polynomial");
    let factors = p.squarefree_decomposition();
    if factors.is_empty() {
        return Ok(Vec::new());
    }
    let radical = factors
        .iter()
        .fold(TPoly::one(), |acc, (f, _)| &acc * f);
    let coeffs = radical.to_f64_coeffs();
    let (centers, radii) = isolate_squarefree(&coeffs, precision)?;

    let mut balls: Vec<RootBall> = centers
        .iter()
        .zip(&radii)
        .map(|(&c, &r)| {
            // The factor vanishing at c is the one with the smallest scaled value.
            let multiplicity = factors
                .iter()
                .map(|(f, m)| (scaled_abs(&f.to_f64_coeffs(), c), *m))
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map_or(1, |(_, m)| m);
            RootBall {
                center: c,
                radius: r,
                multiplicity,
            }
        })
        .collect();
    balls.sort_by(|a, b| {
        a.center
            .re
            .total_cmp(&b.center.re)
            .then(a.center.im.total_cmp(&b.center.im))
    });
    debug_assert_eq!(
        balls.iter().map(|b| b.multiplicity).sum::<usize>(),
        p.degree().unwrap_or(0)
    );
    Ok(balls)
}

/// `|f(z)| / Σ |a_k| |z|^k`.
fn scaled_abs(coeffs: &[f64], z: Complex64) -> f64 {
    let (v, s) = eval_with_bound(coeffs, z);
    v.norm() / s.max(f64::MIN_POSITIVE)
}

/// Horner value and `Σ |a_k| |z|^k`.
fn eval_with_bound(coeffs: &[f64], z: Complex64) -> (Complex64, f64) {
    let az = z.norm();
    let mut v = Complex64::new(0.0, 0.0);
    let mut s = 0.0;
    for &c in coeffs.iter().rev() {
        v = v * z + c;
        s = s * az + c.abs();
    }
    (v, s)
}

fn eval_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut dv = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dv = dv * z + v;
        v = v * z + c;
    }
    (v, dv)
}

fn isolate_squarefree(coeffs: &[f64], precision: IsolationPrecision) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let n = coeffs.len() - 1;
    let lc = coeffs[n];
    if n == 1 {
        let z = Complex64::new(-coeffs[0] / lc, 0.0);
        let r = inclusion_radii(coeffs, &[z])[0];
        return Ok((vec![z], vec![r]));
    }
    // Cauchy bound for initial circle.
    let bound = 1.0 + coeffs[..n].iter().map(|c| (c / lc).abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.4;
            Complex64::from_polar(0.5 * bound, ang)
        })
        .collect();

    for _ in 0..precision.max_iterations {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (v, dv) = eval_with_derivative(coeffs, z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let sum: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    for _ in 0..precision.polish_sweeps {
        for zi in z.iter_mut() {
            let (v, dv) = eval_with_derivative(coeffs, *zi);
            let step = v / dv;
            if step.is_finite() {
                *zi -= step;
            }
        }
    }
    let radii = inclusion_radii(coeffs, &z);
    // Unconverged iterates are still fine if the disks certify them.
    if !disjoint(&z, &radii) {
        return Err(Error::PrecisionExhausted {
            iterations: precision.max_iterations,
        });
    }
    Ok((z, radii))
}

/// Smith radii `n |W_i|`, inflated by a bound on the rounding error of the
/// coefficients and of Horner evaluation.
fn inclusion_radii(coeffs: &[f64], z: &[Complex64]) -> Vec<f64> {
    let n = coeffs.len() - 1;
    let lc = coeffs[n];
    let eps = f64::EPSILON;
    (0..z.len())
        .map(|i| {
            let (v, s) = eval_with_bound(coeffs, z[i]);
            let err = (4.0 * n as f64 + 2.0) * eps * s;
            let denom: f64 = (0..z.len())
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).norm())
                .product::<f64>()
                * lc.abs();
            let w = (v.norm() + err) / denom;
            // Floor keeps a zero-width ball from claiming more than f64 can resolve.
            (n as f64 * w).max(4.0 * eps * z[i].norm())
        })
        .collect()
}

/// Approximate roots of a polynomial with complex coefficients (ascending
/// order) by Aberth-Ehrlich iteration. Not certified; used for numeric
/// geometry such as critical points of `g_t`.
pub fn complex_polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = coeffs.to_vec();
    while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
        coeffs.pop();
    }
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lc = coeffs[n];
    if n == 1 {
        return vec![-coeffs[0] / lc];
    }
    let bound = 1.0 + coeffs[..n].iter().map(|c| (c / lc).norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.4;
            Complex64::from_polar(0.5 * bound, ang)
        })
        .collect();
    let one = Complex64::new(1.0, 0.0);
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let mut v = Complex64::new(0.0, 0.0);
            let mut dv = Complex64::new(0.0, 0.0);
            for &c in coeffs.iter().rev() {
                dv = dv * z[i] + v;
                v = v * z[i] + c;
            }
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let sum: Complex64 = (0..n).filter(|&j| j != i).map(|j| one / (z[i] - z[j])).sum();
            let step = ratio / (one - ratio * sum);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    z
}

fn disjoint(z: &[Complex64], r: &[f64]) -> bool {
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            if (z[i] - z[j]).norm() <= r[i] + r[j] {
                return false;
            }
        }
    }
    true
}
