//! Gaussian elimination over `Q(t)`.

use super::ratfun::RatFun;
use crate::error::{Error, Result};

pub type RatMatrix = Vec<Vec<RatFun>>;

/// Solves `m * x = b` exactly.
pub fn solve_linear_ratfun(m: &[Vec<RatFun>], b: &[RatFun]) -> Result<Vec<RatFun>> {
    let n = m.len();
    assert!(m.iter().all(|row| row.len() == n), "matrix must be square");
    assert_eq!(b.len(), n, "right-hand side length mismatch");
    let mut a: Vec<Vec<RatFun>> = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();

    for col in 0..n {
        let piv = pick_pivot(&a, col, col).ok_or(Error::SingularOverQt)?;
        a.swap(col, piv);
        let inv = a[col][col].inv()?;
        for x in a[col].iter_mut().skip(col) {
            *x = &*x * &inv;
        }
        for row in 0..n {
            if row == col || a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone();
            for k in col..=n {
                let delta = &factor * &a[col][k];
                a[row][k] = &a[row][k] - &delta;
            }
        }
    }
    Ok(a.into_iter().map(|mut row| row.pop().expect("augmented")).collect())
}

/// Exact determinant.
pub fn determinant(m: &[Vec<RatFun>]) -> RatFun {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = RatFun::one();
    for col in 0..n {
        let Some(piv) = pick_pivot(&a, col, col) else {
            return RatFun::zero();
        };
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        det = &det * &a[col][col];
        let inv = a[col][col].inv().expect("nonzero pivot");
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = &a[row][col] * &inv;
            for k in col..n {
                let delta = &factor * &a[col][k];
                a[row][k] = &a[row][k] - &delta;
            }
        }
    }
    det
}

/// Basis of the right kernel `{x : m * x = 0}` (m is rows x cols).
pub fn kernel(m: &[Vec<RatFun>], cols: usize) -> Vec<Vec<RatFun>> {
    let mut a = m.to_vec();
    let rows = a.len();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = pick_pivot(&a, col, r) else {
            continue;
        };
        a.swap(r, piv);
        let inv = a[r][col].inv().expect("nonzero pivot");
        for x in a[r].iter_mut().skip(col) {
            *x = &*x * &inv;
        }
        for row in 0..rows {
            if row == r || a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone();
            for k in col..cols {
                let delta = &factor * &a[r][k];
                a[row][k] = &a[row][k] - &delta;
            }
        }
        pivot_cols.push(col);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![RatFun::zero(); cols];
            v[f] = RatFun::one();
            for (i, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = -&a[i][f];
            }
            v
        })
        .collect()
}

pub fn mat_mul(a: &[Vec<RatFun>], b: &[Vec<RatFun>]) -> RatMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(RatFun::zero(), |acc, k| &acc + &(&row[k] * &b[k][j]))
                })
                .collect()
        })
        .collect()
}

/// Row vector times matrix.
pub fn vec_mat(v: &[RatFun], m: &[Vec<RatFun>]) -> Vec<RatFun> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| {
            v.iter()
                .zip(m)
                .fold(RatFun::zero(), |acc, (vi, row)| &acc + &(vi * &row[j]))
        })
        .collect()
}

pub fn mat_vec(m: &[Vec<RatFun>], v: &[RatFun]) -> Vec<RatFun> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(RatFun::zero(), |acc, (a, b)| &acc + &(a * b))
        })
        .collect()
}

/// Exact inverse via column-wise solves.
pub fn inverse(m: &[Vec<RatFun>]) -> Result<RatMatrix> {
    let n = m.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e: Vec<RatFun> = (0..n)
            .map(|i| if i == j { RatFun::one() } else { RatFun::zero() })
            .collect();
        cols.push(solve_linear_ratfun(m, &e)?);
    }
    Ok((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
}

/// Nonzero pivot with the smallest total degree at or below `start`.
fn pick_pivot(a: &[Vec<RatFun>], col: usize, start: usize) -> Option<usize> {
    (start..a.len())
        .filter(|&r| !a[r][col].is_zero())
        .min_by_key(|&r| {
            let x = &a[r][col];
            x.num().degree().unwrap_or(0) + x.den().degree().unwrap_or(0)
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::tpoly::TPoly;

    #[test]
    fn identity_and_scalar() {
        let id = vec![
            vec![RatFun::one(), RatFun::zero()],
            vec![RatFun::zero(), RatFun::one()],
        ];
        let b = vec![RatFun::t(), RatFun::from_int(3)];
        assert_eq!(solve_linear_ratfun(&id, &b).unwrap(), b);
        let x = solve_linear_ratfun(&[vec![RatFun::t()]], &[RatFun::one()]).unwrap();
        assert_eq!(x, vec![RatFun::t().inv().unwrap()]);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let m = vec![
            vec![RatFun::t(), RatFun::one()],
            vec![&RatFun::t() * &RatFun::t(), RatFun::t()],
        ];
        assert_eq!(
            solve_linear_ratfun(&m, &[RatFun::one(), RatFun::one()]),
            Err(Error::SingularOverQt)
        );
        assert!(determinant(&m).is_zero());
    }

    #[test]
    fn kernel_of_rank_one() {
        let m = vec![vec![RatFun::t(), RatFun::one()]];
        let k = kernel(&m, 2);
        assert_eq!(k.len(), 1);
        let res = mat_vec(&m, &k[0]);
        assert!(res[0].is_zero());
    }

    #[test]
    fn determinant_matches_expansion() {
        let t = RatFun::t();
        let m = vec![
            vec![t.clone(), RatFun::from_int(2)],
            vec![RatFun::from_poly(TPoly::from_ints(&[1, 1])), t.clone()],
        ];
        // t^2 - 2(t+1)
        assert_eq!(determinant(&m), RatFun::from_poly(TPoly::from_ints(&[-2, -2, 1])));
    }
}
