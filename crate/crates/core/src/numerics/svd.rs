//! One-sided Jacobi SVD and the Moore–Penrose pseudoinverse.

use super::matrix::{dot, Matrix};
use crate::error::{Result, SecError};
use crate::scalar::Real;

/// Thin SVD `A = U diag(s) Vᵀ`, singular values descending.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    pub u: Matrix<T>,
    pub s: Vec<T>,
    pub v: Matrix<T>,
}

pub fn svd<T: Real>(a: &Matrix<T>) -> Result<Svd<T>> {
    if !a.all_finite() {
        return Err(SecError::NonFinite("svd input"));
    }
    if a.rows() < a.cols() {
        let t = svd(&a.transpose())?;
        return Ok(Svd { u: t.v, s: t.s, v: t.u });
    }
    let (m, n) = a.shape();
    // Column-major working copies.
    let mut u: Vec<Vec<T>> = (0..n).map(|j| a.col(j)).collect();
    let mut v: Vec<Vec<T>> =
        (0..n).map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect()).collect();
    let eps = T::epsilon();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&u[p], &u[p]);
                let beta = dot(&u[q], &u[q]);
                let gamma = dot(&u[p], &u[q]);
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut u, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<T> = u.iter().map(|c| dot(c, c).sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let s: Vec<T> = order.iter().map(|&j| norms[j]).collect();
    let umat = Matrix::from_fn(m, n, |i, k| {
        let j = order[k];
        if norms[j] > T::zero() {
            u[j][i] / norms[j]
        } else {
            T::zero()
        }
    });
    let vmat = Matrix::from_fn(n, n, |i, k| v[order[k]][i]);
    Ok(Svd { u: umat, s, v: vmat })
}

fn rotate<T: Real>(cols: &mut [Vec<T>], p: usize, q: usize, c: T, s: T) {
    let (lo, hi) = cols.split_at_mut(q);
    let cp = &mut lo[p];
    let cq = &mut hi[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let yq = *y;
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Pseudoinverse with singular values below `rtol·σ_max` treated as zero.
pub fn pinv<T: Real>(a: &Matrix<T>, rtol: T) -> Result<Matrix<T>> {
    if !(rtol > T::zero() && rtol < T::one()) {
        return Err(SecError::InvalidArgument(format!("rtol must lie in (0,1), got {rtol}")));
    }
    let Svd { u, s, v } = svd(a)?;
    let smax = s.first().copied().unwrap_or(T::zero());
    let (m, n) = a.shape();
    let mut out = Matrix::zeros(n, m);
    for (k, &sk) in s.iter().enumerate() {
        if !(sk > rtol * smax) {
            continue;
        }
        let inv = T::one() / sk;
        for i in 0..n {
            let vik = v[(i, k)] * inv;
            if vik == T::zero() {
                continue;
            }
            let row = out.row_mut(i);
            for j in 0..m {
                row[j] += vik * u[(j, k)];
            }
        }
    }
    Ok(out)
}
