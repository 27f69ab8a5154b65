//! Dense symmetric eigensolvers.
//!
//! Householder reduction to tridiagonal form followed by implicit QL for the
//! full spectrum, or Sturm bisection plus inverse iteration when only the top
//! of the spectrum is wanted.

use super::matrix::{axpy, dot, norm, Matrix};
use crate::error::{Result, SecError};
use crate::scalar::Real;

/// Eigenpairs with values ascending; column `k` of `vectors` pairs with `values[k]`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

impl<T: Real> EigenDecomposition<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> Vec<T> {
        self.vectors.col(k)
    }
}

/// Validate squareness/finiteness/symmetry and return the symmetrized copy.
pub fn checked_symmetric<T: Real>(a: &Matrix<T>, what: &'static str) -> Result<Matrix<T>> {
    if !a.is_square() {
        return Err(SecError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    if !a.all_finite() {
        return Err(SecError::NonFinite(what));
    }
    let asym = a.asymmetry();
    let tol = T::lit(1e-10).max(T::epsilon() * T::lit(64.0));
    if asym > tol {
        return Err(SecError::NotSymmetric { asymmetry: asym.as_f64() });
    }
    let mut s = a.clone();
    s.symmetrize();
    Ok(s)
}

/// Full eigendecomposition of a symmetric matrix.
pub fn sym_eig<T: Real>(a: &Matrix<T>) -> Result<EigenDecomposition<T>> {
    let a = checked_symmetric(a, "sym_eig input")?;
    let n = a.rows();
    if n == 0 {
        return Ok(EigenDecomposition { values: vec![], vectors: Matrix::zeros(0, 0) });
    }
    let mut tri = Tridiagonal::reduce(a.into_vec(), n);
    tri.accumulate();
    let Tridiagonal { mut d, mut e, mut w, .. } = tri;
    tql2(&mut d, &mut e, &mut w, n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let values = order.iter().map(|&i| d[i]).collect();
    // Row j of `w` holds eigenvector j.
    let vectors = Matrix::from_fn(n, n, |r, c| w[order[c] * n + r]);
    Ok(EigenDecomposition { values, vectors })
}

/// The `k` largest eigenpairs, returned in ascending order.
pub fn sym_eig_largest<T: Real>(a: &Matrix<T>, k: usize) -> Result<EigenDecomposition<T>> {
    let n = a.rows();
    if k > n {
        return Err(SecError::InvalidArgument(format!("requested {k} eigenpairs of a {n}x{n} matrix")));
    }
    if n <= 96 || 3 * k >= n {
        let full = sym_eig(a)?;
        let idx: Vec<usize> = (n - k..n).collect();
        return Ok(EigenDecomposition {
            values: full.values[n - k..].to_vec(),
            vectors: full.vectors.select_cols(&idx),
        });
    }
    let a = checked_symmetric(a, "sym_eig_largest input")?;
    let tri = Tridiagonal::reduce(a.into_vec(), n);
    let diag: Vec<T> = (0..n).map(|i| tri.v(i, i)).collect();
    let off: Vec<T> = (0..n).map(|i| if i == 0 { T::zero() } else { tri.e[i] }).collect();
    let sturm = SturmTridiagonal::new(diag, off);
    let values: Vec<T> = (n - k..n).map(|idx| sturm.eigenvalue(idx)).collect();
    let zs = sturm.inverse_iteration(&values);

    let mut vectors = Matrix::zeros(n, k);
    for (c, mut z) in zs.into_iter().enumerate() {
        tri.apply_q(&mut z);
        let nz = norm(&z);
        for zi in z.iter_mut() {
            *zi /= nz;
        }
        vectors.set_col(c, &z);
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Generalized problem `A v = μ B v` on the span of B-eigenvectors above `rtol·max(B)`.
///
/// The returned vectors are B-orthonormal.
pub fn sym_geig<T: Real>(a: &Matrix<T>, b: &Matrix<T>, rtol: T) -> Result<EigenDecomposition<T>> {
    if !(rtol > T::zero() && rtol < T::one()) {
        return Err(SecError::InvalidArgument(format!("rtol must lie in (0,1), got {rtol}")));
    }
    let a = checked_symmetric(a, "sym_geig A")?;
    let b = checked_symmetric(b, "sym_geig B")?;
    if a.shape() != b.shape() {
        return Err(SecError::Shape(format!("A is {}x{} but B is {}x{}", a.rows(), a.cols(), b.rows(), b.cols())));
    }
    let eb = sym_eig(&b)?;
    let bmax = eb.values.last().copied().unwrap_or(T::zero());
    if !(bmax > T::zero()) {
        return Err(SecError::DegenerateMetric);
    }
    let keep: Vec<usize> = (0..eb.len()).filter(|&i| eb.values[i] > rtol * bmax).collect();
    if keep.is_empty() {
        return Err(SecError::DegenerateMetric);
    }
    let n = a.rows();
    let whiten = Matrix::from_fn(n, keep.len(), |r, c| eb.vectors[(r, keep[c])] / eb.values[keep[c]].sqrt());
    let mut reduced = whiten.t_matmul(&a.matmul(&whiten)?)?;
    reduced.symmetrize();
    let ec = sym_eig(&reduced)?;
    let vectors = whiten.matmul(&ec.vectors)?;
    Ok(EigenDecomposition { values: ec.values, vectors })
}

/// Householder tridiagonalization, storing reflectors in place.
///
/// Storage is read through `v(r, c) = w[c·n + r]`, which is the transpose of
/// the row-major input; for a symmetric input that is the same matrix and
/// makes every inner loop contiguous.
struct Tridiagonal<T> {
    n: usize,
    d: Vec<T>,
    e: Vec<T>,
    w: Vec<T>,
}

impl<T: Real> Tridiagonal<T> {
    #[inline]
    fn v(&self, r: usize, c: usize) -> T {
        self.w[c * self.n + r]
    }

    fn reduce(w: Vec<T>, n: usize) -> Self {
        let mut w = w;
        let mut d = vec![T::zero(); n];
        let mut e = vec![T::zero(); n];
        let zero = T::zero();
        for j in 0..n {
            d[j] = w[j * n + n - 1];
        }
        for i in (1..n).rev() {
            let mut scale = zero;
            let mut h = zero;
            for dk in &d[..i] {
                scale += dk.abs();
            }
            if scale == zero {
                e[i] = d[i - 1];
                for j in 0..i {
                    d[j] = w[j * n + i - 1];
                    w[j * n + i] = zero;
                    w[i * n + j] = zero;
                }
            } else {
                for dk in d[..i].iter_mut() {
                    *dk /= scale;
                    h += *dk * *dk;
                }
                let f = d[i - 1];
                let mut g = h.sqrt();
                if f > zero {
                    g = -g;
                }
                e[i] = scale * g;
                h -= f * g;
                d[i - 1] = f - g;
                for ej in e[..i].iter_mut() {
                    *ej = zero;
                }
                for j in 0..i {
                    let f = d[j];
                    w[i * n + j] = f;
                    let col = &w[j * n..j * n + i];
                    let mut g = e[j] + col[j] * f;
                    for k in (j + 1)..i {
                        g += col[k] * d[k];
                        e[k] += col[k] * f;
                    }
                    e[j] = g;
                }
                let mut f = zero;
                for j in 0..i {
                    e[j] /= h;
                    f += e[j] * d[j];
                }
                let hh = f / (h + h);
                for j in 0..i {
                    e[j] -= hh * d[j];
                }
                for j in 0..i {
                    let f = d[j];
                    let g = e[j];
                    let col = &mut w[j * n..j * n + i];
                    for k in j..i {
                        col[k] -= f * e[k] + g * d[k];
                    }
                    d[j] = w[j * n + i - 1];
                    w[j * n + i] = zero;
                }
            }
            d[i] = h;
        }
        Tridiagonal { n, d, e, w }
    }

    /// Overwrite the reflector storage with the orthogonal factor Q.
    fn accumulate(&mut self) {
        let n = self.n;
        let zero = T::zero();
        let (d, e, w) = (&mut self.d, &mut self.e, &mut self.w);
        for i in 0..n.saturating_sub(1) {
            w[i * n + n - 1] = w[i * n + i];
            w[i * n + i] = T::one();
            let h = d[i + 1];
            if h != zero {
                for k in 0..=i {
                    d[k] = w[(i + 1) * n + k] / h;
                }
                for j in 0..=i {
                    let (left, right) = w.split_at_mut((i + 1) * n);
                    let u = &right[..=i];
                    let col = &mut left[j * n..j * n + i + 1];
                    let g = dot(u, col);
                    for k in 0..=i {
                        col[k] -= g * d[k];
                    }
                }
            }
            for k in 0..=i {
                w[(i + 1) * n + k] = zero;
            }
        }
        for j in 0..n {
            d[j] = w[j * n + n - 1];
            w[j * n + n - 1] = zero;
        }
        w[(n - 1) * n + n - 1] = T::one();
        e[0] = zero;
    }

    /// Apply Q to a vector using the stored reflectors (reduce must not have
    /// been followed by `accumulate`).
    fn apply_q(&self, z: &mut [T]) {
        let n = self.n;
        for s in 1..n {
            let h = self.d[s];
            if h == T::zero() {
                continue;
            }
            let u = &self.w[s * n..s * n + s];
            let g = dot(u, &z[..s]) / h;
            axpy(-g, u, &mut z[..s]);
        }
    }
}

/// Implicit QL on a tridiagonal matrix, rotating the rows of `w`.
fn tql2<T: Real>(d: &mut [T], e: &mut [T], w: &mut [T], n: usize) -> Result<()> {
    let zero = T::zero();
    let one = T::one();
    let two = T::lit(2.0);
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = zero;
    let mut f = zero;
    let mut tst1 = zero;
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(SecError::InvalidArgument("eigensolver did not converge".into()));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(one);
                if p < zero {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d[l + 2..n].iter_mut() {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = one;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = zero;
                let mut s2 = zero;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = w.split_at_mut((i + 1) * n);
                    let vi = &mut lo[i * n..];
                    let vi1 = &mut hi[..n];
                    for k in 0..n {
                        let hk = vi1[k];
                        vi1[k] = s * vi[k] + c * hk;
                        vi[k] = c * vi[k] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if !(e[l].abs() > eps * tst1) {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = zero;
    }
    Ok(())
}

/// Symmetric tridiagonal matrix with diagonal `d` and off-diagonal `e`
/// (`e[i]` couples rows `i−1` and `i`; `e[0]` unused).
struct SturmTridiagonal<T> {
    d: Vec<T>,
    e: Vec<T>,
    lo: T,
    hi: T,
    tnorm: T,
}

impl<T: Real> SturmTridiagonal<T> {
    fn new(d: Vec<T>, e: Vec<T>) -> Self {
        let n = d.len();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        let mut tnorm = T::zero();
        for i in 0..n {
            let r = if i > 0 { e[i].abs() } else { T::zero() } + if i + 1 < n { e[i + 1].abs() } else { T::zero() };
            lo = lo.min(d[i] - r);
            hi = hi.max(d[i] + r);
            tnorm = tnorm.max(d[i].abs() + r);
        }
        let pad = tnorm.max(T::min_positive_value()) * T::epsilon() * T::lit(16.0);
        SturmTridiagonal { d, e, lo: lo - pad, hi: hi + pad, tnorm }
    }

    /// Number of eigenvalues strictly below `x`.
    fn count_below(&self, x: T) -> usize {
        let tiny = T::min_positive_value().sqrt() * self.tnorm.max(T::one());
        let mut count = 0;
        let mut q = T::one();
        for i in 0..self.d.len() {
            let e2 = if i > 0 { self.e[i] * self.e[i] } else { T::zero() };
            q = if i > 0 { self.d[i] - x - e2 / q } else { self.d[i] - x };
            if q.abs() < tiny {
                q = -tiny;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    /// The `idx`-th smallest eigenvalue (0-based), by bisection.
    fn eigenvalue(&self, idx: usize) -> T {
        let mut lo = self.lo;
        let mut hi = self.hi;
        let half = T::lit(0.5);
        for _ in 0..200 {
            let mid = (lo + hi) * half;
            if mid <= lo || mid >= hi {
                break;
            }
            if hi - lo <= T::epsilon() * (lo.abs() + hi.abs()) {
                break;
            }
            if self.count_below(mid) > idx {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo + hi) * half
    }

    /// Eigenvectors of the tridiagonal matrix for the given ascending eigenvalues.
    fn inverse_iteration(&self, values: &[T]) -> Vec<Vec<T>> {
        let n = self.d.len();
        let eps = T::epsilon();
        let cluster_tol = T::lit(1e-3) * self.tnorm;
        let mut out: Vec<Vec<T>> = Vec::with_capacity(values.len());
        let mut cluster_start = 0;
        for (j, &lambda) in values.iter().enumerate() {
            if j > 0 && (lambda - values[j - 1]).abs() > cluster_tol {
                cluster_start = j;
            }
            let lu = TridiagonalLu::factor(&self.d, &self.e, lambda, eps * self.tnorm);
            let mut x = start_vector::<T>(n, j);
            let target = T::lit(8.0) * T::from_usize_lossy(n).sqrt() * eps * self.tnorm.max(T::min_positive_value());
            for it in 0..8 {
                lu.solve(&mut x);
                for prev in &out[cluster_start..j] {
                    let p = dot(prev, &x);
                    axpy(-p, prev, &mut x);
                }
                let nx = norm(&x);
                if nx == T::zero() || !nx.is_finite() {
                    x = start_vector(n, j + 7919 * (it + 1));
                    continue;
                }
                for xi in x.iter_mut() {
                    *xi /= nx;
                }
                if it >= 1 && self.residual(&x, lambda) <= target {
                    break;
                }
            }
            out.push(x);
        }
        out
    }

    fn residual(&self, x: &[T], lambda: T) -> T {
        let n = x.len();
        let mut s = T::zero();
        for i in 0..n {
            let mut r = (self.d[i] - lambda) * x[i];
            if i > 0 {
                r += self.e[i] * x[i - 1];
            }
            if i + 1 < n {
                r += self.e[i + 1] * x[i + 1];
            }
            s += r * r;
        }
        s.sqrt()
    }
}

/// Deterministic, well-spread starting vector.
fn start_vector<T: Real>(n: usize, seed: usize) -> Vec<T> {
    let mut state = (seed as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xD1B5_4A32_D192_ED03;
    let mut v: Vec<T> = (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            T::lit((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
        })
        .collect();
    let nv = norm(&v);
    for x in v.iter_mut() {
        *x /= nv;
    }
    v
}

/// LU factorization with partial pivoting of `T − λI` for tridiagonal `T`.
struct TridiagonalLu<T> {
    dl: Vec<T>,
    d: Vec<T>,
    du: Vec<T>,
    du2: Vec<T>,
    swap: Vec<bool>,
}

impl<T: Real> TridiagonalLu<T> {
    fn factor(diag: &[T], off: &[T], lambda: T, tiny: T) -> Self {
        let n = diag.len();
        let mut d: Vec<T> = diag.iter().map(|&x| x - lambda).collect();
        let mut dl: Vec<T> = (1..n).map(|i| off[i]).collect();
        let mut du: Vec<T> = dl.clone();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        let tiny = tiny.max(T::min_positive_value());
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == T::zero() {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swap[i] = true;
            }
        }
        for di in d.iter_mut() {
            if di.abs() < tiny {
                *di = if *di < T::zero() { -tiny } else { tiny };
            }
        }
        TridiagonalLu { dl, d, du, du2, swap }
    }

    fn solve(&self, b: &mut [T]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= self.du[i] * b[i + 1];
            }
            if i + 2 < n {
                s -= self.du2[i] * b[i + 2];
            }
            b[i] = s / self.d[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_symmetric(n: usize, seed: usize) -> Matrix<f64> {
        let v = start_vector::<f64>(n * n, seed);
        let mut a = Matrix::from_vec(n, n, v).unwrap();
        a.symmetrize();
        a
    }

    fn check_decomposition(a: &Matrix<f64>, ed: &EigenDecomposition<f64>) {
        let n = a.rows();
        let k = ed.len();
        let scale = a.max_abs().max(1.0);
        for c in 0..k {
            let v = ed.vector(c);
            let av = a.matvec(&v).unwrap();
            let r: f64 = av.iter().zip(&v).map(|(x, y)| (x - ed.values[c] * y).powi(2)).sum::<f64>().sqrt();
            assert!(r <= 1e-8 * scale * (n as f64), "residual {r}");
            for c2 in 0..k {
                let d = dot(&v, &ed.vector(c2));
                let expect = if c == c2 { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-10, "orthonormality {c},{c2}: {d}");
            }
        }
        for w in ed.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn diagonal_case() {
        let a = Matrix::<f64>::from_diag(&[3.0, 1.0, 2.0]);
        let ed = sym_eig(&a).unwrap();
        assert_eq!(ed.values, vec![1.0, 2.0, 3.0]);
        assert!((ed.vectors[(1, 0)].abs() - 1.0).abs() < 1e-14);
        assert!((ed.vectors[(2, 1)].abs() - 1.0).abs() < 1e-14);
        assert!((ed.vectors[(0, 2)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn full_and_partial_agree() {
        for &(n, k) in &[(150usize, 10usize), (200, 40), (120, 1)] {
            let a = random_symmetric(n, n + k);
            let full = sym_eig(&a).unwrap();
            check_decomposition(&a, &full);
            let part = sym_eig_largest(&a, k).unwrap();
            check_decomposition(&a, &part);
            for c in 0..k {
                assert!((part.values[c] - full.values[n - k + c]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn partial_handles_exact_degeneracy() {
        // Block-diagonal copies force repeated eigenvalues.
        let n = 60;
        let b = random_symmetric(n, 3);
        let big = Matrix::from_fn(3 * n, 3 * n, |i, j| if i / n == j / n { b[(i % n, j % n)] } else { 0.0 });
        let part = sym_eig_largest(&big, 12).unwrap();
        check_decomposition(&big, &part);
        assert!((part.values[11] - part.values[9]).abs() < 1e-12);
    }

    #[test]
    fn tiny_sizes() {
        let a = Matrix::from_rows(&[vec![2.0]]).unwrap();
        let ed = sym_eig(&a).unwrap();
        assert_eq!(ed.values, vec![2.0]);
        let e0 = sym_eig(&Matrix::<f64>::zeros(0, 0)).unwrap();
        assert!(e0.is_empty());
    }

    #[test]
    fn tridiagonal_lu_solves() {
        let d = vec![0.0, 2.0, -1.0, 4.0];
        let e = vec![0.0, 1.0, 3.0, 0.5];
        let lu = TridiagonalLu::factor(&d, &e, 0.0, 1e-300);
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut b: Vec<f64> = (0..4)
            .map(|i| {
                d[i] * x[i] + if i > 0 { e[i] * x[i - 1] } else { 0.0 } + if i < 3 { e[i + 1] * x[i + 1] } else { 0.0 }
            })
            .collect();
        lu.solve(&mut b);
        for i in 0..4 {
            assert!((b[i] - x[i]).abs() < 1e-12);
        }
    }
}
