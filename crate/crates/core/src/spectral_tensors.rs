//! Closed-form spectral tensors on functions and 1-forms, built from (λ, c).
//!
//! Four-index tensors are stored so that the flat offset of `(i, j, k, l)` is
//! `r_ij · M + r_kl` with `r_ij = i·M + j`; flattening to an M²×M² matrix is
//! therefore a reinterpretation of the same buffer.

use std::fmt::Write as _;

use crate::diffusion_maps::SpectralBasis;
use crate::error::{Result, SecError};
use crate::numerics::{dot, Matrix};
use crate::scalar::Real;

/// Dense three-index tensor, last index fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3<T> {
    dims: [usize; 3],
    data: Vec<T>,
}

impl<T: Real> Tensor3<T> {
    pub fn zeros(d0: usize, d1: usize, d2: usize) -> Self {
        Tensor3 { dims: [d0, d1, d2], data: vec![T::zero(); d0 * d1 * d2] }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.dims[0] && j < self.dims[1] && k < self.dims[2]);
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: T) {
        let o = self.offset(i, j, k);
        self.data[o] = v;
    }

    /// The fibre over `(i, j)`.
    pub fn fibre(&self, i: usize, j: usize) -> &[T] {
        let o = self.offset(i, j, 0);
        &self.data[o..o + self.dims[2]]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

/// M×M×M×M tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4<T> {
    m: usize,
    data: Vec<T>,
}

impl<T: Real> Tensor4<T> {
    pub fn zeros(m: usize) -> Self {
        Tensor4 { m, data: vec![T::zero(); m * m * m * m] }
    }

    pub fn from_fn(m: usize, mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(m * m * m * m);
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        data.push(f(i, j, k, l));
                    }
                }
            }
        }
        Tensor4 { m, data }
    }

    /// Reinterpret an M²×M² matrix.
    pub fn from_flat(flat: &Matrix<T>) -> Result<Self> {
        let m = (flat.rows() as f64).sqrt().round() as usize;
        if m * m != flat.rows() || !flat.is_square() {
            return Err(SecError::Shape(format!("{}x{} is not M²×M²", flat.rows(), flat.cols())));
        }
        Ok(Tensor4 { m, data: flat.as_slice().to_vec() })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        let m = self.m;
        debug_assert!(i < m && j < m && k < m && l < m);
        self.data[((i * m + j) * m + k) * m + l]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// M²×M² matrix with rows `r_ij` and columns `r_kl`.
    pub fn flatten(&self) -> Matrix<T> {
        let mm = self.m * self.m;
        Matrix::from_vec(mm, mm, self.data.clone()).expect("M⁴ entries")
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |a, &x| a.max(x.abs()))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.m);
        Tensor4 { m: self.m, data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect() }
    }

    /// Largest absolute entrywise difference.
    pub fn max_diff(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).fold(T::zero(), |a, (&x, &y)| a.max((x - y).abs()))
    }

    /// `i,j,k,l,value` rows in storage order.
    pub fn to_csv(&self) -> String {
        let m = self.m;
        let mut out = String::from("i,j,k,l,value\n");
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        writeln!(out, "{i},{j},{k},{l},{:.16e}", self.get(i, j, k, l).as_f64()).unwrap();
                    }
                }
            }
        }
        out
    }
}

/// c_ijk = Σ_n w_n φ_i φ_j φ_k with i, j < M and k < M_s.
#[derive(Clone, Debug)]
pub struct TripleProduct<T> {
    pub c: Tensor3<T>,
}

impl<T: Real> TripleProduct<T> {
    pub fn m(&self) -> usize {
        self.c.dims()[0]
    }

    pub fn ms(&self) -> usize {
        self.c.dims()[2]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.c.get(i, j, k)
    }
}

pub fn triple_product<T: Real>(basis: &SpectralBasis<T>) -> TripleProduct<T> {
    let (n, m, ms) = (basis.n_points(), basis.m, basis.ms());
    let mut c = Tensor3::zeros(m, m, ms);
    let mut u = vec![T::zero(); n];
    for i in 0..m {
        for j in i..m {
            for (p, up) in u.iter_mut().enumerate() {
                *up = basis.weights[p] * basis.phi[(p, i)] * basis.phi[(p, j)];
            }
            let fib = basis.phi.t_matvec(&u).expect("length N");
            for (k, &v) in fib.iter().enumerate() {
                c.set(i, j, k, v);
                c.set(j, i, k, v);
            }
        }
    }
    TripleProduct { c }
}

fn check_lambdas<T: Real>(c: &TripleProduct<T>, lambdas: &[T]) -> Result<()> {
    if lambdas.len() < c.ms() {
        return Err(SecError::Shape(format!("{} eigenvalues for M_s = {}", lambdas.len(), c.ms())));
    }
    Ok(())
}

/// g_kij = ½(λ_i + λ_j − λ_k) c_kij, an M_s×M×M tensor.
pub fn metric_coeffs<T: Real>(c: &TripleProduct<T>, lambdas: &[T]) -> Result<Tensor3<T>> {
    check_lambdas(c, lambdas)?;
    let (m, ms) = (c.m(), c.ms());
    let half = T::lit(0.5);
    let mut g = Tensor3::zeros(ms, m, m);
    for k in 0..ms {
        for i in 0..m {
            for j in 0..m {
                g.set(k, i, j, half * (lambdas[i] + lambdas[j] - lambdas[k]) * c.get(i, j, k));
            }
        }
    }
    Ok(g)
}

/// Σ_s f(s) c_ab s c_cd s over the full s range.
fn contract<T: Real>(c: &TripleProduct<T>, wts: &[T], a: usize, b: usize, cc: usize, d: usize) -> T {
    let x = c.c.fibre(a, b);
    let y = c.c.fibre(cc, d);
    let mut s = T::zero();
    for ((&w, &p), &q) in wts.iter().zip(x).zip(y) {
        s += w * p * q;
    }
    s
}

/// c^p_ijkl = Σ_s λ_s^p c_ijs c_skl.
pub fn cp_tensor<T: Real>(c: &TripleProduct<T>, lambdas: &[T], p: u32) -> Result<Tensor4<T>> {
    check_lambdas(c, lambdas)?;
    if p > 2 {
        return Err(SecError::InvalidArgument(format!("power must be 0, 1 or 2, got {p}")));
    }
    let wts: Vec<T> = lambdas[..c.ms()].iter().map(|&l| l.powi(p as i32)).collect();
    let m = c.m();
    let mut out = Tensor4::zeros(m);
    // Fill (ij) ≤ (kl) and mirror.
    for i in 0..m {
        for j in 0..m {
            let rij = i * m + j;
            for k in 0..m {
                for l in 0..m {
                    let rkl = k * m + l;
                    if rkl < rij {
                        continue;
                    }
                    let v = contract(c, &wts, i, j, k, l);
                    out.data[rij * m * m + rkl] = v;
                    out.data[rkl * m * m + rij] = v;
                }
            }
        }
    }
    Ok(out)
}

/// G_ijkl = ½ Σ_m c_ikm c_jlm (λ_j + λ_l − λ_m).
pub fn hodge_grammian<T: Real>(c: &TripleProduct<T>, lambdas: &[T]) -> Result<Tensor4<T>> {
    check_lambdas(c, lambdas)?;
    let (m, ms) = (c.m(), c.ms());
    let half = T::lit(0.5);
    let lam = &lambdas[..ms];
    Ok(Tensor4::from_fn(m, |i, j, k, l| {
        let x = c.c.fibre(i, k);
        let y = c.c.fibre(j, l);
        let plain = dot(x, y);
        let weighted = contract(c, lam, i, k, j, l);
        half * ((lambdas[j] + lambdas[l]) * plain - weighted)
    }))
}

/// Dirichlet energy E_ijkl of the 1-forms φ_i dφ_j from c¹, c² and λ.
pub fn dirichlet_energy<T: Real>(c1: &Tensor4<T>, c2: &Tensor4<T>, lambdas: &[T]) -> Result<Tensor4<T>> {
    let m = c1.m();
    if c2.m() != m || lambdas.len() < m {
        return Err(SecError::Shape("c¹, c² and λ disagree on M".into()));
    }
    let q = T::lit(0.25);
    Ok(Tensor4::from_fn(m, |i, j, k, l| {
        let lsum = lambdas[i] + lambdas[j] + lambdas[k] + lambdas[l];
        let a = lsum * (c1.get(i, l, j, k) - c1.get(i, k, j, l));
        let b = (lambdas[j] + lambdas[l] - lambdas[i] - lambdas[k]) * c1.get(i, j, k, l);
        let d = c2.get(i, j, k, l) + c2.get(i, k, j, l) - c2.get(i, l, j, k);
        q * (a + b + d)
    }))
}

/// Closed-form energy on the antisymmetric elements.
pub fn antisym_energy<T: Real>(c1: &Tensor4<T>, c2: &Tensor4<T>, lambdas: &[T]) -> Tensor4<T> {
    Tensor4::from_fn(c1.m(), |i, j, k, l| {
        let lsum = (lambdas[i] + lambdas[j]) + (lambdas[k] + lambdas[l]);
        lsum * (c1.get(i, l, j, k) - c1.get(i, k, j, l)) + (c2.get(i, k, j, l) - c2.get(i, l, j, k))
    })
}

/// Antisymmetric Grammian, energy and the mixed tensor H_ijkl = G_ijkl − G_jikl.
///
/// The closed-form energy is compared against the antisymmetrized `e`.
#[allow(clippy::type_complexity)]
pub fn antisymmetrize<T: Real>(
    g: &Tensor4<T>,
    e: &Tensor4<T>,
    c1: &Tensor4<T>,
    c2: &Tensor4<T>,
    lambdas: &[T],
) -> Result<(Tensor4<T>, Tensor4<T>, Tensor4<T>)> {
    let m = g.m();
    if e.m() != m || c1.m() != m || c2.m() != m || lambdas.len() < m {
        return Err(SecError::Shape("tensors disagree on M".into()));
    }
    // Grouped so that both index swaps negate the result bit for bit.
    let ghat = Tensor4::from_fn(m, |i, j, k, l| {
        (g.get(i, j, k, l) - g.get(j, i, k, l)) + (g.get(j, i, l, k) - g.get(i, j, l, k))
    });
    let ehat = antisym_energy(c1, c2, lambdas);
    let combined =
        Tensor4::from_fn(m, |i, j, k, l| e.get(i, j, k, l) - e.get(j, i, k, l) - e.get(i, j, l, k) + e.get(j, i, l, k));
    let tol = T::lit(1e-8).max(T::lit(1e3) * T::epsilon()) * ehat.max_abs().max(T::one());
    let gap = combined.max_diff(&ehat);
    if !(gap <= tol) {
        return Err(SecError::Inconsistent(format!("antisymmetric energy differs from combined entries by {gap:e}")));
    }
    let h = Tensor4::from_fn(m, |i, j, k, l| g.get(i, j, k, l) - g.get(j, i, k, l));
    Ok((ghat, ehat, h))
}

/// Every tensor needed for the 1-form eigenproblems.
#[derive(Clone, Debug)]
pub struct SecTensorSet<T> {
    pub m: usize,
    pub ms: usize,
    /// λ_0..λ_{M_s−1}.
    pub lambdas: Vec<T>,
    pub c: TripleProduct<T>,
    pub g: Tensor3<T>,
    pub c0: Tensor4<T>,
    pub c1: Tensor4<T>,
    pub c2: Tensor4<T>,
    pub gram: Tensor4<T>,
    pub energy: Tensor4<T>,
    pub gram_hat: Tensor4<T>,
    pub energy_hat: Tensor4<T>,
    pub h: Tensor4<T>,
    /// Flattened G + E.
    pub g1_flat: Matrix<T>,
    /// Flattened Ĝ + Ê.
    pub g1hat_flat: Matrix<T>,
}

pub fn assemble<T: Real>(basis: &SpectralBasis<T>) -> Result<SecTensorSet<T>> {
    let lambdas = basis.lambdas.clone();
    let c = triple_product(basis);
    let g = metric_coeffs(&c, &lambdas)?;
    let c0 = cp_tensor(&c, &lambdas, 0)?;
    let c1 = cp_tensor(&c, &lambdas, 1)?;
    let c2 = cp_tensor(&c, &lambdas, 2)?;
    let gram = hodge_grammian(&c, &lambdas)?;
    let energy = dirichlet_energy(&c1, &c2, &lambdas)?;
    let (gram_hat, energy_hat, h) = antisymmetrize(&gram, &energy, &c1, &c2, &lambdas)?;
    let g1_flat = gram.add(&energy).flatten();
    let g1hat_flat = gram_hat.add(&energy_hat).flatten();
    Ok(SecTensorSet {
        m: basis.m,
        ms: basis.ms(),
        lambdas,
        c,
        g,
        c0,
        c1,
        c2,
        gram,
        energy,
        gram_hat,
        energy_hat,
        h,
        g1_flat,
        g1hat_flat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::sym_eig;

    /// Exact Fourier basis on an N-point circle grid: 1, √2 cos θ, √2 sin θ, √2 cos 2θ, …
    fn trig_basis(n: usize, ms: usize, m: usize) -> SpectralBasis<f64> {
        let s2 = 2f64.sqrt();
        let theta = |p: usize| 2.0 * std::f64::consts::PI * p as f64 / n as f64;
        let phi = Matrix::from_fn(n, ms, |p, j| {
            let k = j.div_ceil(2);
            match j {
                0 => 1.0,
                _ if j % 2 == 1 => s2 * (k as f64 * theta(p)).cos(),
                _ => s2 * (k as f64 * theta(p)).sin(),
            }
        });
        let lambdas = (0..ms).map(|j| (j.div_ceil(2) as f64).powi(2)).collect();
        SpectralBasis::from_parts(lambdas, phi, vec![1.0 / n as f64; n], 0.01, m).unwrap()
    }

    #[test]
    fn circle_identities() {
        let b = trig_basis(256, 21, 10);
        let t = assemble(&b).unwrap();
        let r2 = 0.5f64.sqrt();
        assert!((t.c.get(1, 1, 3) - r2).abs() < 1e-12);
        assert!((t.g.get(3, 1, 1) + r2).abs() < 1e-12);
        assert!((t.c0.get(1, 1, 1, 1) - 1.5).abs() < 1e-12);
        assert!((t.gram.get(1, 1, 1, 1) - 0.5).abs() < 1e-12);
        for j in 0..10 {
            assert!((t.g.get(0, j, j) - t.lambdas[j]).abs() < 1e-12);
            assert!((t.gram.get(0, j, 0, j) - t.lambdas[j]).abs() < 1e-10);
            assert!((t.energy.get(0, j, 0, j) - t.lambdas[j].powi(2)).abs() < 1e-9);
            let g1 = t.g1_flat[(j, j)];
            assert!((g1 - t.lambdas[j] - t.lambdas[j].powi(2)).abs() < 1e-9);
            for k in 0..10 {
                assert!(t.g.get(k, 0, j).abs() < 1e-12);
                assert!((t.c0.get(0, j, 0, k) - if j == k { 1.0 } else { 0.0 }).abs() < 1e-12);
                assert!((t.c1.get(0, j, 0, k) - if j == k { t.lambdas[j] } else { 0.0 }).abs() < 1e-10);
                for l in 0..10 {
                    assert!(t.gram.get(k, 0, j, l).abs() < 1e-12);
                    assert_eq!(t.energy_hat.get(k, k, j, l), 0.0);
                }
            }
        }
    }

    #[test]
    fn symmetries_and_psd() {
        let b = trig_basis(128, 15, 6);
        let t = assemble(&b).unwrap();
        let m = 6;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    if k < m {
                        assert!((t.c.get(i, j, k) - t.c.get(k, j, i)).abs() < 1e-10);
                    }
                    for l in 0..m {
                        for cp in [&t.c0, &t.c1, &t.c2] {
                            let v = cp.get(i, j, k, l);
                            assert!((v - cp.get(j, i, k, l)).abs() < 1e-10);
                            assert!((v - cp.get(i, j, l, k)).abs() < 1e-10);
                            assert!((v - cp.get(k, l, i, j)).abs() < 1e-10);
                        }
                        let gv = t.gram.get(i, j, k, l);
                        assert!((gv - t.gram.get(k, j, i, l)).abs() < 1e-10);
                        assert!((gv - t.gram.get(i, l, k, j)).abs() < 1e-10);
                        assert_eq!(t.h.get(i, j, k, l), -t.h.get(j, i, k, l));
                        assert_eq!(t.gram_hat.get(i, j, k, l), -t.gram_hat.get(j, i, k, l));
                        assert_eq!(t.energy_hat.get(i, j, k, l), -t.energy_hat.get(i, j, l, k));
                    }
                }
            }
        }
        assert!(t.energy.flatten().asymmetry() < 1e-8);
        for flat in [t.gram.flatten(), t.g1_flat.clone(), t.gram_hat.flatten(), t.g1hat_flat.clone()] {
            let mut f = flat.clone();
            f.symmetrize();
            let ev = sym_eig(&f).unwrap().values;
            let top = ev.last().unwrap().abs();
            assert!(ev[0] >= -1e-8 * top, "{}", ev[0]);
        }
    }

    #[test]
    fn flatten_round_trip() {
        let t = Tensor4::<f64>::from_fn(3, |i, j, k, l| (i * 27 + j * 9 + k * 3 + l) as f64);
        let f = t.flatten();
        assert_eq!(f[(3 + 2, 1)], t.get(1, 2, 0, 1));
        assert_eq!(Tensor4::from_flat(&f).unwrap(), t);
        assert!(t.to_csv().starts_with("i,j,k,l,value\n0,0,0,0,0.0"));
    }

    #[test]
    fn rejects_bad_power() {
        let t = triple_product(&trig_basis(32, 5, 3));
        assert!(cp_tensor(&t, &[0.0; 5], 3).is_err());
        assert!(cp_tensor(&t, &[0.0; 2], 0).is_err());
    }
}
