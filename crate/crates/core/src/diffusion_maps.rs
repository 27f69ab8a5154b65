//! Laplace–Beltrami eigenbasis from a symmetric Markov-normalized heat kernel.

use crate::datasets::PointCloud;
use crate::error::{Result, SecError};
use crate::numerics::{dot, sym_eig_largest, Matrix};
use crate::scalar::Real;

/// How Markov eigenvalues Λ are turned into Laplacian eigenvalues.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LambdaConversion {
    /// λ = −ln Λ / ε
    #[default]
    Log,
    /// λ = (1 − Λ) / ε
    Linear,
}

/// Discretely orthonormal eigenfunctions with their eigenvalues and quadrature weights.
#[derive(Clone, Debug)]
pub struct SpectralBasis<T> {
    /// Ascending, `lambdas[0] == 0`.
    pub lambdas: Vec<T>,
    /// N×M_s, column `j` samples φ_j.
    pub phi: Matrix<T>,
    /// Sums to one.
    pub weights: Vec<T>,
    pub epsilon: T,
    /// Working truncation used by the tensor constructions.
    pub m: usize,
}

impl<T: Real> SpectralBasis<T> {
    /// Basis from explicit samples, e.g. an analytic eigenbasis.
    pub fn from_parts(lambdas: Vec<T>, phi: Matrix<T>, weights: Vec<T>, epsilon: T, m: usize) -> Result<Self> {
        if phi.cols() != lambdas.len() || phi.rows() != weights.len() {
            return Err(SecError::Shape(format!(
                "{}x{} samples, {} eigenvalues, {} weights",
                phi.rows(),
                phi.cols(),
                lambdas.len(),
                weights.len()
            )));
        }
        if lambdas.is_empty() {
            return Err(SecError::EmptySpectrum);
        }
        if m == 0 || m > lambdas.len() {
            return Err(SecError::InvalidArgument(format!("M must lie in 1..={}, got {m}", lambdas.len())));
        }
        if !phi.all_finite() || lambdas.iter().chain(&weights).any(|x| !x.is_finite()) {
            return Err(SecError::NonFinite("spectral basis"));
        }
        Ok(SpectralBasis { lambdas, phi, weights, epsilon, m })
    }

    pub fn n_points(&self) -> usize {
        self.phi.rows()
    }

    pub fn ms(&self) -> usize {
        self.lambdas.len()
    }

    /// Same basis with a different working truncation.
    pub fn with_m(mut self, m: usize) -> Result<Self> {
        if m == 0 || m > self.ms() {
            return Err(SecError::InvalidArgument(format!("M must lie in 1..={}, got {m}", self.ms())));
        }
        self.m = m;
        Ok(self)
    }

    /// Weighted inner product Σ w f g.
    pub fn inner(&self, f: &[T], g: &[T]) -> T {
        let mut s = T::zero();
        for ((&w, &a), &b) in self.weights.iter().zip(f).zip(g) {
            s += w * a * b;
        }
        s
    }

    /// Generalized Fourier coefficients f̂_j = Σ_i φ_j(x_i) w_i f(x_i), j < M_s.
    pub fn fourier(&self, f: &[T]) -> Result<Vec<T>> {
        if f.len() != self.n_points() {
            return Err(SecError::Shape(format!("function has {} samples, basis has {}", f.len(), self.n_points())));
        }
        let wf: Vec<T> = f.iter().zip(&self.weights).map(|(&a, &w)| a * w).collect();
        self.phi.t_matvec(&wf)
    }

    /// Σ_j c_j φ_j for the leading `c.len()` eigenfunctions.
    pub fn synth(&self, c: &[T]) -> Result<Vec<T>> {
        if c.len() > self.ms() {
            return Err(SecError::Shape(format!("{} coefficients for a basis of {}", c.len(), self.ms())));
        }
        Ok((0..self.n_points()).map(|i| dot(&self.phi.row(i)[..c.len()], c)).collect())
    }

    /// max_ab |Σ w φ_a φ_b − δ_ab|.
    pub fn orthonormality_defect(&self) -> T {
        let wphi = Matrix::from_fn(self.n_points(), self.ms(), |i, j| self.weights[i] * self.phi[(i, j)]);
        let gram = wphi.t_matmul(&self.phi).expect("shapes agree");
        gram.sub(&Matrix::identity(self.ms())).expect("square").max_abs()
    }
}

/// K_ij = exp(−‖x_i − x_j‖² / (4ε)).
pub fn kernel_matrix<T: Real>(cloud: &PointCloud<T>, eps: T) -> Result<Matrix<T>> {
    if !(eps > T::zero() && eps.is_finite()) {
        return Err(SecError::InvalidArgument(format!("bandwidth must be positive, got {eps}")));
    }
    let n = cloud.len();
    let scale = -T::one() / (T::lit(4.0) * eps);
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = T::one();
        for j in (i + 1)..n {
            let v = (cloud.dist2(i, j) * scale).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

fn upper_dist2<T: Real>(cloud: &PointCloud<T>) -> Vec<T> {
    let n = cloud.len();
    let mut d = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            d.push(cloud.dist2(i, j));
        }
    }
    d
}

pub const TUNE_GRID_POINTS: usize = 81;

/// Log-spaced ε grid spanning [1e-6, 1e2] times the median squared pairwise distance.
pub fn tuning_grid<T: Real>(cloud: &PointCloud<T>) -> Result<Vec<T>> {
    let mut d = upper_dist2(cloud);
    let mid = d.len() / 2;
    let (_, med, _) = d.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
    let med = *med;
    if !(med > T::zero()) {
        return Err(SecError::DegenerateCloud);
    }
    let (lo, hi) = (-6.0f64, 2.0f64);
    let steps = (TUNE_GRID_POINTS - 1) as f64;
    Ok((0..TUNE_GRID_POINTS).map(|k| med * T::lit(10f64.powf(lo + (hi - lo) * k as f64 / steps))).collect())
}

/// ε at which log Σ_ij K_ij(ε) grows fastest in log ε.
pub fn tune_bandwidth<T: Real>(cloud: &PointCloud<T>) -> Result<T> {
    let grid = tuning_grid(cloud)?;
    let d = upper_dist2(cloud);
    let n = T::from_usize_lossy(cloud.len());
    let log_sum: Vec<f64> = grid
        .iter()
        .map(|&eps| {
            let scale = -T::one() / (T::lit(4.0) * eps);
            let off: T = d.iter().map(|&x| (x * scale).exp()).sum();
            (n + T::lit(2.0) * off).as_f64().ln()
        })
        .collect();
    let log_eps: Vec<f64> = grid.iter().map(|e| e.as_f64().ln()).collect();
    let mut best = (1, f64::NEG_INFINITY);
    for k in 1..grid.len() - 1 {
        let slope = (log_sum[k + 1] - log_sum[k - 1]) / (log_eps[k + 1] - log_eps[k - 1]);
        if slope > best.1 {
            best = (k, slope);
        }
    }
    Ok(grid[best.0])
}

/// Twice the mean squared nearest-neighbour distance.
pub fn neighbor_bandwidth<T: Real>(cloud: &PointCloud<T>) -> Result<T> {
    let n = cloud.len();
    let mut nn = vec![T::infinity(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = cloud.dist2(i, j);
            nn[i] = nn[i].min(d);
            nn[j] = nn[j].min(d);
        }
    }
    let mean = nn.iter().copied().sum::<T>() / T::from_usize_lossy(n);
    if !(mean > T::zero()) {
        return Err(SecError::DegenerateCloud);
    }
    Ok(T::lit(2.0) * mean)
}

/// K̂ = Q⁻¹ K Q⁻¹ with Q the row sums of K, and D the row sums of K̂.
pub fn markov_normalize<T: Real>(k: &Matrix<T>) -> Result<(Matrix<T>, Vec<T>)> {
    if !k.is_square() {
        return Err(SecError::NotSquare { rows: k.rows(), cols: k.cols() });
    }
    if !k.all_finite() {
        return Err(SecError::NonFinite("kernel matrix"));
    }
    let n = k.rows();
    let q: Vec<T> = (0..n).map(|i| k.row(i).iter().copied().sum()).collect();
    if q.iter().any(|&x| !(x > T::zero())) {
        return Err(SecError::InvalidArgument("kernel has a non-positive row sum".into()));
    }
    let qinv: Vec<T> = q.iter().map(|&x| T::one() / x).collect();
    let khat = k.scale_rows_cols(&qinv, &qinv);
    let d: Vec<T> = (0..n).map(|i| khat.row(i).iter().copied().sum()).collect();
    if d.iter().any(|&x| !(x > T::zero())) {
        return Err(SecError::InvalidArgument("normalized kernel has a non-positive row sum".into()));
    }
    Ok((khat, d))
}

/// Leading `ms` solutions of K̂ v = Λ D v converted to Laplacian eigenpairs.
pub fn eigenbasis<T: Real>(
    khat: &Matrix<T>,
    d: &[T],
    eps: T,
    ms: usize,
    m: usize,
    conversion: LambdaConversion,
) -> Result<SpectralBasis<T>> {
    let n = khat.rows();
    if !khat.is_square() || d.len() != n {
        return Err(SecError::Shape(format!("kernel {}x{} with {} degree entries", khat.rows(), khat.cols(), d.len())));
    }
    if !(eps > T::zero()) {
        return Err(SecError::InvalidArgument(format!("bandwidth must be positive, got {eps}")));
    }
    if ms > n {
        return Err(SecError::DatasetTooSmall { points: n, needed: ms });
    }
    if m == 0 || ms == 0 || m > ms {
        return Err(SecError::InvalidArgument(format!("need 1 ≤ M ≤ M_s, got M={m}, M_s={ms}")));
    }
    // Diagonal D makes the pencil equivalent to the symmetric S = D^{-1/2} K̂ D^{-1/2}.
    let dm: Vec<T> = d.iter().map(|&x| T::one() / x.sqrt()).collect();
    let s = khat.scale_rows_cols(&dm, &dm);
    let eig = sym_eig_largest(&s, ms)?;
    // Descending Λ.
    let big: Vec<T> = eig.values.iter().rev().copied().collect();
    if big.iter().any(|&x| !(x > T::zero())) {
        return Err(SecError::BandwidthTooSmall);
    }
    let raw: Vec<T> = big
        .iter()
        .map(|&x| match conversion {
            LambdaConversion::Log => -x.ln() / eps,
            LambdaConversion::Linear => (T::one() - x) / eps,
        })
        .collect();
    let lambdas: Vec<T> = raw.iter().map(|&l| (l - raw[0]).max(T::zero())).collect();

    let dsum: T = d.iter().copied().sum();
    let weights: Vec<T> = d.iter().map(|&x| x / dsum).collect();
    let mut phi = Matrix::zeros(n, ms);
    for (j, src) in (0..ms).rev().enumerate() {
        let mut col: Vec<T> = (0..n).map(|i| eig.vectors[(i, src)] * dm[i]).collect();
        if j == 0 {
            col = vec![T::one(); n];
        } else {
            let nrm = col.iter().zip(&weights).map(|(&c, &w)| w * c * c).sum::<T>().sqrt();
            let pivot = col.iter().fold(T::zero(), |p, &c| if c.abs() > p.abs() { c } else { p });
            let f = pivot.signum() / nrm;
            col.iter_mut().for_each(|c| *c *= f);
        }
        phi.set_col(j, &col);
    }
    Ok(SpectralBasis { lambdas, phi, weights, epsilon: eps, m })
}

/// Kernel, normalization and eigensolve in one call.
pub fn diffusion_basis<T: Real>(
    cloud: &PointCloud<T>,
    eps: T,
    ms: usize,
    m: usize,
    conversion: LambdaConversion,
) -> Result<SpectralBasis<T>> {
    if ms > cloud.len() {
        return Err(SecError::DatasetTooSmall { points: cloud.len(), needed: ms });
    }
    let k = kernel_matrix(cloud, eps)?;
    let (khat, d) = markov_normalize(&k)?;
    eigenbasis(&khat, &d, eps, ms, m, conversion)
}
