//! Galerkin eigenproblem for the Laplacian on 1-forms and Betti-number estimates.

use crate::error::{Result, SecError};
use crate::frames::{FrameCoefficients, FrameIndex, FrameMatrices};
use crate::numerics::{sym_eig, sym_geig, Matrix};
use crate::scalar::Real;

pub const DEFAULT_SOBOLEV_RTOL: f64 = 1e-3;
pub const B_NULL_RTOL: f64 = 1e-6;
pub const DEFAULT_BETTI_THRESHOLD: f64 = 0.05;

/// Leading eigenvectors of the Sobolev Grammian.
#[derive(Clone, Debug)]
pub struct GalerkinBasis<T> {
    /// dim × w, orthonormal columns.
    pub utilde: Matrix<T>,
    /// Descending.
    pub h: Vec<T>,
    pub rtol: T,
}

impl<T: Real> GalerkinBasis<T> {
    pub fn width(&self) -> usize {
        self.h.len()
    }
}

/// Keep eigenvectors of `g1` whose eigenvalue exceeds `rtol` times the largest.
pub fn sobolev_basis<T: Real>(g1: &Matrix<T>, rtol: T) -> Result<GalerkinBasis<T>> {
    if !(rtol > T::zero() && rtol < T::one()) {
        return Err(SecError::InvalidArgument(format!("rtol must lie in (0,1), got {rtol}")));
    }
    let eig = sym_eig(g1)?;
    let n = eig.len();
    let top = eig.values.last().copied().unwrap_or(T::zero());
    if !(top > T::zero()) {
        return Err(SecError::DegenerateMetric);
    }
    let keep: Vec<usize> = (0..n).rev().filter(|&k| eig.values[k] > rtol * top).collect();
    Ok(GalerkinBasis { utilde: eig.vectors.select_cols(&keep), h: keep.iter().map(|&k| eig.values[k]).collect(), rtol })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Intro,
    Theta(f64),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Intro => "intro",
            Method::Theta(_) => "theta",
        }
    }
}

/// Eigenvalues ascending with frame coefficients of each eigenform.
#[derive(Clone, Debug)]
pub struct EigenformSet<T> {
    pub nus: Vec<T>,
    pub coeffs: Vec<FrameCoefficients<T>>,
    pub method: Method,
    /// ‖L y − μ B y‖ in the reduced coordinates.
    pub residuals: Vec<T>,
    /// Frobenius norm of the reduced L.
    pub l_norm: T,
}

impl<T: Real> EigenformSet<T> {
    pub fn len(&self) -> usize {
        self.nus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nus.is_empty()
    }
}

fn project<T: Real>(m: &Matrix<T>, u: &Matrix<T>) -> Result<Matrix<T>> {
    let mut p = u.t_matmul(&m.matmul(u)?)?;
    p.symmetrize();
    Ok(p)
}

fn solve_reduced<T: Real>(
    l: Matrix<T>,
    b: Matrix<T>,
    lift: &Matrix<T>,
    index: &FrameIndex,
    shift: T,
    method: Method,
) -> Result<EigenformSet<T>> {
    if !(b.max_abs() > T::zero()) {
        return Err(SecError::DegenerateMetric);
    }
    let eig = sym_geig(&l, &b, T::lit(B_NULL_RTOL))?;
    let mut residuals = Vec::with_capacity(eig.len());
    let mut coeffs = Vec::with_capacity(eig.len());
    for k in 0..eig.len() {
        let y = eig.vector(k);
        let ly = l.matvec(&y)?;
        let by = b.matvec(&y)?;
        let r = ly.iter().zip(&by).map(|(&a, &c)| (a - eig.values[k] * c).powi(2)).sum::<T>().sqrt();
        residuals.push(r);
        coeffs.push(FrameCoefficients::new(index.clone(), lift.matvec(&y)?)?);
    }
    Ok(EigenformSet {
        nus: eig.values.iter().map(|&mu| mu - shift).collect(),
        coeffs,
        method,
        residuals,
        l_norm: l.frobenius(),
    })
}

/// Solve Ũᵀ E Ũ a = ν Ũᵀ G Ũ a.
pub fn solve_intro<T: Real>(fm: &FrameMatrices<T>, basis: &GalerkinBasis<T>) -> Result<EigenformSet<T>> {
    check_dims(fm, basis)?;
    let l = project(&fm.energy, &basis.utilde)?;
    let b = project(&fm.gram, &basis.utilde)?;
    solve_reduced(l, b, &basis.utilde, &fm.index, T::zero(), Method::Intro)
}

/// Solve the θ-shifted weak problem in the Sobolev-normalized basis; ν = μ − θ.
pub fn solve_theta<T: Real>(fm: &FrameMatrices<T>, basis: &GalerkinBasis<T>, theta: T) -> Result<EigenformSet<T>> {
    if !(theta > T::zero() && theta.is_finite()) {
        return Err(SecError::InvalidArgument(format!("theta must be positive, got {theta}")));
    }
    check_dims(fm, basis)?;
    let hs: Vec<T> = basis.h.iter().map(|&h| T::one() / h.sqrt()).collect();
    let dim = basis.utilde.rows();
    let lift = basis.utilde.scale_rows_cols(&vec![T::one(); dim], &hs);
    let shifted = fm.energy.add(&fm.gram.scale(theta))?;
    let l = project(&shifted, &lift)?;
    let b = project(&fm.gram, &lift)?;
    solve_reduced(l, b, &lift, &fm.index, theta, Method::Theta(theta.as_f64()))
}

fn check_dims<T: Real>(fm: &FrameMatrices<T>, basis: &GalerkinBasis<T>) -> Result<()> {
    if fm.gram.rows() != basis.utilde.rows() {
        return Err(SecError::Shape(format!(
            "frame matrices have dimension {}, Galerkin basis {}",
            fm.gram.rows(),
            basis.utilde.rows()
        )));
    }
    Ok(())
}

/// Number of eigenvalues below `threshold`.
pub fn betti_count<T: Real>(nus: &[T], threshold: T) -> Result<usize> {
    if nus.is_empty() {
        return Err(SecError::EmptySpectrum);
    }
    Ok(nus.iter().filter(|&&x| x < threshold).count())
}

/// Position of the largest relative jump ν_{k+1}/ν_k among the first eight
/// eigenvalues, with `floor` standing in for ν_0 so that 0 is a possible answer.
pub fn betti_gap<T: Real>(nus: &[T], floor: T) -> Result<usize> {
    if nus.is_empty() {
        return Err(SecError::EmptySpectrum);
    }
    let tiny = T::lit(1e-12);
    let seq: Vec<T> = std::iter::once(floor).chain(nus.iter().take(8).copied()).collect();
    let mut best = (0, T::neg_infinity());
    for k in 0..seq.len() - 1 {
        let score = seq[k + 1] / seq[k].max(tiny);
        if score > best.1 {
            best = (k, score);
        }
    }
    Ok(best.0)
}

/// Threshold count, or the gap rule when `use_gap` is set.
pub fn betti_estimate<T: Real>(nus: &[T], abs_threshold: T, use_gap: bool) -> Result<usize> {
    if use_gap {
        betti_gap(nus, abs_threshold)
    } else {
        betti_count(nus, abs_threshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{FrameKind, FrameScaling};

    fn fm(gram: Matrix<f64>, energy: Matrix<f64>) -> FrameMatrices<f64> {
        let m = (gram.rows() as f64).sqrt() as usize;
        let index = FrameIndex::new(m, FrameKind::Nonsymmetric, FrameScaling::Unit);
        let sobolev = gram.add(&energy).unwrap();
        FrameMatrices { index, gram, energy, sobolev }
    }

    #[test]
    fn sobolev_threshold() {
        let b = sobolev_basis(&Matrix::<f64>::identity(4), 1e-3).unwrap();
        assert_eq!(b.width(), 4);
        assert!(b.h.iter().all(|&h| h == 1.0));
        let b = sobolev_basis(&Matrix::from_diag(&[1.0, 1e-5]), 1e-3).unwrap();
        assert_eq!(b.width(), 1);
        assert!(sobolev_basis(&Matrix::<f64>::zeros(3, 3), 1e-3).is_err());
    }

    #[test]
    fn theta_shift_cancels_on_harmonic_direction() {
        // dim 4 (M = 2): one E-null direction.
        let g = Matrix::from_diag(&[1.0, 2.0, 0.5, 1.5]);
        let e = Matrix::from_diag(&[0.0, 3.0, 1.0, 2.0]);
        let f = fm(g, e);
        let basis = sobolev_basis(&f.sobolev, 1e-3).unwrap();
        let th = solve_theta(&f, &basis, 1.0).unwrap();
        assert!(th.nus[0].abs() < 1e-8);
        let intro = solve_intro(&f, &basis).unwrap();
        for (a, b) in intro.nus.iter().zip(&th.nus) {
            assert!((a - b).abs() < 1e-10);
        }
        for r in intro.residuals.iter().chain(&th.residuals) {
            assert!(*r <= 1e-6 * intro.l_norm.max(1.0));
        }
        assert!(solve_theta(&f, &basis, 0.0).is_err());
        assert!(solve_theta(&f, &basis, -1.0).is_err());
    }

    #[test]
    fn betti_on_reference_spectra() {
        let mobius = [0.0242, 1.0415, 1.0449, 3.8684, 3.8948, 8.0352, 8.1018, 8.9369];
        assert_eq!(betti_estimate(&mobius, 0.05, false).unwrap(), 1);
        assert_eq!(betti_estimate(&mobius, 0.05, true).unwrap(), 1);
        let genus2 = [0.0021, 0.0026, 0.0026, 0.0041, 0.0893, 0.0901, 0.2151, 0.2175];
        assert_eq!(betti_estimate(&genus2, 0.05, true).unwrap(), 4);
        let sphere = [1.9349, 1.9521, 1.9781, 1.9817, 2.0042, 2.0172, 5.8001, 5.8142];
        assert_eq!(betti_estimate(&sphere, 0.05, false).unwrap(), 0);
        assert_eq!(betti_estimate(&sphere, 0.05, true).unwrap(), 0);
        let torus = [0.0040, 0.0093, 0.2574, 0.2575, 0.2575, 0.2587, 0.8061, 0.8067];
        assert_eq!(betti_estimate(&torus, 0.05, false).unwrap(), 2);
        assert_eq!(betti_estimate(&torus, 0.05, true).unwrap(), 2);
        // This attractor spectrum has its largest jump after the third value.
        let l63 = [0.0011, 0.0017, 0.0030, 0.0072, 0.0105, 0.0109, 0.0205, 0.0262];
        assert_eq!(betti_estimate(&l63, 0.05, true).unwrap(), 3);
        assert!(matches!(betti_estimate::<f64>(&[], 0.05, false), Err(SecError::EmptySpectrum)));
    }
}
