//! Frame coefficients, dual-frame coefficients and operator matrices of vector fields.

use crate::error::{Result, SecError};
use crate::numerics::{pinv, Matrix};
use crate::scalar::Real;
use crate::spectral_tensors::{SecTensorSet, Tensor4};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameKind {
    /// Elements φ_p dφ_q for all (p, q).
    Nonsymmetric,
    /// Elements φ_p dφ_q − φ_q dφ_p for p < q.
    Antisymmetric,
}

impl FrameKind {
    pub fn name(self) -> &'static str {
        match self {
            FrameKind::Nonsymmetric => "nonsymmetric",
            FrameKind::Antisymmetric => "antisymmetric",
        }
    }
}

impl std::str::FromStr for FrameKind {
    type Err = SecError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonsymmetric" | "nonsym" => Ok(FrameKind::Nonsymmetric),
            "antisymmetric" | "antisym" => Ok(FrameKind::Antisymmetric),
            _ => Err(SecError::InvalidArgument(format!("unknown frame kind `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FrameScaling {
    #[default]
    Unit,
    /// s_k = exp(−λ_q / 2).
    Exponential,
    /// s_k = 1/√(1 + λ_p).
    H1,
}

/// Enumeration k ↔ (p_k, q_k) of frame elements plus their scaling.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameIndex {
    pub m: usize,
    pub kind: FrameKind,
    pub scaling: FrameScaling,
    pairs: Vec<(usize, usize)>,
}

impl FrameIndex {
    pub fn new(m: usize, kind: FrameKind, scaling: FrameScaling) -> Self {
        let mut pairs = Vec::new();
        for p in 0..m {
            let start = match kind {
                FrameKind::Nonsymmetric => 0,
                FrameKind::Antisymmetric => p + 1,
            };
            for q in start..m {
                pairs.push((p, q));
            }
        }
        FrameIndex { m, kind, scaling, pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pair(&self, k: usize) -> (usize, usize) {
        self.pairs[k]
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Position of `(p, q)`, if enumerated.
    pub fn position(&self, p: usize, q: usize) -> Option<usize> {
        if p >= self.m || q >= self.m {
            return None;
        }
        match self.kind {
            FrameKind::Nonsymmetric => Some(p * self.m + q),
            FrameKind::Antisymmetric if p < q => Some(p * self.m - p * (p + 1) / 2 + (q - p - 1)),
            FrameKind::Antisymmetric => None,
        }
    }

    pub fn scales<T: Real>(&self, lambdas: &[T]) -> Vec<T> {
        let half = T::lit(0.5);
        self.pairs
            .iter()
            .map(|&(p, q)| match self.scaling {
                FrameScaling::Unit => T::one(),
                FrameScaling::Exponential => (-half * lambdas[q]).exp(),
                FrameScaling::H1 => T::one() / (T::one() + lambdas[p]).sqrt(),
            })
            .collect()
    }
}

/// A sequence indexed by a [`FrameIndex`].
#[derive(Clone, Debug, PartialEq)]
pub struct FrameCoefficients<T> {
    pub index: FrameIndex,
    pub values: Vec<T>,
}

impl<T: Real> FrameCoefficients<T> {
    pub fn new(index: FrameIndex, values: Vec<T>) -> Result<Self> {
        if values.len() != index.len() {
            return Err(SecError::Shape(format!("{} coefficients for {} frame elements", values.len(), index.len())));
        }
        Ok(FrameCoefficients { index, values })
    }

    pub fn zeros(index: FrameIndex) -> Self {
        let values = vec![T::zero(); index.len()];
        FrameCoefficients { index, values }
    }

    pub fn get(&self, p: usize, q: usize) -> T {
        self.index.position(p, q).map_or(T::zero(), |k| self.values[k])
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Normalization {
    #[default]
    Plain,
    /// Column j divided by √(1 + λ_j).
    H1,
}

/// M×M matrix with entry (i, j) = ⟨φ_i, v(φ_j)⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorRep<T> {
    pub matrix: Matrix<T>,
    pub normalization: Normalization,
}

impl<T: Real> OperatorRep<T> {
    pub fn plain(matrix: Matrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(SecError::NotSquare { rows: matrix.rows(), cols: matrix.cols() });
        }
        if !matrix.all_finite() {
            return Err(SecError::NonFinite("operator matrix"));
        }
        Ok(OperatorRep { matrix, normalization: Normalization::Plain })
    }

    pub fn to_h1(&self, lambdas: &[T]) -> Result<Self> {
        match self.normalization {
            Normalization::H1 => Ok(self.clone()),
            Normalization::Plain => {
                let n = self.matrix.rows();
                let r: Vec<T> = lambdas[..n].iter().map(|&l| T::one() / (T::one() + l).sqrt()).collect();
                Ok(OperatorRep {
                    matrix: self.matrix.scale_rows_cols(&vec![T::one(); n], &r),
                    normalization: Normalization::H1,
                })
            }
        }
    }

    /// Apply to Fourier coefficients of a function: coefficients of v(f).
    pub fn apply(&self, fhat: &[T]) -> Result<Vec<T>> {
        if self.normalization != Normalization::Plain {
            return Err(SecError::InvalidArgument("apply needs a plain-normalized operator".into()));
        }
        self.matrix.matvec(fhat)
    }
}

fn check_m<T: Real>(index: &FrameIndex, t: &SecTensorSet<T>) -> Result<()> {
    if index.m != t.m {
        return Err(SecError::Shape(format!("frame has M = {}, tensors have M = {}", index.m, t.m)));
    }
    Ok(())
}

/// V_kl = Σ_ij s_ij a_ij G_ijkl, or the H contraction for the antisymmetric kind.
pub fn frame_to_operator<T: Real>(a: &FrameCoefficients<T>, t: &SecTensorSet<T>) -> Result<OperatorRep<T>> {
    check_m(&a.index, t)?;
    let tensor: &Tensor4<T> = match a.index.kind {
        FrameKind::Nonsymmetric => &t.gram,
        FrameKind::Antisymmetric => &t.h,
    };
    let m = t.m;
    let s = a.index.scales(&t.lambdas);
    let mut v = Matrix::zeros(m, m);
    for (k, &(i, j)) in a.index.pairs().iter().enumerate() {
        let coef = a.values[k] * s[k];
        if coef == T::zero() {
            continue;
        }
        let off = (i * m + j) * m * m;
        for (dst, &x) in v.as_mut_slice().iter_mut().zip(&tensor.as_slice()[off..off + m * m]) {
            *dst += coef * x;
        }
    }
    OperatorRep::plain(v)
}

/// v̂′_k = s_k L_pq, or s_k (L_pq − L_qp) for the antisymmetric kind.
pub fn operator_to_dual_frame<T: Real>(
    l: &OperatorRep<T>,
    index: &FrameIndex,
    lambdas: &[T],
) -> Result<FrameCoefficients<T>> {
    if l.normalization != Normalization::Plain {
        return Err(SecError::InvalidArgument("dual-frame coefficients need a plain operator".into()));
    }
    if l.matrix.rows() != index.m {
        return Err(SecError::Shape(format!(
            "operator is {}x{}, frame has M = {}",
            l.matrix.rows(),
            l.matrix.cols(),
            index.m
        )));
    }
    let s = index.scales(lambdas);
    let lm = &l.matrix;
    let values = index
        .pairs()
        .iter()
        .zip(&s)
        .map(|(&(p, q), &sk)| match index.kind {
            FrameKind::Nonsymmetric => sk * lm[(p, q)],
            FrameKind::Antisymmetric => sk * (lm[(p, q)] - lm[(q, p)]),
        })
        .collect();
    FrameCoefficients::new(index.clone(), values)
}

/// Restrict a flattened four-index tensor to the enumerated pairs.
pub fn restrict<T: Real>(flat: &Matrix<T>, index: &FrameIndex) -> Matrix<T> {
    let m = index.m;
    let r: Vec<usize> = index.pairs().iter().map(|&(p, q)| p * m + q).collect();
    flat.principal(&r)
}

/// Frame-coordinate Grammian, energy and Sobolev Grammian, with scaling applied.
#[derive(Clone, Debug)]
pub struct FrameMatrices<T> {
    pub index: FrameIndex,
    pub gram: Matrix<T>,
    pub energy: Matrix<T>,
    pub sobolev: Matrix<T>,
}

pub fn frame_matrices<T: Real>(t: &SecTensorSet<T>, index: &FrameIndex) -> Result<FrameMatrices<T>> {
    check_m(index, t)?;
    let (g, e) = match index.kind {
        FrameKind::Nonsymmetric => (&t.gram, &t.energy),
        FrameKind::Antisymmetric => (&t.gram_hat, &t.energy_hat),
    };
    let s = index.scales(&t.lambdas);
    let scaled = |x: &Tensor4<T>| restrict(&x.flatten(), index).scale_rows_cols(&s, &s);
    let gram = scaled(g);
    let energy = scaled(e);
    let sobolev = gram.add(&energy)?;
    Ok(FrameMatrices { index: index.clone(), gram, energy, sobolev })
}

/// Pseudo-inverse of the scaled frame Gram, reusable across many fields.
#[derive(Clone, Debug)]
pub struct DualSolver<T> {
    pub index: FrameIndex,
    pinv: Matrix<T>,
}

impl<T: Real> DualSolver<T> {
    pub fn new(t: &SecTensorSet<T>, index: &FrameIndex, rtol: T) -> Result<Self> {
        let fm = frame_matrices(t, index)?;
        Ok(DualSolver { index: index.clone(), pinv: pinv(&fm.gram, rtol)? })
    }

    pub fn solve(&self, vprime: &FrameCoefficients<T>) -> Result<FrameCoefficients<T>> {
        if vprime.index != self.index {
            return Err(SecError::KindMismatch("dual coefficients use a different frame".into()));
        }
        FrameCoefficients::new(self.index.clone(), self.pinv.matvec(&vprime.values)?)
    }
}

/// Minimum-norm frame coefficients a with (S G S) a = v̂′.
pub fn dual_to_frame<T: Real>(
    vprime: &FrameCoefficients<T>,
    t: &SecTensorSet<T>,
    rtol: T,
) -> Result<FrameCoefficients<T>> {
    DualSolver::new(t, &vprime.index, rtol)?.solve(vprime)
}

pub const DEFAULT_PINV_RTOL: f64 = 1e-3;

/// Frame coefficients of grad f: f̂_j at (0, j).
pub fn gradient_coeffs<T: Real>(fhat: &[T], index: &FrameIndex, lambdas: &[T]) -> Result<FrameCoefficients<T>> {
    if index.kind != FrameKind::Nonsymmetric {
        return Err(SecError::KindMismatch("gradient fields need the nonsymmetric frame".into()));
    }
    let s = index.scales(lambdas);
    let mut out = FrameCoefficients::zeros(index.clone());
    for (j, &f) in fhat.iter().enumerate().take(index.m).skip(1) {
        let k = index.position(0, j).expect("nonsymmetric index covers (0, j)");
        out.values[k] = f / s[k];
    }
    Ok(out)
}
