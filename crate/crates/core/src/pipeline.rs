//! Point cloud → eigenbasis → tensors → 1-form spectrum.

use crate::datasets::PointCloud;
use crate::diffusion_maps::{diffusion_basis, neighbor_bandwidth, tune_bandwidth, LambdaConversion, SpectralBasis};
use crate::error::{Result, SecError};
use crate::frames::{frame_matrices, FrameIndex, FrameKind, FrameMatrices, FrameScaling};
use crate::hodge1::{sobolev_basis, solve_intro, solve_theta, EigenformSet, GalerkinBasis, Method};
use crate::scalar::Real;
use crate::spectral_tensors::{assemble, SecTensorSet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bandwidth {
    Fixed(f64),
    /// Maximum log-log slope of the kernel sum.
    Tuned,
    /// Twice the mean squared nearest-neighbour distance.
    NeighborScale,
}

impl Bandwidth {
    pub fn name(&self) -> String {
        match self {
            Bandwidth::Fixed(e) => format!("{e}"),
            Bandwidth::Tuned => "auto".into(),
            Bandwidth::NeighborScale => "nn".into(),
        }
    }
}

impl std::str::FromStr for Bandwidth {
    type Err = SecError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Bandwidth::Tuned),
            "nn" => Ok(Bandwidth::NeighborScale),
            _ => match s.parse::<f64>() {
                Ok(e) if e > 0.0 && e.is_finite() => Ok(Bandwidth::Fixed(e)),
                _ => {
                    Err(SecError::InvalidArgument(format!("eps must be a positive number, `auto` or `nn`, got `{s}`")))
                }
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisParams {
    pub eps: Bandwidth,
    pub m: usize,
    pub ms: usize,
    pub kind: FrameKind,
    pub method: Method,
    pub rtol: f64,
    pub conversion: LambdaConversion,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        AnalysisParams {
            eps: Bandwidth::NeighborScale,
            m: 20,
            ms: 100,
            kind: FrameKind::Antisymmetric,
            method: Method::Intro,
            rtol: crate::hodge1::DEFAULT_SOBOLEV_RTOL,
            conversion: LambdaConversion::Log,
        }
    }
}

impl AnalysisParams {
    /// Both solvers use the unit frame; the θ path normalizes through the
    /// Sobolev eigenvalues instead.
    pub fn scaling(&self) -> FrameScaling {
        FrameScaling::Unit
    }

    pub fn frame_index(&self) -> FrameIndex {
        FrameIndex::new(self.m, self.kind, self.scaling())
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(SecError::InvalidArgument(format!("M must be at least 2, got {}", self.m)));
        }
        if self.ms < self.m {
            return Err(SecError::InvalidArgument(format!("M_s ({}) must be at least M ({})", self.ms, self.m)));
        }
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return Err(SecError::InvalidArgument(format!("rtol must lie in (0,1), got {}", self.rtol)));
        }
        if let Method::Theta(t) = self.method {
            if !(t > 0.0 && t.is_finite()) {
                return Err(SecError::InvalidArgument(format!("theta must be positive, got {t}")));
            }
        }
        Ok(())
    }
}

pub fn resolve_bandwidth<T: Real>(cloud: &PointCloud<T>, eps: Bandwidth) -> Result<T> {
    match eps {
        Bandwidth::Fixed(e) => Ok(T::lit(e)),
        Bandwidth::Tuned => tune_bandwidth(cloud),
        Bandwidth::NeighborScale => neighbor_bandwidth(cloud),
    }
}

/// Eigenbasis of the cloud under `params`.
pub fn spectral_stage<T: Real>(cloud: &PointCloud<T>, params: &AnalysisParams) -> Result<SpectralBasis<T>> {
    params.validate()?;
    if cloud.len() < params.ms {
        return Err(SecError::DatasetTooSmall { points: cloud.len(), needed: params.ms });
    }
    let eps = resolve_bandwidth(cloud, params.eps)?;
    diffusion_basis(cloud, eps, params.ms, params.m, params.conversion)
}

/// Everything downstream of the eigenbasis.
#[derive(Clone, Debug)]
pub struct HodgeResult<T> {
    pub tensors: SecTensorSet<T>,
    pub frame: FrameMatrices<T>,
    pub galerkin: GalerkinBasis<T>,
    pub eigenforms: EigenformSet<T>,
}

pub fn hodge_stage<T: Real>(basis: &SpectralBasis<T>, params: &AnalysisParams) -> Result<HodgeResult<T>> {
    params.validate()?;
    let basis = basis.clone().with_m(params.m)?;
    let tensors = assemble(&basis)?;
    let frame = frame_matrices(&tensors, &params.frame_index())?;
    let galerkin = sobolev_basis(&frame.sobolev, T::lit(params.rtol))?;
    let eigenforms = match params.method {
        Method::Intro => solve_intro(&frame, &galerkin)?,
        Method::Theta(t) => solve_theta(&frame, &galerkin, T::lit(t))?,
    };
    Ok(HodgeResult { tensors, frame, galerkin, eigenforms })
}

#[derive(Clone, Debug)]
pub struct Analysis<T> {
    pub basis: SpectralBasis<T>,
    pub hodge: HodgeResult<T>,
}

impl<T: Real> Analysis<T> {
    pub fn nus(&self) -> &[T] {
        &self.hodge.eigenforms.nus
    }
}

pub fn analyze<T: Real>(cloud: &PointCloud<T>, params: &AnalysisParams) -> Result<Analysis<T>> {
    let basis = spectral_stage(cloud, params)?;
    let hodge = hodge_stage(&basis, params)?;
    Ok(Analysis { basis, hodge })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bandwidth_parsing() {
        assert_eq!("auto".parse::<Bandwidth>().unwrap(), Bandwidth::Tuned);
        assert_eq!("nn".parse::<Bandwidth>().unwrap(), Bandwidth::NeighborScale);
        assert_eq!("0.01".parse::<Bandwidth>().unwrap(), Bandwidth::Fixed(0.01));
        assert!("-1".parse::<Bandwidth>().is_err());
        assert!("x".parse::<Bandwidth>().is_err());
    }

    #[test]
    fn parameter_validation() {
        let p = AnalysisParams { ms: 10, m: 20, ..Default::default() };
        assert!(p.validate().is_err());
        let p = AnalysisParams { method: Method::Theta(0.0), ..Default::default() };
        assert!(p.validate().is_err());
        assert!(AnalysisParams::default().validate().is_ok());
    }
}
