//! Spectral exterior calculus on point clouds: Laplace–Beltrami eigenbases from
//! diffusion maps, closed-form 1-form tensors, and the Galerkin 1-Laplacian.
//!
//! Everything is generic over the scalar type through [`Real`]; the aliases
//! below fix it to `f64`.

// NaN-rejecting guards are written as `!(x > 0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datasets;
pub mod diffusion_maps;
pub mod error;
pub mod frames;
pub mod hodge1;
pub mod numerics;
pub mod pipeline;
pub mod pushforward;
pub mod scalar;
pub mod spectral_tensors;

pub use error::{Result, SecError};
pub use scalar::Real;

pub type Matrix = numerics::Matrix<f64>;
pub type PointCloud = datasets::PointCloud<f64>;
pub type SpectralBasis = diffusion_maps::SpectralBasis<f64>;
pub type SecTensorSet = spectral_tensors::SecTensorSet<f64>;
pub type Tensor4 = spectral_tensors::Tensor4<f64>;
pub type FrameCoefficients = frames::FrameCoefficients<f64>;
pub type OperatorRep = frames::OperatorRep<f64>;
pub type GalerkinBasis = hodge1::GalerkinBasis<f64>;
pub type EigenformSet = hodge1::EigenformSet<f64>;
pub type ArrowField = pushforward::ArrowField<f64>;
pub type Analysis = pipeline::Analysis<f64>;
