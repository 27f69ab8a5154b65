//! Dense linear algebra used by every other module.

mod eigen;
mod matrix;
mod svd;

pub use eigen::{checked_symmetric, sym_eig, sym_eig_largest, sym_geig, EigenDecomposition};
pub use matrix::{axpy, dot, norm, Matrix};
pub use svd::{pinv, svd, Svd};
