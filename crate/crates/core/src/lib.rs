//! Spectral analysis of the matrix family `S^{t+1}(I + h(S)) + δJ`: exact
//! non-zero spectra, Jordan structure of the zero eigenvalue, resolvents and
//! pseudospectra, and Gaussian-perturbation ensembles.

pub mod cli;
pub mod cx;
pub mod ensemble;
pub mod error;
pub mod exact_oracle;
pub mod jordan;
pub mod linalg;
pub mod matrix;
pub mod model;
pub mod resolvent;
pub mod scalar;
pub mod spectrum;

pub use error::{Error, Result};
pub use matrix::{DenseMatrix, Matrix};
pub use model::{build_matrix, multiplicities, ModelParams, Multiplicities};
pub use num_complex::Complex64;
