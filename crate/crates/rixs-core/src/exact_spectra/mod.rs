//! Exact and iterative eigensolvers plus the classical Kramers-Heisenberg
//! oracle for XAS and RIXS spectra.

mod eigen;
mod spectrum;

pub use eigen::{diagonalize, DiagMode, SpectralDecomposition, LANCZOS_TOL};
pub use spectrum::{
    rixs_amplitudes, rixs_spectrum, xas_spectrum, SpectrumMeta, SpectrumResult, STICK_MERGE_TOL_HA,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("operator is not hermitian (defect {defect:.3e})")]
    NonHermitian { defect: f64 },
    #[error(
        "iterative eigensolver did not converge after {iterations} iterations \
         (achieved residual {residual:.3e}, requested {requested:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        residual: f64,
        requested: f64,
    },
    #[error("requested {k} eigenpairs from a dimension-{dim} operator")]
    TooManyPairs { k: usize, dim: usize },
    #[error("energy grid is empty")]
    EmptyGrid,
    #[error("energy grid must be strictly increasing")]
    GridNotIncreasing,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}
