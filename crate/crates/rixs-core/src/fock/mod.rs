//! Determinant basis at fixed particle number and spin projection, and
//! sparse second-quantized operators over it: the electronic Hamiltonian,
//! the particle-number operator and the (core-valence separated) dipole.

mod basis;
mod build;
mod sparse;

pub use basis::{build_basis, sector_dimension, ManyBodyBasis};
pub use build::{
    build_cvs_dipole, build_full_dipole, build_hamiltonian, build_number_operator,
    cvs_dipole_matrix, DipoleMode,
};
pub use sparse::SparseOperator;

use thiserror::Error;

/// Matrix elements with absolute value below this are dropped at assembly.
pub const ASSEMBLY_DROP_TOL: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("infeasible sector (n_orb={n_orb}, n_elec={n_elec}, 2Sz={two_sz}): {reason}")]
    InfeasibleSector {
        n_orb: usize,
        n_elec: usize,
        two_sz: i32,
        reason: String,
    },
    #[error("basis dimension {0} does not fit the address space")]
    DimensionOverflow(String),
    #[error("operator dimension {op} does not match basis dimension {basis}")]
    DimensionMismatch { op: usize, basis: usize },
    #[error("basis has {basis} orbitals but integral set has {integrals}")]
    OrbitalMismatch { basis: usize, integrals: usize },
    #[error("polarization vector must be finite and nonzero")]
    InvalidPolarization,
    #[error("integral set carries no dipole integrals (parse a sidecar first)")]
    MissingDipole,
    #[error(
        "no core orbitals are tagged; the core-valence separated dipole is undefined. \
         Tag core orbitals in the sidecar or use full-dipole mode"
    )]
    EmptyCoreSet,
}
