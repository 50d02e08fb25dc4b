//! Exact simulation of RIXS/XAS spectra for small active-space electronic
//! Hamiltonians, together with a matrix-scale emulator of a fault-tolerant
//! qubitized RIXS sampling algorithm and its logical-resource estimates.
//!
//! The pipeline: parse integrals ([`qchem_io`]), build the determinant basis
//! and second-quantized operators ([`fock`]), diagonalize and evaluate
//! Kramers-Heisenberg amplitudes ([`exact_spectra`]), expand the broadened
//! Green's function in Chebyshev polynomials ([`resolvent`]), emulate
//! RIXS-state preparation and windowed phase-estimation sampling
//! ([`emulator`]), reduce the Hamiltonian 1-norm with a symmetry shift and
//! tensor-hypercontraction fit ([`bliss_thc`]), and assemble qubit/Toffoli
//! cost reports ([`resources`]).

pub mod bliss_thc;
pub mod emulator;
pub mod exact_spectra;
pub mod fock;
pub mod qchem_io;
pub mod resolvent;
pub mod resources;
pub mod units;
