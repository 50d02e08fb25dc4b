//! Second-quantized operator assembly over a determinant basis.
//!
//! The Hamiltonian is
//!   H = E_frozen + sum_pq h_pq c+_p c_q
//!       + 1/2 sum_pqrs V_pqrs sum_ss' c+_ps c+_rs' c_ss' c_qs
//! with V in chemists' notation, evaluated through Slater-Condon rules with
//! explicit bit-mask sign bookkeeping. Rows are assembled independently and
//! in parallel.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::qchem_io::IntegralSet;

use super::{FockError, ManyBodyBasis, SparseOperator};

#[inline]
fn below(mask: u64, p: usize) -> u32 {
    (mask & ((1u64 << p) - 1)).count_ones()
}

/// Sign and new mask for annihilating orbital `p` (caller guarantees occupied).
#[inline]
fn annihilate(mask: u64, p: usize) -> (u64, f64) {
    let sign = if below(mask, p) % 2 == 0 { 1.0 } else { -1.0 };
    (mask & !(1u64 << p), sign)
}

/// Sign and new mask for creating orbital `p` (caller guarantees empty).
#[inline]
fn create(mask: u64, p: usize) -> (u64, f64) {
    let sign = if below(mask, p) % 2 == 0 { 1.0 } else { -1.0 };
    (mask | (1u64 << p), sign)
}

/// Sign of the same-spin single c+_a c_i on `mask`.
#[inline]
fn single_sign(mask: u64, i: usize, a: usize) -> (u64, f64) {
    let (m1, s1) = annihilate(mask, i);
    let (m2, s2) = create(m1, a);
    (m2, s1 * s2)
}

/// Sign of the same-spin double c+_a c+_b c_j c_i on `mask`.
#[inline]
fn double_sign(mask: u64, i: usize, j: usize, a: usize, b: usize) -> (u64, f64) {
    let (m1, s1) = annihilate(mask, i);
    let (m2, s2) = annihilate(m1, j);
    let (m3, s3) = create(m2, b);
    let (m4, s4) = create(m3, a);
    (m4, s1 * s2 * s3 * s4)
}

fn bits(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&p| mask >> p & 1 == 1).collect()
}

/// Builds the electronic Hamiltonian of the sector. Diagonal includes the
/// frozen-core offset.
pub fn build_hamiltonian(
    set: &IntegralSet,
    basis: &ManyBodyBasis,
) -> Result<SparseOperator, FockError> {
    if set.n_orb != basis.n_orb() {
        return Err(FockError::OrbitalMismatch {
            basis: basis.n_orb(),
            integrals: set.n_orb,
        });
    }
    let n = set.n_orb;
    let dim = basis.dimension();
    let rows: Vec<Vec<(usize, Complex64)>> = (0..dim)
        .into_par_iter()
        .map(|row| {
            let (up, down) = basis.state(row);
            let occ_up = bits(up, n);
            let occ_down = bits(down, n);
            let virt_up = bits(!up, n);
            let virt_down = bits(!down, n);
            let rho: Vec<f64> = (0..n)
                .map(|p| (up >> p & 1) as f64 + (down >> p & 1) as f64)
                .collect();

            let mut entries: Vec<(usize, Complex64)> = Vec::new();

            // Diagonal.
            let mut diag = set.e_frozen;
            for p in 0..n {
                diag += rho[p] * set.h_at(p, p);
            }
            let mut direct = 0.0;
            for p in 0..n {
                if rho[p] == 0.0 {
                    continue;
                }
                direct -= rho[p] * set.v_at(p, p, p, p);
                for q in 0..n {
                    direct += rho[p] * rho[q] * set.v_at(p, p, q, q);
                }
            }
            let mut exch = 0.0;
            for occ in [&occ_up, &occ_down] {
                for &i in occ.iter() {
                    for &j in occ.iter() {
                        if i != j {
                            exch += set.v_at(i, j, j, i);
                        }
                    }
                }
            }
            diag += 0.5 * (direct - exch);
            entries.push((row, Complex64::new(diag, 0.0)));

            // Single excitations within each spin channel.
            for (spin_mask, is_up, occ, virt) in [
                (up, true, &occ_up, &virt_up),
                (down, false, &occ_down, &virt_down),
            ] {
                for &i in occ.iter() {
                    for &a in virt.iter() {
                        let mut m = set.h_at(a, i);
                        for p in 0..n {
                            if rho[p] != 0.0 {
                                m += rho[p] * set.v_at(a, i, p, p);
                            }
                        }
                        for &j in occ.iter() {
                            m -= set.v_at(a, j, j, i);
                        }
                        if m == 0.0 {
                            continue;
                        }
                        let (new_mask, sign) = single_sign(spin_mask, i, a);
                        let col = if is_up {
                            basis.index_of(new_mask, down)
                        } else {
                            basis.index_of(up, new_mask)
                        }
                        .expect("single excitation stays in sector");
                        entries.push((col, Complex64::new(sign * m, 0.0)));
                    }
                }
            }

            // Same-spin double excitations.
            for (spin_mask, is_up, occ, virt) in [
                (up, true, &occ_up, &virt_up),
                (down, false, &occ_down, &virt_down),
            ] {
                for (ii, &i) in occ.iter().enumerate() {
                    for &j in occ.iter().skip(ii + 1) {
                        for (ai, &a) in virt.iter().enumerate() {
                            for &b in virt.iter().skip(ai + 1) {
                                let m = set.v_at(a, i, b, j) - set.v_at(a, j, b, i);
                                if m == 0.0 {
                                    continue;
                                }
                                let (new_mask, sign) = double_sign(spin_mask, i, j, a, b);
                                let col = if is_up {
                                    basis.index_of(new_mask, down)
                                } else {
                                    basis.index_of(up, new_mask)
                                }
                                .expect("double excitation stays in sector");
                                entries.push((col, Complex64::new(sign * m, 0.0)));
                            }
                        }
                    }
                }
            }

            // Opposite-spin double excitations.
            for &i in occ_up.iter() {
                for &a in virt_up.iter() {
                    let (new_up, sign_up) = single_sign(up, i, a);
                    for &j in occ_down.iter() {
                        for &b in virt_down.iter() {
                            let m = set.v_at(a, i, b, j);
                            if m == 0.0 {
                                continue;
                            }
                            let (new_down, sign_down) = single_sign(down, j, b);
                            let col = basis
                                .index_of(new_up, new_down)
                                .expect("double excitation stays in sector");
                            entries.push((col, Complex64::new(sign_up * sign_down * m, 0.0)));
                        }
                    }
                }
            }

            // Row of a hermitian operator: conjugate of the generated column.
            for (_, v) in entries.iter_mut() {
                *v = v.conj();
            }
            entries
        })
        .collect();
    Ok(SparseOperator::from_rows(rows, true))
}

/// One-body operator sum_pq m_pq c+_ps c_qs from a real symmetric matrix.
fn build_one_body(matrix: &[f64], basis: &ManyBodyBasis) -> SparseOperator {
    let n = basis.n_orb();
    let dim = basis.dimension();
    let at = |p: usize, q: usize| matrix[p * n + q];
    let rows: Vec<Vec<(usize, Complex64)>> = (0..dim)
        .into_par_iter()
        .map(|row| {
            let (up, down) = basis.state(row);
            let mut entries: Vec<(usize, Complex64)> = Vec::new();
            let mut diag = 0.0;
            for p in 0..n {
                let rho = (up >> p & 1) as f64 + (down >> p & 1) as f64;
                diag += rho * at(p, p);
            }
            if diag != 0.0 {
                entries.push((row, Complex64::new(diag, 0.0)));
            }
            for (spin_mask, is_up) in [(up, true), (down, false)] {
                for i in bits(spin_mask, n) {
                    for a in bits(!spin_mask, n) {
                        let m = at(a, i);
                        if m == 0.0 {
                            continue;
                        }
                        let (new_mask, sign) = single_sign(spin_mask, i, a);
                        let col = if is_up {
                            basis.index_of(new_mask, down)
                        } else {
                            basis.index_of(up, new_mask)
                        }
                        .expect("single excitation stays in sector");
                        entries.push((col, Complex64::new(sign * m, 0.0)));
                    }
                }
            }
            entries
        })
        .collect();
    SparseOperator::from_rows(rows, true)
}

/// Dipole construction mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DipoleMode {
    /// Core-valence separated: only core<->valence blocks retained.
    Cvs,
    /// Full one-body dipole.
    Full,
}

impl DipoleMode {
    pub fn build(
        self,
        set: &IntegralSet,
        basis: &ManyBodyBasis,
        polarization: [f64; 3],
    ) -> Result<SparseOperator, FockError> {
        match self {
            DipoleMode::Cvs => build_cvs_dipole(set, basis, polarization),
            DipoleMode::Full => build_full_dipole(set, basis, polarization),
        }
    }
}

fn check_polarization(polarization: [f64; 3]) -> Result<(), FockError> {
    if polarization.iter().any(|x| !x.is_finite())
        || polarization.iter().all(|&x| x == 0.0)
    {
        return Err(FockError::InvalidPolarization);
    }
    Ok(())
}

fn dipole_matrix(
    set: &IntegralSet,
    basis: &ManyBodyBasis,
    polarization: [f64; 3],
) -> Result<Vec<f64>, FockError> {
    if set.n_orb != basis.n_orb() {
        return Err(FockError::OrbitalMismatch {
            basis: basis.n_orb(),
            integrals: set.n_orb,
        });
    }
    check_polarization(polarization)?;
    set.dipole_along(polarization).ok_or(FockError::MissingDipole)
}

/// The CVS one-body dipole matrix (core<->valence blocks of the polarized
/// dipole, other blocks zeroed), as a flat n x n matrix. Shared between the
/// operator builder and the block-encoding 1-norm.
pub fn cvs_dipole_matrix(
    set: &IntegralSet,
    polarization: [f64; 3],
) -> Result<Vec<f64>, FockError> {
    check_polarization(polarization)?;
    let mut d = set.dipole_along(polarization).ok_or(FockError::MissingDipole)?;
    if set.core_orbitals.is_empty() {
        return Err(FockError::EmptyCoreSet);
    }
    let n = set.n_orb;
    let mut is_core = vec![false; n];
    for &c in &set.core_orbitals {
        is_core[c] = true;
    }
    for p in 0..n {
        for q in 0..n {
            if is_core[p] == is_core[q] {
                d[p * n + q] = 0.0;
            }
        }
    }
    Ok(d)
}

/// Core-valence separated dipole operator along `polarization`.
pub fn build_cvs_dipole(
    set: &IntegralSet,
    basis: &ManyBodyBasis,
    polarization: [f64; 3],
) -> Result<SparseOperator, FockError> {
    if set.n_orb != basis.n_orb() {
        return Err(FockError::OrbitalMismatch {
            basis: basis.n_orb(),
            integrals: set.n_orb,
        });
    }
    let d = cvs_dipole_matrix(set, polarization)?;
    Ok(build_one_body(&d, basis))
}

/// Full (unmasked) dipole operator along `polarization`.
pub fn build_full_dipole(
    set: &IntegralSet,
    basis: &ManyBodyBasis,
    polarization: [f64; 3],
) -> Result<SparseOperator, FockError> {
    let d = dipole_matrix(set, basis, polarization)?;
    Ok(build_one_body(&d, basis))
}

/// Particle-number operator on the fixed sector: N_e times the identity.
pub fn build_number_operator(basis: &ManyBodyBasis) -> SparseOperator {
    SparseOperator::scaled_identity(
        basis.dimension(),
        Complex64::new(basis.n_elec() as f64, 0.0),
    )
}
