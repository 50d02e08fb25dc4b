//! Integral-file ingestion: FCIDUMP plus a dipole sidecar, parsed into an
//! [`IntegralSet`] and written back bit-faithfully.
//!
//! Orbital indices are 1-based in the file formats and 0-based everywhere in
//! memory. Stored tensors are fully symmetry-completed: every value occupies
//! all of its equivalent slots.

mod fcidump;
mod sidecar;

pub use fcidump::{parse_fcidump, write_fcidump};
pub use sidecar::{parse_dipole_sidecar, write_dipole_sidecar};

use thiserror::Error;

/// Tolerance for detecting conflicting duplicate records in input files.
pub const DUPLICATE_TOL: f64 = 1e-10;

/// Tolerance on stored-tensor symmetry.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum QchemIoError {
    #[error("line {line}: malformed header: {msg}")]
    MalformedHeader { line: usize, msg: String },
    #[error("line {line}: malformed record: {msg}")]
    MalformedRecord { line: usize, msg: String },
    #[error("line {line}: orbital index {index} out of range 1..={n_orb}")]
    IndexOutOfRange { line: usize, index: i64, n_orb: usize },
    #[error("line {line}: conflicting duplicate entry for {slot}: {first} vs {second}")]
    ConflictingDuplicate { line: usize, slot: String, first: f64, second: f64 },
    #[error("line {line}: invalid axis token {token:?} (expected x, y or z)")]
    InvalidAxis { line: usize, token: String },
    #[error("sidecar NORB {sidecar} does not match integral set with {base} orbitals")]
    NorbMismatch { sidecar: usize, base: usize },
    #[error("invalid integral set: {0}")]
    Invalid(String),
}

/// Active-space one- and two-electron integrals plus dipole integrals,
/// all in Hartree / atomic units.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSet {
    /// Number of active spatial orbitals.
    pub n_orb: usize,
    /// Number of active electrons.
    pub n_elec: usize,
    /// Twice the spin projection, 2*S_z.
    pub two_sz: i32,
    /// Scalar energy offset (frozen-core energy plus nuclear repulsion).
    pub e_frozen: f64,
    /// One-electron integrals h_pq, row-major n_orb x n_orb, symmetric.
    pub h: Vec<f64>,
    /// Two-electron integrals V_pqrs in chemists' notation with the full
    /// 8-fold symmetry, flattened as ((p*n+q)*n+r)*n+s.
    pub v: Vec<f64>,
    /// Dipole integrals d_pq for the x, y, z axes; absent until a sidecar
    /// is parsed.
    pub dipole: Option<[Vec<f64>; 3]>,
    /// 0-based indices of active orbitals tagged as core (e.g. O 1s-like),
    /// sorted and unique. Used by the core-valence-separated dipole.
    pub core_orbitals: Vec<usize>,
}

impl IntegralSet {
    /// Creates an empty (all-zero) integral set for `n_orb` orbitals.
    pub fn zeros(n_orb: usize, n_elec: usize, two_sz: i32) -> Self {
        IntegralSet {
            n_orb,
            n_elec,
            two_sz,
            e_frozen: 0.0,
            h: vec![0.0; n_orb * n_orb],
            v: vec![0.0; n_orb.pow(4)],
            dipole: None,
            core_orbitals: Vec::new(),
        }
    }

    #[inline]
    pub fn h_at(&self, p: usize, q: usize) -> f64 {
        self.h[p * self.n_orb + q]
    }

    #[inline]
    pub fn v_at(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_orb;
        self.v[((p * n + q) * n + r) * n + s]
    }

    /// Sets h_pq and its symmetric partner.
    pub fn set_h_sym(&mut self, p: usize, q: usize, value: f64) {
        let n = self.n_orb;
        self.h[p * n + q] = value;
        self.h[q * n + p] = value;
    }

    /// Sets V_pqrs and all 8 symmetry-equivalent slots.
    pub fn set_v_sym(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        let n = self.n_orb;
        for (a, b, c, d) in eightfold(p, q, r, s) {
            self.v[((a * n + b) * n + c) * n + d] = value;
        }
    }

    /// Checks the structural invariants: tensor symmetry, sector feasibility
    /// and core-tag validity.
    pub fn validate(&self) -> Result<(), QchemIoError> {
        let n = self.n_orb;
        if self.h.len() != n * n || self.v.len() != n.pow(4) {
            return Err(QchemIoError::Invalid("tensor size mismatch".into()));
        }
        for p in 0..n {
            for q in 0..p {
                if (self.h_at(p, q) - self.h_at(q, p)).abs() > SYMMETRY_TOL {
                    return Err(QchemIoError::Invalid(format!(
                        "h not symmetric at ({p},{q})"
                    )));
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.v_at(p, q, r, s);
                        for (a, b, c, d) in eightfold(p, q, r, s) {
                            if (self.v_at(a, b, c, d) - v).abs() > SYMMETRY_TOL {
                                return Err(QchemIoError::Invalid(format!(
                                    "V lacks 8-fold symmetry at ({p},{q},{r},{s})"
                                )));
                            }
                        }
                    }
                }
            }
        }
        if self.n_elec < 1 || self.n_elec > 2 * n {
            return Err(QchemIoError::Invalid(format!(
                "NELEC {} outside 1..={}",
                self.n_elec,
                2 * n
            )));
        }
        if self.two_sz.unsigned_abs() as usize > self.n_elec {
            return Err(QchemIoError::Invalid(format!(
                "|MS2| {} exceeds NELEC {}",
                self.two_sz.abs(),
                self.n_elec
            )));
        }
        if (self.n_elec as i64 + self.two_sz as i64) % 2 != 0 {
            return Err(QchemIoError::Invalid(
                "NELEC + MS2 must be even".into(),
            ));
        }
        if let Some(d) = &self.dipole {
            for axis in d {
                if axis.len() != n * n {
                    return Err(QchemIoError::Invalid("dipole size mismatch".into()));
                }
            }
        }
        let mut seen = vec![false; n];
        for &c in &self.core_orbitals {
            if c >= n {
                return Err(QchemIoError::Invalid(format!(
                    "core orbital {c} out of range"
                )));
            }
            if seen[c] {
                return Err(QchemIoError::Invalid(format!(
                    "core orbital {c} listed twice"
                )));
            }
            seen[c] = true;
        }
        Ok(())
    }

    /// The dipole matrix along a fixed polarization, sum_a eps_a d^a.
    /// Returns `None` when no sidecar has been parsed.
    pub fn dipole_along(&self, polarization: [f64; 3]) -> Option<Vec<f64>> {
        let d = self.dipole.as_ref()?;
        let n2 = self.n_orb * self.n_orb;
        let mut out = vec![0.0; n2];
        for (axis, eps) in d.iter().zip(polarization) {
            if eps != 0.0 {
                for (o, &x) in out.iter_mut().zip(axis.iter()) {
                    *o += eps * x;
                }
            }
        }
        Some(out)
    }
}

/// The 8 chemists'-notation equivalents of (p,q,r,s).
pub fn eightfold(
    p: usize,
    q: usize,
    r: usize,
    s: usize,
) -> [(usize, usize, usize, usize); 8] {
    [
        (p, q, r, s),
        (q, p, r, s),
        (p, q, s, r),
        (q, p, s, r),
        (r, s, p, q),
        (s, r, p, q),
        (r, s, q, p),
        (s, r, q, p),
    ]
}

/// Canonical representative of the 8-fold orbit, used for duplicate detection.
pub(crate) fn canonical_key(p: usize, q: usize, r: usize, s: usize) -> (usize, usize, usize, usize) {
    *eightfold(p, q, r, s).iter().min().expect("non-empty")
}

/// Result of a parse, carrying non-fatal notes (e.g. ignored ORBSYM).
#[derive(Debug)]
pub struct Parsed {
    pub integrals: IntegralSet,
    pub warnings: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eightfold_orbit_closed() {
        let orbit = eightfold(0, 1, 2, 3);
        for &(a, b, c, d) in &orbit {
            assert_eq!(canonical_key(a, b, c, d), canonical_key(0, 1, 2, 3));
        }
    }

    #[test]
    fn validate_rejects_odd_parity() {
        let set = IntegralSet::zeros(2, 3, 0);
        assert!(set.validate().is_err());
    }

    #[test]
    fn validate_accepts_zeros() {
        let set = IntegralSet::zeros(2, 2, 0);
        set.validate().unwrap();
    }
}
