//! Block-invariant symmetry shift: H_B = H - a1 N - a2 N^2
//! - (1/2) sum_pq beta_pq (c+_p c_q (N - N_e) + h.c.), re-expressed in the
//! same (h, V) tensor layout as the input Hamiltonian, plus the associated
//! one-body kappa matrix whose eigenvalues feed the 1-norm.

use nalgebra::DMatrix;

use crate::qchem_io::IntegralSet;

use super::{BlissError, BlissParams};

/// Shifted Hamiltonian tensors, same layout and conventions as
/// [`IntegralSet`] (chemists' two-body with 8-fold symmetry).
#[derive(Debug, Clone)]
pub struct ShiftedTensors {
    pub n_orb: usize,
    pub h: Vec<f64>,
    pub v: Vec<f64>,
    /// Scalar carried through unchanged (the shift has no c-number part on
    /// top of the input offset).
    pub constant: f64,
}

impl ShiftedTensors {
    #[inline]
    pub fn h_at(&self, p: usize, q: usize) -> f64 {
        self.h[p * self.n_orb + q]
    }

    #[inline]
    pub fn v_at(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_orb;
        self.v[((p * n + q) * n + r) * n + s]
    }

    /// Integral set carrying the shifted tensors (dipole and tags copied),
    /// for building the shifted sector Hamiltonian.
    pub fn to_integral_set(&self, template: &IntegralSet) -> IntegralSet {
        IntegralSet {
            n_orb: self.n_orb,
            n_elec: template.n_elec,
            two_sz: template.two_sz,
            e_frozen: self.constant,
            h: self.h.clone(),
            v: self.v.clone(),
            dipole: template.dipole.clone(),
            core_orbitals: template.core_orbitals.clone(),
        }
    }
}

/// Applies the symmetry shift. On any state of the N_e-electron sector the
/// shifted Hamiltonian acts as H - a1 N_e - a2 N_e^2; off the sector its
/// spectrum is deformed, which is what shrinks the 1-norm.
pub fn apply_bliss(
    set: &IntegralSet,
    params: &BlissParams,
    n_e: usize,
) -> Result<ShiftedTensors, BlissError> {
    let n = set.n_orb;
    params.check(n)?;
    let mut h = set.h.clone();
    let mut v = set.v.clone();
    let ne = n_e as f64;
    for p in 0..n {
        h[p * n + p] -= params.alpha1 + params.alpha2;
        for q in 0..n {
            h[p * n + q] += (ne - 1.0) * params.beta[p * n + q];
        }
    }
    for p in 0..n {
        for q in 0..n {
            let b_pq = params.beta[p * n + q];
            let d_pq = if p == q { 1.0 } else { 0.0 };
            for r in 0..n {
                for s in 0..n {
                    let d_rs = if r == s { 1.0 } else { 0.0 };
                    let b_rs = params.beta[r * n + s];
                    v[((p * n + q) * n + r) * n + s] -=
                        2.0 * params.alpha2 * d_pq * d_rs + b_pq * d_rs + d_pq * b_rs;
                }
            }
        }
    }
    Ok(ShiftedTensors {
        n_orb: n,
        h,
        v,
        constant: set.e_frozen,
    })
}

/// The one-body matrix diagonalized for the THC z-operator part:
///
///   kappa_pq = h~_pq - 1/2 sum_r V_prrq + sum_r V~_pqrr
///              - a1 delta_pq + 2 N_e beta_pq
///
/// taken verbatim with the unshifted V in the exchange-like sum and the
/// shifted V~ in the trace-like sum; a regression test pins this mixed
/// form. Returns kappa (row-major) and its eigenvalues ascending.
pub fn kappa_matrix(
    original: &IntegralSet,
    shifted: &ShiftedTensors,
    params: &BlissParams,
    n_e: usize,
) -> Result<(Vec<f64>, Vec<f64>), BlissError> {
    let n = original.n_orb;
    if shifted.n_orb != n {
        return Err(BlissError::DimensionMismatch(format!(
            "shifted tensors for {} orbitals, integrals for {n}",
            shifted.n_orb
        )));
    }
    params.check(n)?;
    let ne = n_e as f64;
    let mut kappa = vec![0.0; n * n];
    for p in 0..n {
        for q in 0..n {
            let mut x = shifted.h_at(p, q);
            for r in 0..n {
                x -= 0.5 * original.v_at(p, r, r, q);
                x += shifted.v_at(p, q, r, r);
            }
            if p == q {
                x -= params.alpha1;
            }
            x += 2.0 * ne * params.beta[p * n + q];
            kappa[p * n + q] = x;
        }
    }
    let mut defect = 0.0f64;
    for p in 0..n {
        for q in 0..p {
            defect = defect.max((kappa[p * n + q] - kappa[q * n + p]).abs());
        }
    }
    if defect > 1e-10 {
        return Err(BlissError::AsymmetricKappa { defect });
    }
    // Symmetrize roundoff before diagonalizing.
    for p in 0..n {
        for q in 0..p {
            let avg = 0.5 * (kappa[p * n + q] + kappa[q * n + p]);
            kappa[p * n + q] = avg;
            kappa[q * n + p] = avg;
        }
    }
    let m = DMatrix::from_fn(n, n, |i, j| kappa[i * n + j]);
    let mut t: Vec<f64> = nalgebra::SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    t.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok((kappa, t))
}
