//! Block-invariant symmetry shift (BLISS) and tensor-hypercontraction (THC)
//! factorization of the shifted Hamiltonian, the associated 1-norm, and the
//! joint cost-function optimization that keeps it small.

mod optim;
mod shift;
mod thc;

pub use shift::{apply_bliss, kappa_matrix, ShiftedTensors};
pub use thc::{
    default_rank, default_rho, fit_thc, optimize_bliss_thc, reconstruct_v, BlissOptimization,
    FitConfig, FitReport,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BlissError {
    #[error("beta must be a symmetric n_orb x n_orb matrix: {0}")]
    InvalidBeta(String),
    #[error("THC rank must be at least 1")]
    RankZero,
    #[error("1-norm penalty must be non-negative (got {0})")]
    InvalidPenalty(f64),
    #[error("kappa matrix is asymmetric beyond tolerance (defect {defect:.3e}); tensor bug upstream")]
    AsymmetricKappa { defect: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("factor file: {0}")]
    FactorFormat(String),
}

/// Symmetry-shift parameters (Hartree).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlissParams {
    pub alpha1: f64,
    pub alpha2: f64,
    /// Symmetric n_orb x n_orb matrix, row-major.
    pub beta: Vec<f64>,
}

impl BlissParams {
    pub fn zero(n_orb: usize) -> Self {
        BlissParams {
            alpha1: 0.0,
            alpha2: 0.0,
            beta: vec![0.0; n_orb * n_orb],
        }
    }

    pub(crate) fn check(&self, n_orb: usize) -> Result<(), BlissError> {
        if self.beta.len() != n_orb * n_orb {
            return Err(BlissError::InvalidBeta(format!(
                "length {} for {n_orb} orbitals",
                self.beta.len()
            )));
        }
        for p in 0..n_orb {
            for q in 0..p {
                if (self.beta[p * n_orb + q] - self.beta[q * n_orb + p]).abs() > 1e-12 {
                    return Err(BlissError::InvalidBeta(format!(
                        "asymmetric at ({p},{q})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// THC factors of the (shifted) two-body tensor plus the one-body
/// eigenvalues t entering the 1-norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThcFactors {
    pub rank: usize,
    /// Symmetric rank x rank coefficient matrix, row-major.
    pub zeta: Vec<f64>,
    /// Unit vectors u^mu (the first rows of the THC orbital rotations).
    pub u: Vec<Vec<f64>>,
    /// One-body eigenvalues from the kappa matrix.
    pub t: Vec<f64>,
}

/// LCU 1-norm of the BLISS-THC decomposition:
/// sum_p |t_p| + 1/2 sum_{mu nu} |zeta_{mu nu}| - 1/4 sum_mu |zeta_{mu mu}|.
pub fn one_norm(t: &[f64], zeta: &[f64], rank: usize) -> f64 {
    let t_part: f64 = t.iter().map(|x| x.abs()).sum();
    let mut full = 0.0;
    let mut diag = 0.0;
    for mu in 0..rank {
        for nu in 0..rank {
            full += zeta[mu * rank + nu].abs();
        }
        diag += zeta[mu * rank + mu].abs();
    }
    t_part + 0.5 * full - 0.25 * diag
}

/// Serialized factor bundle so resource estimation can run without a refit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorDump {
    pub schema_version: u32,
    pub n_orb: usize,
    pub rank: usize,
    pub zeta: Vec<f64>,
    pub u_vectors: Vec<Vec<f64>>,
    pub t: Vec<f64>,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta: Vec<f64>,
    pub lambda: f64,
}

impl FactorDump {
    pub fn new(n_orb: usize, params: &BlissParams, factors: &ThcFactors, lambda: f64) -> Self {
        FactorDump {
            schema_version: 1,
            n_orb,
            rank: factors.rank,
            zeta: factors.zeta.clone(),
            u_vectors: factors.u.clone(),
            t: factors.t.clone(),
            alpha1: params.alpha1,
            alpha2: params.alpha2,
            beta: params.beta.clone(),
            lambda,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("factor dump serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, BlissError> {
        let dump: FactorDump =
            serde_json::from_str(text).map_err(|e| BlissError::FactorFormat(e.to_string()))?;
        if dump.zeta.len() != dump.rank * dump.rank
            || dump.u_vectors.len() != dump.rank
            || dump.u_vectors.iter().any(|u| u.len() != dump.n_orb)
            || dump.beta.len() != dump.n_orb * dump.n_orb
        {
            return Err(BlissError::FactorFormat(
                "inconsistent factor dimensions".into(),
            ));
        }
        Ok(dump)
    }

    pub fn params(&self) -> BlissParams {
        BlissParams {
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            beta: self.beta.clone(),
        }
    }

    pub fn factors(&self) -> ThcFactors {
        ThcFactors {
            rank: self.rank,
            zeta: self.zeta.clone(),
            u: self.u_vectors.clone(),
            t: self.t.clone(),
        }
    }
}
