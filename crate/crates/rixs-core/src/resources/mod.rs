//! Logical-resource estimation for the qubitized RIXS algorithm: walk-call
//! counts, dipole block-encoding costs, qubit/Toffoli totals and
//! Table-style reports with a pluggable walk-operator cost model.

mod report;
mod walk;

pub use report::{format_sig, table_report, SystemEntry, TableConfig};
pub use walk::{WalkContext, WalkModel};

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::emulator::{amplification_rounds, EmulatorError};
use crate::resolvent::{select_degree, DegreeMode, ResolventError};

#[derive(Debug, Error)]
pub enum ResourceError {
    #[error("{what} must be positive (got {value})")]
    NonPositive { what: &'static str, value: f64 },
    #[error("precision bit counts must be at least 1")]
    ZeroBits,
    #[error("dipole matrix must be square and symmetric")]
    BadDipoleMatrix,
    #[error("system list is empty")]
    EmptySystems,
    #[error(transparent)]
    Degree(#[from] ResolventError),
    #[error(transparent)]
    Rounds(#[from] EmulatorError),
    #[error(transparent)]
    Sector(#[from] crate::fock::FockError),
}

/// Precision and size parameters feeding the cost model.
#[derive(Debug, Clone)]
pub struct CostModelParams {
    /// Alias-sampling precision bits (aleph).
    pub aleph: u32,
    /// Givens-rotation precision bits (beth).
    pub beth: u32,
    /// Dipole coefficient precision bits (aleph_mu).
    pub aleph_mu: u32,
    /// THC rank N_T.
    pub thc_rank: usize,
    /// Active spatial orbitals N_a.
    pub n_orb: usize,
    /// Walk-operator cost plugin.
    pub walk_model: WalkModel,
    /// QPE circuit repetitions charged per spectrum.
    pub shots: u64,
}

impl CostModelParams {
    fn check(&self) -> Result<(), ResourceError> {
        if self.aleph == 0 || self.beth == 0 || self.aleph_mu == 0 {
            return Err(ResourceError::ZeroBits);
        }
        if self.thc_rank == 0 {
            return Err(ResourceError::NonPositive {
                what: "THC rank",
                value: 0.0,
            });
        }
        if self.n_orb == 0 {
            return Err(ResourceError::NonPositive {
                what: "orbital count",
                value: 0.0,
            });
        }
        Ok(())
    }
}

/// Full per-system resource report. Counts compose exactly:
/// T_tot = ((2 K_A + 1) 2 K_G + 2^{n_omega}) T_W and
/// n_tot = 2 N_a + max(n_omega, n_D + 4) + n_W.
#[derive(Debug, Clone, Serialize)]
pub struct ResourceReport {
    pub lambda: f64,
    pub eps_omega_ha: f64,
    pub gamma_ha: f64,
    pub k_g: u64,
    pub p_r: f64,
    pub sqrt_p_r: f64,
    pub k_a: u64,
    pub walk_calls_qpe: u64,
    pub n_omega: u32,
    pub n_d: u64,
    pub n_w: u64,
    pub t_w: u128,
    pub n_tot: u64,
    pub t_tot: u128,
    pub shots: u64,
    /// (2 K_A + 1) 2 K_G / 2^{n_omega}: walk calls spent preparing the
    /// RIXS state per walk call spent inside QPE.
    pub prep_to_qpe_ratio: f64,
}

/// Number of walk-operator calls per QPE circuit for target accuracy
/// `eps_omega` (same units as `lambda`): N = ceil(pi lambda / (sqrt(2) eps)).
pub fn walk_calls(lambda: f64, eps_omega: f64) -> Result<u64, ResourceError> {
    if !(lambda > 0.0) {
        return Err(ResourceError::NonPositive {
            what: "lambda",
            value: lambda,
        });
    }
    if !(eps_omega > 0.0) {
        return Err(ResourceError::NonPositive {
            what: "target accuracy",
            value: eps_omega,
        });
    }
    Ok((std::f64::consts::PI * lambda / (std::f64::consts::SQRT_2 * eps_omega)).ceil() as u64)
}

/// Phase-register width for `n` walk calls: n_omega = ceil(log2 n).
pub fn phase_bits(n: u64) -> u32 {
    ceil_log2(n.max(1))
}

/// Dipole block-encoding ancilla count n_D = 3 ceil(log2 N_a) + 2 aleph_mu + 2
/// and 1-norm lambda_D = sum_p |mu_p| over the eigenvalues of the one-body
/// dipole matrix (identity component dropped). A zero matrix yields
/// lambda_D = 0; downstream success probabilities are then undefined.
pub fn dipole_block_encoding(
    n_orb: usize,
    aleph_mu: u32,
    matrix: &[f64],
) -> Result<(u64, f64), ResourceError> {
    if aleph_mu == 0 {
        return Err(ResourceError::ZeroBits);
    }
    if matrix.len() != n_orb * n_orb {
        return Err(ResourceError::BadDipoleMatrix);
    }
    for p in 0..n_orb {
        for q in 0..p {
            if (matrix[p * n_orb + q] - matrix[q * n_orb + p]).abs() > 1e-10 {
                return Err(ResourceError::BadDipoleMatrix);
            }
        }
    }
    let n_d = 3 * ceil_log2(n_orb as u64) as u64 + 2 * aleph_mu as u64 + 2;
    let m = DMatrix::from_fn(n_orb, n_orb, |i, j| matrix[i * n_orb + j]);
    let lambda_d: f64 = nalgebra::SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .map(|e| e.abs())
        .sum();
    Ok((n_d, lambda_d))
}

fn ceil_log2(n: u64) -> u32 {
    debug_assert!(n >= 1);
    if n == 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Assembles the full resource report.
pub fn totals(
    params: &CostModelParams,
    lambda: f64,
    eps_omega_ha: f64,
    gamma_ha: f64,
    p_r: f64,
    degree_mode: DegreeMode,
) -> Result<ResourceReport, ResourceError> {
    params.check()?;
    let k_g = select_degree(lambda, gamma_ha, degree_mode)? as u64;
    let n_calls = walk_calls(lambda, eps_omega_ha)?;
    let n_omega = phase_bits(n_calls);
    let k_a = amplification_rounds(p_r)?;
    let n_d = 3 * ceil_log2(params.n_orb as u64) as u64 + 2 * params.aleph_mu as u64 + 2;
    let qpe_calls: u128 = 1u128 << n_omega;
    let prep_calls: u128 = (2 * k_a as u128 + 1) * 2 * k_g as u128;
    let ctx = WalkContext {
        aleph: params.aleph,
        beth: params.beth,
        n_thc: params.thc_rank,
        n_orb: params.n_orb,
        total_walk_calls: prep_calls + qpe_calls,
    };
    let (t_w, n_w) = params.walk_model.cost(&ctx);
    let t_tot = (prep_calls + qpe_calls) * t_w;
    let n_tot = 2 * params.n_orb as u64 + (n_omega as u64).max(n_d + 4) + n_w;
    Ok(ResourceReport {
        lambda,
        eps_omega_ha,
        gamma_ha,
        k_g,
        p_r,
        sqrt_p_r: p_r.sqrt(),
        k_a,
        walk_calls_qpe: n_calls,
        n_omega,
        n_d,
        n_w,
        t_w,
        n_tot,
        t_tot,
        shots: params.shots,
        prep_to_qpe_ratio: prep_calls as f64 / qpe_calls as f64,
    })
}
