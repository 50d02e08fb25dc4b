//! RIXS-state preparation, block-encoding success probability and the
//! amplitude-amplification round count.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::fock::SparseOperator;
use crate::resolvent;

use super::EmulatorError;

const ZERO_NORM_TOL: f64 = 1e-300;

/// Normalized RIXS state with the norms entering the success probability.
#[derive(Debug, Clone)]
pub struct RixsState {
    /// Normalized sector vector proportional to D_out^dag G D_in |E_0>.
    pub vector: Vec<Complex64>,
    /// |R| = || D_out^dag G D_in |E_0> || before normalization.
    pub norm_r: f64,
    /// |D_in| = || D_in |E_0> ||.
    pub d_in_norm: f64,
    /// Block-encoding 1-norm of the emission dipole, lambda_D.
    pub lambda_d: f64,
    /// Intermediate-state broadening (Hartree).
    pub gamma: f64,
    /// Incident photon energy (Hartree).
    pub omega_in: f64,
}

/// How the Green's function is applied during preparation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrepMethod {
    /// Dense complex linear solve of (w_I - (H - E_0) + i Gamma) x = D_in|E_0>.
    Exact,
    /// Chebyshev expansion of Gamma G applied by the three-term recurrence.
    Chebyshev { degree: usize, lambda: f64 },
}

/// Prepares the RIXS state from the ground state of `h`.
///
/// `lambda_d` is the block-encoding 1-norm of the emission dipole (from the
/// resource model); it is recorded for the success probability.
#[allow(clippy::too_many_arguments)]
pub fn prepare_rixs_state(
    h: &SparseOperator,
    ground_energy: f64,
    ground_state: &[Complex64],
    d_in: &SparseOperator,
    d_out: &SparseOperator,
    omega_in: f64,
    gamma: f64,
    lambda_d: f64,
    method: PrepMethod,
) -> Result<RixsState, EmulatorError> {
    let dim = h.dim();
    if ground_state.len() != dim || d_in.dim() != dim || d_out.dim() != dim {
        return Err(EmulatorError::DimensionMismatch(
            "hamiltonian, dipoles and ground state must share one dimension".into(),
        ));
    }
    let absorbed = d_in.apply(ground_state);
    let d_in_norm = vec_norm(&absorbed);
    if d_in_norm < 1e-14 {
        return Err(EmulatorError::DarkGroundState);
    }

    let propagated = match method {
        PrepMethod::Exact => {
            // (w_I + E_0 + i Gamma) I - H, solved densely.
            let mut m = h.to_dense();
            m.neg_mut();
            let shift = Complex64::new(omega_in + ground_energy, gamma);
            for i in 0..dim {
                m[(i, i)] += shift;
            }
            let rhs = DVector::from_column_slice(&absorbed);
            let lu = m.lu();
            let x = lu.solve(&rhs).ok_or_else(|| {
                EmulatorError::DimensionMismatch("resolvent solve is singular".into())
            })?;
            x.iter().copied().collect::<Vec<_>>()
        }
        PrepMethod::Chebyshev { degree, lambda } => {
            let r = resolvent::expand(lambda, omega_in, gamma, ground_energy, degree)?;
            let scaled = r.apply(h, &absorbed)?;
            // The expansion approximates Gamma G; undo the Gamma rescaling.
            scaled.into_iter().map(|x| x / gamma).collect()
        }
    };

    let emitted = d_out.apply_adjoint(&propagated);
    let norm_r = vec_norm(&emitted);
    if norm_r < ZERO_NORM_TOL.max(1e-14 * d_in_norm) {
        return Err(EmulatorError::ZeroRixsNorm);
    }
    let vector = emitted.into_iter().map(|x| x / norm_r).collect();
    Ok(RixsState {
        vector,
        norm_r,
        d_in_norm,
        lambda_d,
        gamma,
        omega_in,
    })
}

/// Success probability of the RIXS block-encoding,
/// P_R = (Gamma |R| / (lambda_D |D_in|))^2.
pub fn success_probability_from_norms(
    gamma: f64,
    norm_r: f64,
    lambda_d: f64,
    d_in_norm: f64,
) -> Result<f64, EmulatorError> {
    if lambda_d <= 0.0 {
        return Err(EmulatorError::ZeroDenominator("lambda_D"));
    }
    if d_in_norm <= 0.0 {
        return Err(EmulatorError::ZeroDenominator("|D_in|"));
    }
    let amplitude = gamma * norm_r / (lambda_d * d_in_norm);
    let p = amplitude * amplitude;
    if p > 1.0 + 1e-9 {
        return Err(EmulatorError::InvalidSuccessProbability(p));
    }
    Ok(p.min(1.0))
}

/// Success probability recorded in a prepared state.
pub fn success_probability(state: &RixsState) -> Result<f64, EmulatorError> {
    success_probability_from_norms(state.gamma, state.norm_r, state.lambda_d, state.d_in_norm)
}

/// Amplitude-amplification round count K_A = floor(pi / (4 arcsin sqrt(P_R))).
pub fn amplification_rounds(p_r: f64) -> Result<u64, EmulatorError> {
    if !(p_r > 0.0 && p_r <= 1.0) {
        return Err(EmulatorError::InvalidSuccessProbability(p_r));
    }
    let angle = p_r.sqrt().asin();
    Ok((std::f64::consts::PI / (4.0 * angle)).floor() as u64)
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Dense operator helper for small test systems.
#[cfg(test)]
pub(crate) fn dense_to_sparse(m: &nalgebra::DMatrix<f64>) -> SparseOperator {
    let rows = (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| (j, Complex64::new(m[(i, j)], 0.0)))
                .collect()
        })
        .collect();
    SparseOperator::from_rows(rows, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_spectra::{diagonalize, DiagMode};
    use nalgebra::dmatrix;

    fn three_level() -> (SparseOperator, SparseOperator, SparseOperator) {
        let h = dense_to_sparse(&dmatrix![
            0.0, 0.0, 0.0;
            0.0, 0.3, 0.0;
            0.0, 0.0, 1.0
        ]);
        let d_in = dense_to_sparse(&dmatrix![
            0.0, 0.0, 0.4;
            0.0, 0.0, 0.0;
            0.4, 0.0, 0.0
        ]);
        let d_out = dense_to_sparse(&dmatrix![
            0.0, 0.0, 0.0;
            0.0, 0.0, 0.7;
            0.0, 0.7, 0.0
        ]);
        (h, d_in, d_out)
    }

    #[test]
    fn three_level_closed_form() {
        let (h, d_in, d_out) = three_level();
        let gamma = 0.01;
        // On resonance with the single intermediate |2>: w_I = E_2 - E_0.
        let state = prepare_rixs_state(
            &h,
            0.0,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::default(),
                Complex64::default(),
            ],
            &d_in,
            &d_out,
            1.0,
            gamma,
            1.0,
            PrepMethod::Exact,
        )
        .unwrap();
        // State is proportional to <1|Dout|2><2|Din|0> / (i Gamma) |1>.
        let coeff = Complex64::new(0.7 * 0.4, 0.0) / Complex64::new(0.0, gamma);
        assert!((state.norm_r - coeff.norm()).abs() < 1e-10);
        assert!((state.vector[1].norm() - 1.0).abs() < 1e-12);
        assert!(state.vector[0].norm() < 1e-12);
        assert!((state.d_in_norm - 0.4).abs() < 1e-12);
    }

    #[test]
    fn dark_ground_state_is_flagged() {
        let (h, _, d_out) = three_level();
        let zero = SparseOperator::from_rows(vec![vec![], vec![], vec![]], true);
        let err = prepare_rixs_state(
            &h,
            0.0,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::default(),
                Complex64::default(),
            ],
            &zero,
            &d_out,
            1.0,
            0.01,
            1.0,
            PrepMethod::Exact,
        )
        .unwrap_err();
        assert!(matches!(err, EmulatorError::DarkGroundState));
    }

    #[test]
    fn zero_emission_dipole_is_flagged() {
        let (h, d_in, _) = three_level();
        let zero = SparseOperator::from_rows(vec![vec![], vec![], vec![]], true);
        let err = prepare_rixs_state(
            &h,
            0.0,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::default(),
                Complex64::default(),
            ],
            &d_in,
            &zero,
            1.0,
            0.01,
            1.0,
            PrepMethod::Exact,
        )
        .unwrap_err();
        assert!(matches!(err, EmulatorError::ZeroRixsNorm));
    }

    #[test]
    fn chebyshev_matches_exact_on_small_system() {
        let (h, d_in, d_out) = three_level();
        let ground = [
            Complex64::new(1.0, 0.0),
            Complex64::default(),
            Complex64::default(),
        ];
        let gamma = 0.02;
        let lambda = 2.0;
        let degree =
            crate::resolvent::select_degree(lambda, gamma, crate::resolvent::DegreeMode::analytic(1e-6))
                .unwrap();
        let exact = prepare_rixs_state(
            &h, 0.0, &ground, &d_in, &d_out, 1.0, gamma, 1.0, PrepMethod::Exact,
        )
        .unwrap();
        let cheb = prepare_rixs_state(
            &h,
            0.0,
            &ground,
            &d_in,
            &d_out,
            1.0,
            gamma,
            1.0,
            PrepMethod::Chebyshev { degree, lambda },
        )
        .unwrap();
        let fidelity: Complex64 = exact
            .vector
            .iter()
            .zip(&cheb.vector)
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!(fidelity.norm() > 1.0 - 1e-6, "fidelity {}", fidelity.norm());
        assert!((exact.norm_r - cheb.norm_r).abs() / exact.norm_r < 1e-5);
    }

    #[test]
    fn success_probability_pins() {
        // Known rearrangement on the three-level system.
        let p = success_probability_from_norms(0.01, 28.0, 0.7, 0.4).unwrap();
        assert!((p - (0.01_f64 * 28.0 / (0.7 * 0.4)).powi(2)).abs() < 1e-15);
        // Zero numerator path.
        assert_eq!(
            success_probability_from_norms(0.01, 0.0, 0.7, 0.4).unwrap(),
            0.0
        );
        // Zero denominators are errors.
        assert!(success_probability_from_norms(0.01, 1.0, 0.0, 0.4).is_err());
        assert!(success_probability_from_norms(0.01, 1.0, 0.7, 0.0).is_err());
    }

    #[test]
    fn amplification_round_pins() {
        // sqrt(P_R) = 0.06 as in the cluster study.
        assert_eq!(amplification_rounds(0.06f64 * 0.06).unwrap(), 13);
        assert_eq!(amplification_rounds(1.0).unwrap(), 0);
        // arcsin(0.5) = pi/6 so pi / (4 pi/6) = 1.5.
        assert_eq!(amplification_rounds(0.25).unwrap(), 1);
        assert!(amplification_rounds(0.0).is_err());
        assert!(amplification_rounds(1.5).is_err());
    }

    #[test]
    fn prepared_state_consistent_with_kh_amplitudes() {
        // Gamma times the unnormalized state coefficients must equal
        // Gamma W_f0 with the window disabled.
        let (h, d_in, d_out) = three_level();
        let decomp = diagonalize(&h, DiagMode::Full).unwrap();
        let ground: Vec<Complex64> = decomp.ground_state().iter().copied().collect();
        let gamma = 0.05;
        let omega = 0.8;
        let state = prepare_rixs_state(
            &h,
            decomp.ground_energy(),
            &ground,
            &d_in,
            &d_out,
            omega,
            gamma,
            1.0,
            PrepMethod::Exact,
        )
        .unwrap();
        let w = crate::exact_spectra::rixs_amplitudes(
            &decomp,
            &d_in,
            &d_out,
            omega,
            gamma,
            f64::INFINITY,
        )
        .unwrap();
        let coeffs = decomp.to_eigenbasis(
            &state
                .vector
                .iter()
                .map(|x| x * state.norm_r)
                .collect::<Vec<_>>(),
        );
        for ((_, wf), cf) in w.iter().zip(&coeffs) {
            assert!((wf - cf).norm() < 1e-10, "{wf} vs {cf}");
        }
    }
}
