//! Kramers-Heisenberg amplitudes and stick/broadened spectra.
//!
//! Sticks carry energies (or energy losses) in eV; all physics inputs are
//! Hartree. Degenerate sticks closer than [`STICK_MERGE_TOL_HA`] are merged
//! so that reports are stable under solver-dependent rotations of degenerate
//! eigenvectors.

use num_complex::Complex64;
use serde::Serialize;

use crate::fock::SparseOperator;
use crate::units::hartree_to_ev;

use super::{SpectraError, SpectralDecomposition};

/// Sticks closer than this (Hartree) are merged by weight sum.
pub const STICK_MERGE_TOL_HA: f64 = 1e-8;

/// Metadata attached to a spectrum, user-facing units (eV).
#[derive(Debug, Clone, Default, Serialize)]
pub struct SpectrumMeta {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_in_ev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_ev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_ev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_in: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_out: Option<[f64; 3]>,
}

/// Stick spectrum plus its Lorentzian-broadened curve on a uniform grid.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    /// (energy or energy loss in eV, non-negative weight).
    pub sticks: Vec<(f64, f64)>,
    /// Grid in eV, strictly increasing.
    pub grid: Vec<f64>,
    /// Broadened intensity on `grid`.
    pub intensity: Vec<f64>,
    pub meta: SpectrumMeta,
}

impl SpectrumResult {
    /// Two-column CSV of the broadened curve.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("x_eV,intensity\n");
        for (x, y) in self.grid.iter().zip(&self.intensity) {
            out.push_str(&format!("{x:.9},{y:.12e}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spectrum serializes")
    }
}

/// Unit-area Lorentzian of half-width `w` centered at `x0`.
#[inline]
pub fn lorentzian(x: f64, x0: f64, w: f64) -> f64 {
    w / (std::f64::consts::PI * ((x - x0) * (x - x0) + w * w))
}

fn check_grid(grid: &[f64]) -> Result<(), SpectraError> {
    if grid.is_empty() {
        return Err(SpectraError::EmptyGrid);
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpectraError::GridNotIncreasing);
    }
    Ok(())
}

/// Merges sticks whose positions (Hartree) agree to [`STICK_MERGE_TOL_HA`],
/// then converts positions to eV.
fn merge_sticks_to_ev(mut sticks: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    sticks.retain(|&(_, w)| w != 0.0);
    sticks.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite positions"));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(sticks.len());
    for (x, w) in sticks {
        match merged.last_mut() {
            Some((mx, mw)) if (x - *mx).abs() <= STICK_MERGE_TOL_HA => *mw += w,
            _ => merged.push((x, w)),
        }
    }
    merged
        .into_iter()
        .map(|(x, w)| (hartree_to_ev(x), w))
        .collect()
}

fn broaden(sticks: &[(f64, f64)], grid: &[f64], width_ev: f64) -> Vec<f64> {
    grid.iter()
        .map(|&x| {
            sticks
                .iter()
                .map(|&(x0, w)| w * lorentzian(x, x0, width_ev))
                .sum()
        })
        .collect()
}

/// First-order absorption spectrum: sticks |<E_n|D|E_0>|^2 at E_n - E_0,
/// broadened with a unit-area Lorentzian of width `gamma_ha`.
pub fn xas_spectrum(
    decomp: &SpectralDecomposition,
    dipole: &SparseOperator,
    grid_ev: &[f64],
    gamma_ha: f64,
) -> Result<SpectrumResult, SpectraError> {
    check_grid(grid_ev)?;
    if dipole.dim() != decomp.dim() {
        return Err(SpectraError::DimensionMismatch(format!(
            "dipole dim {} vs decomposition dim {}",
            dipole.dim(),
            decomp.dim()
        )));
    }
    let v0: Vec<Complex64> = decomp.ground_state().iter().copied().collect();
    let dv = dipole.apply(&v0);
    let amps = decomp.to_eigenbasis(&dv);
    let e0 = decomp.ground_energy();
    let sticks_ha: Vec<(f64, f64)> = decomp
        .eigenvalues
        .iter()
        .zip(amps.iter())
        .map(|(&e, a)| (e - e0, a.norm_sqr()))
        .collect();
    let sticks = merge_sticks_to_ev(sticks_ha);
    let gamma_ev = hartree_to_ev(gamma_ha);
    let intensity = broaden(&sticks, grid_ev, gamma_ev);
    Ok(SpectrumResult {
        sticks,
        grid: grid_ev.to_vec(),
        intensity,
        meta: SpectrumMeta {
            kind: "xas".into(),
            gamma_ev: Some(gamma_ev),
            ..Default::default()
        },
    })
}

/// Kramers-Heisenberg amplitudes W_f0 for every final state f:
///
///   W_f0 = sum_n <E_f|D_out^dag|E_n><E_n|D_in|E_0> / (w_I - (E_n-E_0) + i Gamma)
///
/// with the intermediate sum restricted to |(E_n-E_0) - w_I| <= window_ha
/// (pass `f64::INFINITY` to disable the window). Energies in Hartree.
pub fn rixs_amplitudes(
    decomp: &SpectralDecomposition,
    d_in: &SparseOperator,
    d_out: &SparseOperator,
    omega_in_ha: f64,
    gamma_ha: f64,
    window_ha: f64,
) -> Result<Vec<(usize, Complex64)>, SpectraError> {
    if d_in.dim() != decomp.dim() || d_out.dim() != decomp.dim() {
        return Err(SpectraError::DimensionMismatch(
            "dipole operators must match the decomposition dimension".into(),
        ));
    }
    let e0 = decomp.ground_energy();
    let v0: Vec<Complex64> = decomp.ground_state().iter().copied().collect();
    let absorbed = decomp.to_eigenbasis(&d_in.apply(&v0));
    let weighted: Vec<Complex64> = decomp
        .eigenvalues
        .iter()
        .zip(absorbed.iter())
        .map(|(&en, a)| {
            let detuning = en - e0 - omega_in_ha;
            if detuning.abs() <= window_ha {
                a / Complex64::new(-detuning, gamma_ha)
            } else {
                Complex64::default()
            }
        })
        .collect();
    let propagated = decomp.from_eigenbasis(&weighted);
    let emitted = d_out.apply_adjoint(&propagated);
    let w = decomp.to_eigenbasis(&emitted);
    Ok(w.into_iter().enumerate().collect())
}

/// Energy-loss spectrum from RIXS amplitudes: sticks |W_f0|^2 at E_f - E_0,
/// broadened with a unit-area Lorentzian of width `eta_ha`.
pub fn rixs_spectrum(
    amplitudes: &[(usize, Complex64)],
    decomp: &SpectralDecomposition,
    eta_ha: f64,
    grid_ev: &[f64],
) -> Result<SpectrumResult, SpectraError> {
    check_grid(grid_ev)?;
    let e0 = decomp.ground_energy();
    let sticks_ha: Vec<(f64, f64)> = amplitudes
        .iter()
        .map(|&(f, w)| (decomp.eigenvalues[f] - e0, w.norm_sqr()))
        .collect();
    let sticks = merge_sticks_to_ev(sticks_ha);
    let eta_ev = hartree_to_ev(eta_ha);
    let intensity = broaden(&sticks, grid_ev, eta_ev);
    Ok(SpectrumResult {
        sticks,
        grid: grid_ev.to_vec(),
        intensity,
        meta: SpectrumMeta {
            kind: "rixs".into(),
            eta_ev: Some(eta_ev),
            ..Default::default()
        },
    })
}
