//! Shot sampling of the QPE distribution and histogram reconstruction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exact_spectra::{SpectralDecomposition, SpectrumMeta, SpectrumResult};
use crate::units::hartree_to_ev;

use super::{qpe_distribution, EmulatorError, QpeModel, RixsState};

/// Histogram bin width used by the shot reconstruction (eV), the typical
/// experimental broadening.
pub const DEFAULT_BIN_WIDTH_EV: f64 = 0.2;

/// One measurement record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawSample {
    pub shot: u64,
    pub bin: usize,
    pub theta: f64,
    pub omega_ev: f64,
}

impl RawSample {
    pub fn csv_header() -> &'static str {
        "shot_index,bin,theta,omega_eV"
    }

    pub fn to_csv_line(&self) -> String {
        format!("{},{},{:.12},{:.9}", self.shot, self.bin, self.theta, self.omega_ev)
    }
}

/// Sampling mode: finite seeded shots, or the infinite-shot limit in which
/// the analytic distribution is pushed through the axis map exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleMode {
    Shots { shots: u64, seed: u64 },
    Analytic,
}

/// Eigenstate weights |<E_f|psi>|^2 of a prepared RIXS state.
pub fn rixs_state_weights(
    state: &RixsState,
    decomp: &SpectralDecomposition,
) -> Result<Vec<(f64, f64)>, EmulatorError> {
    if state.vector.len() != decomp.dim() {
        return Err(EmulatorError::DimensionMismatch(format!(
            "state dim {} vs decomposition dim {}",
            state.vector.len(),
            decomp.dim()
        )));
    }
    let coeffs = decomp.to_eigenbasis(&state.vector);
    Ok(decomp
        .eigenvalues
        .iter()
        .zip(coeffs.iter())
        .map(|(&e, c)| (c.norm_sqr(), e))
        .collect())
}

/// Samples the walk-based QPE distribution and reconstructs the energy-loss
/// histogram. Returns the spectrum (sticks are histogram masses at bin
/// centers; the curve is the probability density) and the raw samples
/// (empty in analytic mode). Deterministic for a fixed seed.
pub fn sample_spectrum(
    model: &QpeModel,
    weights: &[(f64, f64)],
    mode: SampleMode,
    bin_width_ev: f64,
) -> Result<(SpectrumResult, Vec<RawSample>), EmulatorError> {
    if !(bin_width_ev > 0.0) {
        return Err(EmulatorError::InvalidBinWidth(bin_width_ev));
    }
    let dist = qpe_distribution(model, weights)?;
    let omega_ev: Vec<f64> = (0..model.bins())
        .map(|j| hartree_to_ev(model.omega_of_bin(j)))
        .collect();

    let mut hist = Histogram::new(bin_width_ev);
    let mut samples = Vec::new();
    match mode {
        SampleMode::Analytic => {
            for (j, &p) in dist.iter().enumerate() {
                if p > 0.0 {
                    hist.add(omega_ev[j], p);
                }
            }
        }
        SampleMode::Shots { shots, seed } => {
            if shots == 0 {
                return Err(EmulatorError::NoShots);
            }
            let cdf = cumulative(&dist);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let weight = 1.0 / shots as f64;
            samples.reserve(shots as usize);
            for shot in 0..shots {
                let j = draw(&cdf, rng.gen::<f64>());
                hist.add(omega_ev[j], weight);
                samples.push(RawSample {
                    shot,
                    bin: j,
                    theta: model.theta_of_bin(j),
                    omega_ev: omega_ev[j],
                });
            }
        }
    }

    let (grid, masses) = hist.into_grid();
    let intensity: Vec<f64> = masses.iter().map(|m| m / bin_width_ev).collect();
    let sticks: Vec<(f64, f64)> = grid
        .iter()
        .zip(&masses)
        .filter(|&(_, &m)| m > 0.0)
        .map(|(&x, &m)| (x, m))
        .collect();
    let spectrum = SpectrumResult {
        sticks,
        grid,
        intensity,
        meta: SpectrumMeta {
            kind: "rixs_qpe".into(),
            ..Default::default()
        },
    };
    Ok((spectrum, samples))
}

/// Total-variation distance between two distributions over the same bins.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p
        .iter()
        .zip(q.iter())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
}

/// Upper bound on the expected TV distance of an n-shot multinomial
/// empirical distribution from its parent: (1/2) sum_j sqrt(p_j (1-p_j) / n).
pub fn multinomial_tv_expectation(p: &[f64], shots: u64) -> f64 {
    let n = shots as f64;
    0.5 * p
        .iter()
        .map(|&pj| (pj * (1.0 - pj) / n).max(0.0).sqrt())
        .sum::<f64>()
}

/// Fixed-width histogram with bins aligned at integer multiples of the
/// width, so identical data always lands in identical bins.
pub(crate) struct Histogram {
    width: f64,
    masses: std::collections::BTreeMap<i64, f64>,
}

impl Histogram {
    pub(crate) fn new(width: f64) -> Self {
        Histogram {
            width,
            masses: std::collections::BTreeMap::new(),
        }
    }

    pub(crate) fn add(&mut self, x: f64, mass: f64) {
        let k = (x / self.width).floor() as i64;
        *self.masses.entry(k).or_insert(0.0) += mass;
    }

    /// Bin centers (dense between the occupied extremes) and masses.
    pub(crate) fn into_grid(self) -> (Vec<f64>, Vec<f64>) {
        if self.masses.is_empty() {
            return (Vec::new(), Vec::new());
        }
        let lo = *self.masses.keys().next().expect("non-empty");
        let hi = *self.masses.keys().next_back().expect("non-empty");
        let mut grid = Vec::with_capacity((hi - lo + 1) as usize);
        let mut out = Vec::with_capacity((hi - lo + 1) as usize);
        for k in lo..=hi {
            grid.push((k as f64 + 0.5) * self.width);
            out.push(self.masses.get(&k).copied().unwrap_or(0.0));
        }
        (grid, out)
    }
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = p
        .iter()
        .map(|&x| {
            acc += x.max(0.0);
            acc
        })
        .collect();
    if let Some(last) = cdf.last_mut() {
        *last = last.max(1.0);
    }
    cdf
}

fn draw(cdf: &[f64], u: f64) -> usize {
    match cdf.binary_search_by(|x| x.partial_cmp(&u).expect("finite cdf")) {
        Ok(i) | Err(i) => i.min(cdf.len() - 1),
    }
}
