//! Reference-spectrum ingestion and shot reconstruction: a measured
//! two-column spectrum is normalized into a sampling distribution over
//! fixed-width bins and resampled, mirroring the shot-count study.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sample::Histogram;
use super::EmulatorError;

/// Reference curve as (omega_eV, intensity) points.
#[derive(Debug, Clone)]
pub struct ReferenceSpectrum {
    pub points: Vec<(f64, f64)>,
}

/// Parses a two-column CSV `omega_eV,intensity`. A non-numeric first line is
/// treated as a header; separators may be commas or whitespace. Negative
/// intensities are clamped to zero; the curve is normalized downstream.
pub fn parse_reference_csv(text: &str) -> Result<ReferenceSpectrum, EmulatorError> {
    let mut points = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(EmulatorError::ReferenceParse {
                line: lineno,
                msg: format!("expected two columns, found {}", fields.len()),
            });
        }
        match (fields[0].parse::<f64>(), fields[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => points.push((x, y.max(0.0))),
            _ if idx == 0 => continue, // header row
            _ => {
                return Err(EmulatorError::ReferenceParse {
                    line: lineno,
                    msg: format!("non-numeric row {trimmed:?}"),
                })
            }
        }
    }
    if points.iter().all(|&(_, y)| y == 0.0) {
        return Err(EmulatorError::EmptyReference);
    }
    points.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite energies"));
    Ok(ReferenceSpectrum { points })
}

impl ReferenceSpectrum {
    /// Normalized probability masses over fixed-width bins.
    pub fn binned_probabilities(&self, bin_width_ev: f64) -> Result<(Vec<f64>, Vec<f64>), EmulatorError> {
        if !(bin_width_ev > 0.0) {
            return Err(EmulatorError::InvalidBinWidth(bin_width_ev));
        }
        let total: f64 = self.points.iter().map(|&(_, y)| y).sum();
        let mut hist = Histogram::new(bin_width_ev);
        for &(x, y) in &self.points {
            if y > 0.0 {
                hist.add(x, y / total);
            }
        }
        Ok(hist.into_grid())
    }
}

/// Draws `shots` samples from the normalized reference distribution.
/// Returns (bin centers, analytic probabilities, empirical frequencies).
pub fn sample_reference(
    reference: &ReferenceSpectrum,
    shots: u64,
    seed: u64,
    bin_width_ev: f64,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>), EmulatorError> {
    if shots == 0 {
        return Err(EmulatorError::NoShots);
    }
    let (centers, probs) = reference.binned_probabilities(bin_width_ev)?;
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in &probs {
        acc += p;
        cdf.push(acc);
    }
    if let Some(last) = cdf.last_mut() {
        *last = last.max(1.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u = rng.gen::<f64>();
        let j = match cdf.binary_search_by(|x| x.partial_cmp(&u).expect("finite cdf")) {
            Ok(i) | Err(i) => i.min(counts.len() - 1),
        };
        counts[j] += 1;
    }
    let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / shots as f64).collect();
    Ok((centers, probs, freq))
}
