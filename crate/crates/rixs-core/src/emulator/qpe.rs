//! Windowed walk-based QPE measurement distribution.
//!
//! An eigenstate with energy E contributes through the walk eigenphase
//! theta = arccos(E / lambda); both +theta and -theta branches map to the
//! same energy under the cosine axis transform, so theta in [0, pi] is
//! sampled directly. Bin j of the 2^n register represents the phase
//! 2 pi j / 2^n; its probability is the eigenstate weight times the window's
//! spectral leakage kernel. The kernel is the exact Fejer form for the
//! uniform window and is evaluated numerically (FFT) for the Kaiser window.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::EmulatorError;

/// Default Kaiser shape parameter: sidelobes near -127 dB, strong enough
/// that leakage is dominated by the mainlobe at every precision used here.
pub const DEFAULT_KAISER_BETA: f64 = 13.0;

const WEIGHT_SUM_TOL: f64 = 1e-10;
const MAX_PHASE_BITS: u32 = 26;

/// QPE register window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    /// Plain Hadamard register (Fejer leakage kernel, exact closed form).
    Uniform,
    /// Kaiser lineshape of shape `beta` (numerically evaluated kernel).
    Kaiser { beta: f64 },
}

/// Convention mapping measured phases to the reported energy axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AxisConvention {
    /// omega = lambda cos(theta) - E_0, the energy loss E_f - E_0.
    #[default]
    EnergyLoss,
    /// omega = E_0 + lambda cos(theta): keeps the ground energy's own
    /// sign instead of subtracting it; differs from the loss axis by 2 E_0.
    GroundShifted,
}

/// Windowed phase-estimation model.
#[derive(Debug, Clone, Copy)]
pub struct QpeModel {
    /// Phase-register bits.
    pub n_omega: u32,
    pub window: Window,
    /// Walk rescaling 1-norm (Hartree).
    pub lambda: f64,
    /// Ground-state energy (Hartree), used by the axis transform.
    pub e0: f64,
    pub axis: AxisConvention,
}

impl QpeModel {
    pub fn bins(&self) -> usize {
        1usize << self.n_omega
    }

    /// Phase of bin j.
    pub fn theta_of_bin(&self, j: usize) -> f64 {
        2.0 * std::f64::consts::PI * j as f64 / self.bins() as f64
    }

    /// Energy axis value of bin j under the chosen convention (Hartree).
    pub fn omega_of_bin(&self, j: usize) -> f64 {
        let e = self.lambda * self.theta_of_bin(j).cos();
        match self.axis {
            AxisConvention::EnergyLoss => e - self.e0,
            AxisConvention::GroundShifted => self.e0 + e,
        }
    }

    fn validate(&self) -> Result<(), EmulatorError> {
        if self.n_omega == 0 || self.n_omega > MAX_PHASE_BITS {
            return Err(EmulatorError::InvalidPhaseBits(self.n_omega));
        }
        if let Window::Kaiser { beta } = self.window {
            if !(beta > 0.0) {
                return Err(EmulatorError::InvalidKaiserBeta(beta));
            }
        }
        Ok(())
    }
}

/// Measurement distribution over the 2^n phase bins for a set of
/// eigenstates given as (weight |c_f|^2, energy E_f). Weights must sum to 1
/// and energies must satisfy |E_f| <= lambda.
pub fn qpe_distribution(
    model: &QpeModel,
    states: &[(f64, f64)],
) -> Result<Vec<f64>, EmulatorError> {
    model.validate()?;
    let sum: f64 = states.iter().map(|&(w, _)| w).sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(EmulatorError::WeightsNotNormalized { sum });
    }
    for &(_, e) in states {
        if e.abs() > model.lambda {
            return Err(EmulatorError::EnergyOutOfRange {
                energy: e,
                lambda: model.lambda,
            });
        }
    }
    let n = model.bins();
    let mut dist = vec![0.0; n];
    match model.window {
        Window::Uniform => {
            for &(w, e) in states {
                if w == 0.0 {
                    continue;
                }
                let theta = (e / model.lambda).clamp(-1.0, 1.0).acos();
                for (j, slot) in dist.iter_mut().enumerate() {
                    let delta = theta - model.theta_of_bin(j);
                    *slot += w * fejer_kernel(delta, n);
                }
            }
        }
        Window::Kaiser { beta } => {
            let window = kaiser_window(n, beta);
            let mut planner = FftPlanner::<f64>::new();
            let fft = planner.plan_fft_forward(n);
            let mut buf = vec![Complex64::default(); n];
            for &(w, e) in states {
                if w == 0.0 {
                    continue;
                }
                let theta = (e / model.lambda).clamp(-1.0, 1.0).acos();
                for (m, (b, &wm)) in buf.iter_mut().zip(&window).enumerate() {
                    let phase = theta * m as f64;
                    *b = Complex64::from_polar(wm, phase);
                }
                fft.process(&mut buf);
                let inv_n = 1.0 / n as f64;
                for (slot, b) in dist.iter_mut().zip(&buf) {
                    *slot += w * b.norm_sqr() * inv_n;
                }
            }
        }
    }
    Ok(dist)
}

/// Fejer leakage kernel |(1/N) sum_m e^{i m delta}|^2 with the removable
/// singularity handled explicitly.
fn fejer_kernel(delta: f64, n: usize) -> f64 {
    let u = 0.5 * delta;
    let s = u.sin();
    let nf = n as f64;
    if s.abs() < 1e-9 {
        // Near u = k pi the ratio sin(N u)/sin(u) tends to N cos(N u)/cos(u).
        let r = (nf * u).cos() / u.cos();
        r * r
    } else {
        let r = (nf * u).sin() / (nf * s);
        r * r
    }
}

/// l2-normalized Kaiser window of length `n`.
fn kaiser_window(n: usize, beta: f64) -> Vec<f64> {
    let denom = bessel_i0(beta);
    let half = (n - 1) as f64 / 2.0;
    let mut w: Vec<f64> = (0..n)
        .map(|m| {
            let x = (m as f64 - half) / half;
            bessel_i0(beta * (1.0 - x * x).max(0.0).sqrt()) / denom
        })
        .collect();
    let norm: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut w {
        *x /= norm;
    }
    w
}

/// Modified Bessel function I_0 by its power series; converges quickly for
/// the shape parameters used here (beta <~ 40).
fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / ((k * k) as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}
