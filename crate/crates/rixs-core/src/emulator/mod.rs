//! Matrix-scale emulation of the quantum RIXS algorithm: preparation of the
//! RIXS state, block-encoding success probability and amplitude-amplification
//! round count, windowed walk-based phase-estimation sampling, and shot-based
//! spectrum reconstruction.
//!
//! The walk operator is emulated spectrally: an eigenstate of energy E maps
//! to the eigenphase arccos(E / lambda), and measurement statistics are
//! computed from the window's spectral leakage kernel. Amplitude
//! amplification is emulated as exact post-selection; its cost is charged in
//! the resource estimates, not here.

mod qpe;
mod reference;
mod sample;
mod state;

pub use qpe::{qpe_distribution, AxisConvention, QpeModel, Window, DEFAULT_KAISER_BETA};
pub use reference::{parse_reference_csv, sample_reference, ReferenceSpectrum};
pub use sample::{
    multinomial_tv_expectation, rixs_state_weights, sample_spectrum, total_variation, RawSample,
    SampleMode, DEFAULT_BIN_WIDTH_EV,
};
pub use state::{
    amplification_rounds, prepare_rixs_state, success_probability, success_probability_from_norms,
    PrepMethod, RixsState,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmulatorError {
    #[error("dark ground state: D_in |E_0> vanishes, the success probability would be 0")]
    DarkGroundState,
    #[error("RIXS state has zero norm (D_out^dag G D_in |E_0> = 0)")]
    ZeroRixsNorm,
    #[error("zero denominator in success probability: {0}")]
    ZeroDenominator(&'static str),
    #[error("success probability {0} outside [0, 1]")]
    InvalidSuccessProbability(f64),
    #[error("eigenstate weights sum to {sum}, expected 1 within 1e-10")]
    WeightsNotNormalized { sum: f64 },
    #[error("eigenstate energy {energy} exceeds the rescaling bound lambda = {lambda}")]
    EnergyOutOfRange { energy: f64, lambda: f64 },
    #[error("phase register needs 1..=26 bits (got {0})")]
    InvalidPhaseBits(u32),
    #[error("Kaiser shape parameter must be positive (got {0})")]
    InvalidKaiserBeta(f64),
    #[error("histogram bin width must be positive (got {0})")]
    InvalidBinWidth(f64),
    #[error("sampling requires at least one shot")]
    NoShots,
    #[error("reference spectrum line {line}: {msg}")]
    ReferenceParse { line: usize, msg: String },
    #[error("reference spectrum carries no positive intensity")]
    EmptyReference,
    #[error(transparent)]
    Resolvent(#[from] crate::resolvent::ResolventError),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}
