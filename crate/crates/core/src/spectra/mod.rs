//! Photoluminescence spectra of a doped toroid: synthesis of TE/TM resonance
//! combs seen through a spectrograph, and the inverse analysis.

mod analyze;
mod io;
mod peaks;
mod synth;

pub use analyze::{analyze, classify_comb, q_bound, AnalysisOptions, AnalysisReport, QBound};
pub use io::{read_spectrum_csv, write_spectrum_csv};
pub use peaks::{detect_peaks, noise_floor, Peak, PeakSet, PolarizationLabel};
pub use synth::{
    synthesize, CombLine, Synthesis, SynthesisParams, SynthesisWarning, REFERENCE_LINE_WIDTH_M,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::wgm::WgmError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid step {step:.3e} m exceeds a quarter of the resolution {resolution:.3e} m")]
    Undersampled { step: f64, resolution: f64 },
    #[error("prominence threshold {threshold:.3e} does not exceed the noise floor {floor:.3e}")]
    ThresholdBelowNoise { threshold: f64, floor: f64 },
    #[error("comb classification needs at least 4 peaks, got {0}")]
    TooFewPeaks(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Wgm(#[from] WgmError),
}

/// Intensity sampled on a strictly increasing wavelength grid (meters).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    wavelengths: Vec<f64>,
    intensities: Vec<f64>,
    resolution_fwhm_m: f64,
}

impl Spectrum {
    pub fn new(
        wavelengths: Vec<f64>,
        intensities: Vec<f64>,
        resolution_fwhm_m: f64,
    ) -> Result<Self, SpectraError> {
        if wavelengths.len() != intensities.len() {
            return Err(SpectraError::InvalidSpectrum(format!(
                "{} wavelengths but {} intensities",
                wavelengths.len(),
                intensities.len()
            )));
        }
        if wavelengths.iter().any(|w| !w.is_finite())
            || wavelengths.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(SpectraError::InvalidSpectrum(
                "wavelengths must be finite and strictly increasing".into(),
            ));
        }
        if intensities.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(SpectraError::InvalidSpectrum(
                "intensities must be finite and ≥ 0".into(),
            ));
        }
        if !(resolution_fwhm_m >= 0.0) {
            return Err(SpectraError::InvalidSpectrum(
                "resolution must be ≥ 0".into(),
            ));
        }
        Ok(Self {
            wavelengths,
            intensities,
            resolution_fwhm_m,
        })
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn resolution_fwhm_m(&self) -> f64 {
        self.resolution_fwhm_m
    }

    pub fn len(&self) -> usize {
        self.wavelengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavelengths.is_empty()
    }

    /// Mean sample spacing.
    pub fn step(&self) -> f64 {
        match self.len() {
            0 | 1 => 0.0,
            n => (self.wavelengths[n - 1] - self.wavelengths[0]) / (n - 1) as f64,
        }
    }

    /// `∫ I dλ` by the trapezoid rule.
    pub fn integrated_intensity(&self) -> f64 {
        self.wavelengths
            .windows(2)
            .zip(self.intensities.windows(2))
            .map(|(w, v)| 0.5 * (w[1] - w[0]) * (v[0] + v[1]))
            .sum()
    }

    pub fn with_background(&self, offset: f64) -> Result<Self, SpectraError> {
        Self::new(
            self.wavelengths.clone(),
            self.intensities.iter().map(|v| v + offset).collect(),
            self.resolution_fwhm_m,
        )
    }
}
