//! Design and analysis of silica microtoroid resonators: whispering-gallery
//! mode asymptotics, CO2-laser reflow heat transport, Nd implant profiles and
//! emission-spectrum synthesis and analysis.
//!
//! All quantities are SI unless a name says otherwise (`_cm3`, `_cm2`).

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airy;
pub mod config;
pub mod implant;
mod quad;
pub mod spectra;
pub mod thermal;
pub mod wgm;

pub use airy::airy_zero;
pub use config::{ConfigError, RunConfig};
pub use implant::{ImplantError, ImplantProfile, ModeProfile};
pub use spectra::{
    analyze, detect_peaks, synthesize, AnalysisReport, PeakSet, SpectraError, Spectrum,
    SynthesisParams,
};
pub use thermal::{solve_steady_state, TemperatureField, ThermalError, ThermalGrid};
pub use wgm::{CavityGeometry, OpticalConstants, Polarization, WgmError, WgmMode};

/// Crate version, echoed into output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
