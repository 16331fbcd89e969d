//! Semiclassical whispering-gallery-mode physics.
//!
//! Resonances follow the three-term asymptotic expansion
//! `N x = ℓ + 1/2 + ((ℓ + 1) / 2)^(1/3) α_n`, with `x = 2πa/λ` the size
//! parameter and `α_n` the n-th zero of `Ai(-z)`. The minor radius of a toroid
//! is ignored: the mode sees a sphere of radius equal to the major radius.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::airy::airy_zero;

/// Smallest `N·x` for which the asymptotic expansion is trusted.
pub const MIN_ASYMPTOTIC_NX: f64 = 50.0;

const RESONANCE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WgmError {
    #[error("radial order {0} outside the supported range 1..=10")]
    RadialOrderOutOfRange(u32),
    #[error("asymptotic expansion unreliable: N·x = {0:.3} (needs > 50)")]
    AsymptoticValidity(f64),
    #[error("phase matching impossible: effective index {effective} exceeds fiber index {fiber}")]
    PhaseMatching { effective: f64, fiber: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

fn invalid(msg: impl Into<String>) -> WgmError {
    WgmError::InvalidParameter(msg.into())
}

/// Toroid (or disk) on a silicon pillar. All lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    pub major_radius_m: f64,
    pub disk_thickness_m: f64,
    pub pillar_height_m: f64,
    pub pillar_radius_m: f64,
}

impl CavityGeometry {
    pub fn new(
        major_radius_m: f64,
        disk_thickness_m: f64,
        pillar_height_m: f64,
        pillar_radius_m: f64,
    ) -> Result<Self, WgmError> {
        let g = Self {
            major_radius_m,
            disk_thickness_m,
            pillar_height_m,
            pillar_radius_m,
        };
        g.validate()?;
        Ok(g)
    }

    /// Geometry with the given major diameter and default disk/pillar sizes
    /// (800 nm disk, 25 µm tall pillar whose radius is 40% of the major radius).
    pub fn with_diameter(diameter_m: f64) -> Result<Self, WgmError> {
        let a = diameter_m / 2.0;
        Self::new(a, 800e-9, 25e-6, 0.4 * a)
    }

    pub fn validate(&self) -> Result<(), WgmError> {
        let lengths = [
            ("major radius", self.major_radius_m),
            ("disk thickness", self.disk_thickness_m),
            ("pillar height", self.pillar_height_m),
            ("pillar radius", self.pillar_radius_m),
        ];
        for (name, v) in lengths {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.pillar_radius_m >= self.major_radius_m {
            return Err(invalid(
                "pillar radius must be smaller than the major radius",
            ));
        }
        Ok(())
    }

    pub fn major_diameter_m(&self) -> f64 {
        2.0 * self.major_radius_m
    }
}

/// Refractive indices and analysis wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalConstants {
    pub silica_index: f64,
    pub fiber_core_index: f64,
    pub vacuum_wavelength_m: f64,
}

impl Default for OpticalConstants {
    fn default() -> Self {
        Self {
            silica_index: 1.45,
            fiber_core_index: 1.457,
            vacuum_wavelength_m: 900e-9,
        }
    }
}

impl OpticalConstants {
    pub fn new(
        silica_index: f64,
        fiber_core_index: f64,
        vacuum_wavelength_m: f64,
    ) -> Result<Self, WgmError> {
        let c = Self {
            silica_index,
            fiber_core_index,
            vacuum_wavelength_m,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), WgmError> {
        if !(self.silica_index > 1.0 && self.fiber_core_index > 1.0) {
            return Err(invalid("refractive indices must exceed 1"));
        }
        if !(self.vacuum_wavelength_m > 0.4e-6 && self.vacuum_wavelength_m < 2.0e-6) {
            return Err(invalid(format!(
                "wavelength {} m outside (0.4, 2.0) µm",
                self.vacuum_wavelength_m
            )));
        }
        Ok(())
    }

    /// Same constants at another wavelength.
    pub fn at_wavelength(&self, wavelength_m: f64) -> Self {
        Self {
            vacuum_wavelength_m: wavelength_m,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    TE,
    TM,
}

/// One whispering-gallery resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WgmMode {
    pub angular_number: u32,
    pub radial_order: u32,
    pub polarization: Polarization,
    pub wavelength_m: f64,
    pub size_parameter: f64,
    pub effective_index: f64,
}

pub fn size_parameter(radius_m: f64, wavelength_m: f64) -> f64 {
    2.0 * PI * radius_m / wavelength_m
}

/// Right-hand side of the resonance condition for angular number `l`.
pub fn resonance_rhs(l: f64, alpha: f64) -> f64 {
    l + 0.5 + ((l + 1.0) / 2.0).cbrt() * alpha
}

/// `N x − ℓ − 1/2 − ((ℓ+1)/2)^(1/3) α_n` for a candidate wavelength.
pub fn resonance_residual(
    geometry: &CavityGeometry,
    constants: &OpticalConstants,
    radial_order: u32,
    angular_number: u32,
    wavelength_m: f64,
) -> Result<f64, WgmError> {
    let alpha = airy_zero(radial_order)?;
    let nx = constants.silica_index * size_parameter(geometry.major_radius_m, wavelength_m);
    Ok(nx - resonance_rhs(angular_number as f64, alpha))
}

/// Effective index `N [1 − 2^(−1/3) (N x)^(−2/3) α_n]` at the configured wavelength.
pub fn effective_index(
    geometry: &CavityGeometry,
    constants: &OpticalConstants,
    radial_order: u32,
) -> Result<f64, WgmError> {
    let alpha = airy_zero(radial_order)?;
    let n = constants.silica_index;
    let nx = n * size_parameter(geometry.major_radius_m, constants.vacuum_wavelength_m);
    if !(nx > MIN_ASYMPTOTIC_NX) {
        return Err(WgmError::AsymptoticValidity(nx));
    }
    let n_eff = n * (1.0 - 2f64.powf(-1.0 / 3.0) * nx.powf(-2.0 / 3.0) * alpha);
    if !(n_eff > 1.0 && n_eff < n) {
        return Err(WgmError::AsymptoticValidity(nx));
    }
    Ok(n_eff)
}

/// Free spectral range `λ² / (2π a N_eff)` in meters.
pub fn fsr(
    geometry: &CavityGeometry,
    constants: &OpticalConstants,
    effective_index: f64,
) -> Result<f64, WgmError> {
    if !(effective_index > 0.0) {
        return Err(invalid("effective index must be positive"));
    }
    let lambda = constants.vacuum_wavelength_m;
    Ok(lambda * lambda / (2.0 * PI * geometry.major_radius_m * effective_index))
}

/// Major diameter `λ² / (π Δλ N_eff)` that produces the given FSR.
pub fn invert_diameter(
    fsr_m: f64,
    constants: &OpticalConstants,
    effective_index: f64,
) -> Result<f64, WgmError> {
    if !(fsr_m > 0.0) {
        return Err(invalid(format!("FSR must be positive, got {fsr_m}")));
    }
    if !(effective_index > 0.0) {
        return Err(invalid("effective index must be positive"));
    }
    let lambda = constants.vacuum_wavelength_m;
    Ok(lambda * lambda / (PI * fsr_m * effective_index))
}

/// Index that makes [`fsr`] reproduce the local spacing of successive
/// solutions of the resonance condition: `N / (d rhs / dℓ)` evaluated at the
/// angular number resonant near the configured wavelength.
pub fn comb_spacing_index(
    geometry: &CavityGeometry,
    constants: &OpticalConstants,
    radial_order: u32,
) -> Result<f64, WgmError> {
    let alpha = airy_zero(radial_order)?;
    let n = constants.silica_index;
    let nx = n * size_parameter(geometry.major_radius_m, constants.vacuum_wavelength_m);
    if !(nx > MIN_ASYMPTOTIC_NX) {
        return Err(WgmError::AsymptoticValidity(nx));
    }
    // Continuous ℓ solving rhs(ℓ) = N x; rhs is monotone so a few fixed-point passes suffice.
    let mut l = nx;
    for _ in 0..50 {
        l = nx - 0.5 - ((l + 1.0) / 2.0).cbrt() * alpha;
    }
    let slope = 1.0 + alpha / 6.0 * ((l + 1.0) / 2.0).powf(-2.0 / 3.0);
    Ok(n / slope)
}

/// Diameter whose resonance comb has local spacing `spacing_m` at the
/// configured wavelength. Self-consistent in the diameter because
/// [`comb_spacing_index`] depends on it.
pub fn invert_comb_spacing(
    spacing_m: f64,
    constants: &OpticalConstants,
    radial_order: u32,
) -> Result<f64, WgmError> {
    constants.validate()?;
    let mut d = invert_diameter(spacing_m, constants, constants.silica_index)?;
    for _ in 0..200 {
        let geometry = CavityGeometry::with_diameter(d)?;
        let index = comb_spacing_index(&geometry, constants, radial_order)?;
        let next = invert_diameter(spacing_m, constants, index)?;
        if (next - d).abs() <= 1e-14 * d {
            return Ok(next);
        }
        d = next;
    }
    Ok(d)
}

/// Fiber polish angles satisfying phase matching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolishAngles {
    /// `arcsin(N_eff / N_f)`.
    pub phi_rad: f64,
    /// `π/2 − phi_rad`.
    pub complement_rad: f64,
}

impl PolishAngles {
    pub fn phi_deg(&self) -> f64 {
        self.phi_rad.to_degrees()
    }

    pub fn complement_deg(&self) -> f64 {
        self.complement_rad.to_degrees()
    }
}

pub fn polish_angle(effective_index: f64, fiber_index: f64) -> Result<PolishAngles, WgmError> {
    if !(effective_index > 0.0 && fiber_index > 0.0) {
        return Err(invalid("indices must be positive"));
    }
    if effective_index > fiber_index {
        return Err(WgmError::PhaseMatching {
            effective: effective_index,
            fiber: fiber_index,
        });
    }
    let phi = (effective_index / fiber_index).asin();
    Ok(PolishAngles {
        phi_rad: phi,
        complement_rad: PI / 2.0 - phi,
    })
}

/// 1/e decay length `λ / (2π √(N_eff² − 1))` of the field outside the cavity.
pub fn evanescent_decay_length(effective_index: f64, wavelength_m: f64) -> Result<f64, WgmError> {
    if !(effective_index > 1.0) {
        return Err(invalid(
            "effective index must exceed 1 for an evanescent tail",
        ));
    }
    if !(wavelength_m > 0.0) {
        return Err(invalid("wavelength must be positive"));
    }
    Ok(wavelength_m / (2.0 * PI * (effective_index * effective_index - 1.0).sqrt()))
}

/// All resonances of radial order `radial_order` with wavelength in `band`,
/// sorted by increasing wavelength.
pub fn resonance_wavelengths(
    geometry: &CavityGeometry,
    constants: &OpticalConstants,
    radial_order: u32,
    band: (f64, f64),
) -> Result<Vec<WgmMode>, WgmError> {
    let (lo, hi) = band;
    if !(lo.is_finite() && hi.is_finite()) || lo <= 0.0 {
        return Err(invalid("band edges must be positive and finite"));
    }
    if lo >= hi {
        return Ok(Vec::new());
    }
    let alpha = airy_zero(radial_order)?;
    let n = constants.silica_index;
    let a = geometry.major_radius_m;
    let nx_at = |lambda: f64| n * size_parameter(a, lambda);
    let nx_min = nx_at(hi);
    if !(nx_min > MIN_ASYMPTOTIC_NX) {
        return Err(WgmError::AsymptoticValidity(nx_min));
    }

    // Smallest ℓ whose resonance is at or below `hi`, i.e. rhs(ℓ) ≥ N x(hi).
    let mut l = (nx_min - 0.5 - ((nx_min + 1.0) / 2.0).cbrt() * alpha)
        .floor()
        .max(0.0) as u32;
    while l > 0 && resonance_rhs(l as f64, alpha) >= nx_min {
        l -= 1;
    }
    while resonance_rhs(l as f64, alpha) < nx_min {
        l += 1;
    }

    let nx_max = nx_at(lo);
    let mut modes = Vec::new();
    while resonance_rhs(l as f64, alpha) <= nx_max {
        let lambda = solve_resonance(geometry, constants, alpha, l)?;
        if lambda >= lo && lambda <= hi {
            let x = size_parameter(a, lambda);
            modes.push(WgmMode {
                angular_number: l,
                radial_order,
                polarization: Polarization::TE,
                wavelength_m: lambda,
                size_parameter: x,
                effective_index: l as f64 / x,
            });
        }
        l += 1;
    }
    modes.sort_by(|p, q| p.wavelength_m.total_cmp(&q.wavelength_m));
    Ok(modes)
}

/// Root of the resonance residual in λ at fixed ℓ: bracket from the FSR
/// estimate, then Illinois-modified regula falsi with bisection fallback.
fn solve_resonance(
    geometry: &CavityGeometry,
    constants: &OpticalConstants,
    alpha: f64,
    l: u32,
) -> Result<f64, WgmError> {
    let n = constants.silica_index;
    let a = geometry.major_radius_m;
    let target = resonance_rhs(l as f64, alpha);
    // Residual decreases with λ.
    let f = |lambda: f64| n * size_parameter(a, lambda) - target;

    // Initial guess from ℓ ≈ x N_eff, bracket half-width one FSR.
    let guess = 2.0 * PI * a * n / (l as f64 + 0.5);
    let n_eff = effective_index(geometry, &constants.at_wavelength(guess), 1)
        .unwrap_or(n)
        .min(n);
    let width = guess * guess / (2.0 * PI * a * n_eff);
    let (mut lo, mut hi) = (guess - width, guess + width);
    let (mut f_lo, mut f_hi) = (f(lo), f(hi));
    let mut widen = 0;
    while f_lo < 0.0 || f_hi > 0.0 {
        if f_lo < 0.0 {
            lo -= width;
            f_lo = f(lo);
        }
        if f_hi > 0.0 {
            hi += width;
            f_hi = f(hi);
        }
        widen += 1;
        if widen > 1000 || lo <= 0.0 {
            return Err(invalid(format!("could not bracket resonance for ℓ = {l}")));
        }
    }

    let mut side = 0i8;
    for _ in 0..200 {
        let mut mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(mid > lo && mid < hi) {
            mid = 0.5 * (lo + hi);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 || (hi - lo) < RESONANCE_REL_TOL * mid {
            return Ok(mid);
        }
        if f_mid > 0.0 {
            lo = mid;
            f_lo = f_mid;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = mid;
            f_hi = f_mid;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
        if (hi - lo) < RESONANCE_REL_TOL * lo {
            return Ok(0.5 * (lo + hi));
        }
    }
    Ok(0.5 * (lo + hi))
}
