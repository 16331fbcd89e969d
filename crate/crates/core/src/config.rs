//! Layered run configuration: built-in defaults, then a flat `key = value`
//! file, then command-line overrides. Values carry their unit in the key
//! name and are converted to SI exactly once, in the typed accessors below.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::implant::ImplantProfile;
use crate::spectra::SynthesisParams;
use crate::thermal::{
    FreeSurface, LaserProfile, LaserSource, MaterialProps, MaterialSet, SweepOrder,
};
use crate::wgm::{CavityGeometry, OpticalConstants};

/// Environment variable naming the default config file.
pub const CONFIG_ENV_VAR: &str = "TOROIDSIM_CONFIG";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("key '{key}': cannot parse '{value}' as {expected}")]
    BadValue {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("key '{key}': {message}")]
    Invalid { key: String, message: String },
}

/// `(key, default, description)`
pub const DEFAULTS: &[(&str, &str, &str)] = &[
    ("optics.silica_index", "1.45", "refractive index of silica"),
    (
        "optics.fiber_core_index",
        "1.457",
        "core index of the polished fiber",
    ),
    ("optics.wavelength_nm", "900", "analysis wavelength"),
    ("mode.radial_order", "1", "radial order n of the WGM family"),
    (
        "geometry.diameter_um",
        "55",
        "toroid major diameter for optical calculations",
    ),
    ("geometry.disk_thickness_nm", "800", "silica disk thickness"),
    ("geometry.pillar_height_um", "25", "silicon pillar height"),
    (
        "geometry.pillar_diameter_um",
        "22",
        "pillar diameter under the optical toroid",
    ),
    (
        "modes.band_nm",
        "880:920",
        "wavelength band searched for resonances",
    ),
    ("silica.conductivity_w_mk", "1.4", ""),
    ("silica.density_kg_m3", "2200", ""),
    ("silica.heat_capacity_j_kgk", "740", ""),
    (
        "silica.fusion_temperature_k",
        "1986",
        "silica softening point",
    ),
    ("silicon.conductivity_w_mk", "148", ""),
    ("silicon.density_kg_m3", "2329", ""),
    ("silicon.heat_capacity_j_kgk", "713", ""),
    (
        "thermal.disk_diameter_um",
        "100",
        "initial disk diameter before reflow",
    ),
    (
        "thermal.pillar_diameter_um",
        "40",
        "pillar diameter under the disk",
    ),
    (
        "thermal.ambient_k",
        "300",
        "substrate and surroundings temperature",
    ),
    ("thermal.nr", "100", "radial cells"),
    ("thermal.disk_cells", "4", "cells across the disk thickness"),
    ("thermal.omega", "auto", "SOR relaxation factor, or auto"),
    ("thermal.tol_k", "1e-6", "SOR stopping tolerance"),
    ("thermal.max_iterations", "500000", "SOR iteration cap"),
    ("thermal.sweep", "red-black", "red-black or lexicographic"),
    (
        "thermal.free_surface",
        "insulating",
        "insulating or radiative",
    ),
    (
        "thermal.h_rad_w_m2k",
        "0",
        "linearized radiative coefficient",
    ),
    ("laser.power_mw", "60", "incident CO2 laser power"),
    ("laser.beam_radius_um", "50", "1/e² intensity radius"),
    (
        "laser.absorbed_fraction",
        "0.5",
        "fraction absorbed by the silica",
    ),
    (
        "laser.profile",
        "gaussian_annulus",
        "gaussian_annulus or uniform_disk",
    ),
    (
        "laser.inner_radius_um",
        "20",
        "no absorption inside this radius",
    ),
    ("implant.peak_concentration_cm3", "2e19", ""),
    ("implant.peak_depth_nm", "200", ""),
    ("implant.fwhm_nm", "110", ""),
    ("implant.fluence_cm2", "2.5e14", "nominal implanted fluence"),
    ("implant.layer_thickness_nm", "800", ""),
    ("implant.samples", "801", "rows in the exported profile"),
    ("synth.q", "1e8", "intrinsic quality factor (inf allowed)"),
    (
        "synth.splitting_nm",
        "1.2",
        "TM comb offset from the TE comb",
    ),
    ("synth.envelope_center_nm", "900", "Nd emission band center"),
    ("synth.envelope_fwhm_nm", "30", "Nd emission band FWHM"),
    ("synth.envelope_amplitude", "1", ""),
    ("synth.gap_um", "0", "fiber to toroid gap"),
    ("synth.background", "0.1", ""),
    ("synth.noise_rms", "0.02", ""),
    ("synth.resolution_nm", "0.1", "spectrograph resolution FWHM"),
    ("synth.grid_step_nm", "0.025", ""),
    ("synth.band_nm", "880:920", ""),
    ("synth.seed", "1", "noise seed"),
    (
        "analyze.min_prominence",
        "auto",
        "peak prominence threshold, or auto",
    ),
    (
        "analyze.resolution_nm",
        "0.1",
        "instrument resolution of analyzed spectra",
    ),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            values: DEFAULTS
                .iter()
                .map(|(k, v, _)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: idx + 1,
            message: format!("expected 'key = value', got '{line}'"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(ConfigError::Syntax {
                line: idx + 1,
                message: "empty key".into(),
            });
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.trim().to_string();
                Ok(())
            }
            None => Err(ConfigError::UnknownKey(key.to_string())),
        }
    }

    /// Applies a config file's contents on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (k, v) in parse_config_text(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax {
                line: 0,
                message: format!("override '{assignment}' is not key=value"),
            })?;
        self.set(k.trim(), v)
    }

    pub fn get(&self, key: &str) -> Result<&str, ConfigError> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| ConfigError::UnknownKey(key.to_string()))
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.get(key)?;
        v.parse().map_err(|_| ConfigError::BadValue {
            key: key.into(),
            value: v.into(),
            expected: "a number",
        })
    }

    pub fn positive(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.f64(key)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(ConfigError::Invalid {
                key: key.into(),
                message: format!("must be positive, got {v}"),
            })
        }
    }

    pub fn u64(&self, key: &str) -> Result<u64, ConfigError> {
        let v = self.get(key)?;
        v.parse().map_err(|_| ConfigError::BadValue {
            key: key.into(),
            value: v.into(),
            expected: "a non-negative integer",
        })
    }

    /// `auto` (or empty) maps to `None`.
    pub fn optional_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(key)? {
            "auto" | "" => Ok(None),
            _ => self.f64(key).map(Some),
        }
    }

    /// `lo:hi` in nanometers, returned in meters.
    pub fn band_nm(&self, key: &str) -> Result<(f64, f64), ConfigError> {
        let v = self.get(key)?;
        parse_band_nm(v).ok_or_else(|| ConfigError::BadValue {
            key: key.into(),
            value: v.into(),
            expected: "lo:hi in nm",
        })
    }

    /// Effective `(key, value)` pairs, sorted by key.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Every effective `key = value`, sorted by key.
    pub fn echo(&self) -> Vec<String> {
        self.values
            .iter()
            .map(|(k, v)| format!("{k} = {v}"))
            .collect()
    }

    fn invalid(key: &str, e: impl std::fmt::Display) -> ConfigError {
        ConfigError::Invalid {
            key: key.into(),
            message: e.to_string(),
        }
    }

    pub fn optical_constants(&self) -> Result<OpticalConstants, ConfigError> {
        OpticalConstants::new(
            self.f64("optics.silica_index")?,
            self.f64("optics.fiber_core_index")?,
            self.f64("optics.wavelength_nm")? * 1e-9,
        )
        .map_err(|e| Self::invalid("optics", e))
    }

    pub fn radial_order(&self) -> Result<u32, ConfigError> {
        let n = self.u64("mode.radial_order")?;
        u32::try_from(n).map_err(|e| Self::invalid("mode.radial_order", e))
    }

    /// Toroid used by the optical commands.
    pub fn optical_geometry(&self) -> Result<CavityGeometry, ConfigError> {
        CavityGeometry::new(
            self.positive("geometry.diameter_um")? * 0.5e-6,
            self.positive("geometry.disk_thickness_nm")? * 1e-9,
            self.positive("geometry.pillar_height_um")? * 1e-6,
            self.positive("geometry.pillar_diameter_um")? * 0.5e-6,
        )
        .map_err(|e| Self::invalid("geometry", e))
    }

    /// Disk before reflow, used by the thermal commands.
    pub fn thermal_geometry(&self) -> Result<CavityGeometry, ConfigError> {
        CavityGeometry::new(
            self.positive("thermal.disk_diameter_um")? * 0.5e-6,
            self.positive("geometry.disk_thickness_nm")? * 1e-9,
            self.positive("geometry.pillar_height_um")? * 1e-6,
            self.positive("thermal.pillar_diameter_um")? * 0.5e-6,
        )
        .map_err(|e| Self::invalid("thermal", e))
    }

    pub fn materials(&self) -> Result<MaterialSet, ConfigError> {
        let silica = MaterialProps::new(
            self.f64("silica.conductivity_w_mk")?,
            self.f64("silica.density_kg_m3")?,
            self.f64("silica.heat_capacity_j_kgk")?,
            Some(self.f64("silica.fusion_temperature_k")?),
        )
        .map_err(|e| Self::invalid("silica", e))?;
        let silicon = MaterialProps::new(
            self.f64("silicon.conductivity_w_mk")?,
            self.f64("silicon.density_kg_m3")?,
            self.f64("silicon.heat_capacity_j_kgk")?,
            None,
        )
        .map_err(|e| Self::invalid("silicon", e))?;
        Ok(MaterialSet { silica, silicon })
    }

    pub fn laser(&self) -> Result<LaserSource, ConfigError> {
        let profile = match self.get("laser.profile")? {
            "gaussian_annulus" => LaserProfile::GaussianAnnulus,
            "uniform_disk" => LaserProfile::UniformDisk,
            other => {
                return Err(ConfigError::BadValue {
                    key: "laser.profile".into(),
                    value: other.into(),
                    expected: "gaussian_annulus or uniform_disk",
                })
            }
        };
        let laser = LaserSource {
            power_w: self.f64("laser.power_mw")? * 1e-3,
            beam_radius_m: self.f64("laser.beam_radius_um")? * 1e-6,
            absorbed_fraction: self.f64("laser.absorbed_fraction")?,
            profile,
            inner_radius_m: self.f64("laser.inner_radius_um")? * 1e-6,
        };
        laser.validate().map_err(|e| Self::invalid("laser", e))?;
        Ok(laser)
    }

    pub fn free_surface(&self) -> Result<FreeSurface, ConfigError> {
        match self.get("thermal.free_surface")? {
            "insulating" => Ok(FreeSurface::Insulating),
            "radiative" => Ok(FreeSurface::Radiative {
                h_w_m2k: self.f64("thermal.h_rad_w_m2k")?,
            }),
            other => Err(ConfigError::BadValue {
                key: "thermal.free_surface".into(),
                value: other.into(),
                expected: "insulating or radiative",
            }),
        }
    }

    pub fn sweep_order(&self) -> Result<SweepOrder, ConfigError> {
        match self.get("thermal.sweep")? {
            "red-black" => Ok(SweepOrder::RedBlack),
            "lexicographic" => Ok(SweepOrder::Lexicographic),
            other => Err(ConfigError::BadValue {
                key: "thermal.sweep".into(),
                value: other.into(),
                expected: "red-black or lexicographic",
            }),
        }
    }

    pub fn implant_profile(&self) -> Result<ImplantProfile, ConfigError> {
        let p = ImplantProfile {
            peak_concentration_cm3: self.f64("implant.peak_concentration_cm3")?,
            peak_depth_m: self.f64("implant.peak_depth_nm")? * 1e-9,
            fwhm_m: self.f64("implant.fwhm_nm")? * 1e-9,
            fluence_cm2: self.f64("implant.fluence_cm2")?,
            layer_thickness_m: self.f64("implant.layer_thickness_nm")? * 1e-9,
        };
        p.validate().map_err(|e| Self::invalid("implant", e))?;
        Ok(p)
    }

    pub fn synthesis_params(&self) -> Result<SynthesisParams, ConfigError> {
        let p = SynthesisParams {
            geometry: self.optical_geometry()?,
            constants: self.optical_constants()?,
            radial_order: self.radial_order()?,
            intrinsic_q: self.f64("synth.q")?,
            te_tm_splitting_m: self.f64("synth.splitting_nm")? * 1e-9,
            envelope_center_m: self.f64("synth.envelope_center_nm")? * 1e-9,
            envelope_fwhm_m: self.f64("synth.envelope_fwhm_nm")? * 1e-9,
            envelope_amplitude: self.f64("synth.envelope_amplitude")?,
            gap_m: self.f64("synth.gap_um")? * 1e-6,
            background_level: self.f64("synth.background")?,
            noise_rms: self.f64("synth.noise_rms")?,
            resolution_fwhm_m: self.f64("synth.resolution_nm")? * 1e-9,
            seed: self.u64("synth.seed")?,
        };
        p.validate().map_err(|e| Self::invalid("synth", e))?;
        Ok(p)
    }
}

/// Parses `lo:hi` (nm) into meters.
pub fn parse_band_nm(text: &str) -> Option<(f64, f64)> {
    let (lo, hi) = text.split_once(':')?;
    let lo: f64 = lo.trim().parse().ok()?;
    let hi: f64 = hi.trim().parse().ok()?;
    (lo.is_finite() && hi.is_finite()).then_some((lo * 1e-9, hi * 1e-9))
}
