//! Implanted-ion depth profiles and their overlap with the vertical mode field.
//!
//! Depths are in meters, concentrations in ions/cm³ and doses in ions/cm²,
//! the units used by SRIM-style range tables.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::adaptive_simpson;

const CM_PER_M: f64 = 100.0;
const DOSE_REL_TOL: f64 = 1e-9;
const NORMALIZATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImplantError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("depth {depth} m outside the layer [0, {layer}] m")]
    DepthOutOfRange { depth: f64, layer: f64 },
    #[error("mode profile not normalized: ∫|E|² dz = {0} (expected 1)")]
    NotNormalized(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

/// Gaussian depth distribution of implanted ions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImplantProfile {
    pub peak_concentration_cm3: f64,
    pub peak_depth_m: f64,
    pub fwhm_m: f64,
    /// Nominal implanted fluence, compared against the integrated profile.
    pub fluence_cm2: f64,
    pub layer_thickness_m: f64,
}

impl Default for ImplantProfile {
    /// 600 keV Nd³⁺ into an 800 nm thermal oxide.
    fn default() -> Self {
        Self {
            peak_concentration_cm3: 2e19,
            peak_depth_m: 200e-9,
            fwhm_m: 110e-9,
            fluence_cm2: 2.5e14,
            layer_thickness_m: 800e-9,
        }
    }
}

pub fn fwhm_to_sigma(fwhm: f64) -> f64 {
    fwhm / (2.0 * (2.0 * 2f64.ln()).sqrt())
}

impl ImplantProfile {
    pub fn validate(&self) -> Result<(), ImplantError> {
        let bad = |m: &str| Err(ImplantError::InvalidParameter(m.to_string()));
        if !(self.peak_concentration_cm3 >= 0.0 && self.peak_concentration_cm3.is_finite()) {
            return bad("peak concentration must be non-negative");
        }
        if !(self.fwhm_m > 0.0) {
            return bad("FWHM must be positive");
        }
        if !(self.layer_thickness_m > 0.0) {
            return bad("layer thickness must be positive");
        }
        if !(self.peak_depth_m.is_finite() && self.fluence_cm2 >= 0.0) {
            return bad("peak depth must be finite and fluence non-negative");
        }
        Ok(())
    }

    pub fn sigma_m(&self) -> f64 {
        fwhm_to_sigma(self.fwhm_m)
    }

    /// Untruncated Gaussian value at any depth.
    fn gaussian(&self, depth: f64) -> f64 {
        let s = self.sigma_m();
        let u = depth - self.peak_depth_m;
        self.peak_concentration_cm3 * (-u * u / (2.0 * s * s)).exp()
    }

    /// Concentration at `depth` inside the layer.
    pub fn concentration_at(&self, depth: f64) -> Result<f64, ImplantError> {
        if !(0.0..=self.layer_thickness_m).contains(&depth) {
            return Err(ImplantError::DepthOutOfRange {
                depth,
                layer: self.layer_thickness_m,
            });
        }
        Ok(self.gaussian(depth))
    }

    /// Sub-intervals of the layer that isolate the Gaussian core.
    fn breakpoints(&self) -> Vec<f64> {
        let s = self.sigma_m();
        let mut pts = vec![0.0, self.layer_thickness_m];
        for k in [-8.0, 8.0] {
            let z = self.peak_depth_m + k * s;
            if z > 0.0 && z < self.layer_thickness_m {
                pts.push(z);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts
    }

    /// Ions per cm² retained in the layer.
    pub fn integrated_dose(&self) -> f64 {
        if self.peak_concentration_cm3 == 0.0 {
            return 0.0;
        }
        let pts = self.breakpoints();
        let in_m: f64 = pts
            .windows(2)
            .map(|w| adaptive_simpson(|z| self.gaussian(z), w[0], w[1], DOSE_REL_TOL))
            .sum();
        in_m * CM_PER_M
    }

    /// `C₀ σ √(2π)`, the dose of the untruncated Gaussian.
    pub fn untruncated_dose(&self) -> f64 {
        self.peak_concentration_cm3 * self.sigma_m() * CM_PER_M * (2.0 * PI).sqrt()
    }

    /// Signed percent deviation of the integrated dose from the nominal fluence.
    pub fn fluence_deviation_percent(&self) -> f64 {
        100.0 * (self.integrated_dose() - self.fluence_cm2) / self.fluence_cm2
    }

    /// Samples `(depth_m, concentration_cm3)` on `n` evenly spaced depths.
    pub fn sample(&self, n: usize) -> Vec<(f64, f64)> {
        let n = n.max(2);
        let h = self.layer_thickness_m / (n - 1) as f64;
        (0..n)
            .map(|i| {
                let z = i as f64 * h;
                (z, self.gaussian(z))
            })
            .collect()
    }

    /// Estimates a Gaussian profile from tabulated depth data such as SRIM output.
    pub fn from_samples(samples: &[(f64, f64)], fluence_cm2: f64) -> Result<Self, ImplantError> {
        if samples.len() < 3 {
            return Err(ImplantError::InvalidParameter(
                "need at least 3 samples".into(),
            ));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(ImplantError::InvalidParameter(
                "depths must increase".into(),
            ));
        }
        let (imax, &(z_peak, c_peak)) = samples
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .expect("non-empty");
        if !(c_peak > 0.0) {
            return Err(ImplantError::InvalidParameter(
                "profile has no positive samples".into(),
            ));
        }
        let half = c_peak / 2.0;
        let crossing = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
            for j in range {
                let (k, l) = (j, j + 1);
                let (za, ca) = samples[k];
                let (zb, cb) = samples[l];
                if (ca - half) * (cb - half) <= 0.0 && ca != cb {
                    return Some(za + (half - ca) * (zb - za) / (cb - ca));
                }
            }
            None
        };
        let left = crossing(&mut (0..imax).rev());
        let right = crossing(&mut (imax..samples.len() - 1));
        let fwhm = match (left, right) {
            (Some(l), Some(r)) => r - l,
            (Some(l), None) => 2.0 * (z_peak - l),
            (None, Some(r)) => 2.0 * (r - z_peak),
            (None, None) => {
                return Err(ImplantError::InvalidParameter(
                    "profile never falls to half maximum".into(),
                ))
            }
        };
        Ok(Self {
            peak_concentration_cm3: c_peak,
            peak_depth_m: z_peak,
            fwhm_m: fwhm,
            fluence_cm2,
            layer_thickness_m: samples.last().expect("non-empty").0,
        })
    }
}

/// Vertical intensity distribution `|E(z)|²` of a mode across the layer,
/// sampled on evenly spaced depths from 0 to the layer thickness.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProfile {
    layer_thickness_m: f64,
    intensity: Vec<f64>,
}

impl ModeProfile {
    pub fn new(layer_thickness_m: f64, intensity: Vec<f64>) -> Result<Self, ImplantError> {
        if !(layer_thickness_m > 0.0) || intensity.len() < 2 {
            return Err(ImplantError::InvalidParameter(
                "mode profile needs a positive layer and at least two samples".into(),
            ));
        }
        if intensity.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(ImplantError::InvalidParameter(
                "intensities must be finite and ≥ 0".into(),
            ));
        }
        Ok(Self {
            layer_thickness_m,
            intensity,
        })
    }

    pub fn from_fn(
        layer_thickness_m: f64,
        samples: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self, ImplantError> {
        let samples = samples.max(2);
        let h = layer_thickness_m / (samples - 1) as f64;
        Self::new(
            layer_thickness_m,
            (0..samples).map(|i| f(i as f64 * h)).collect(),
        )
    }

    /// `cos²(π (z − t/2) / t_eff)` across the layer, normalized.
    pub fn cosine_squared(
        layer_thickness_m: f64,
        effective_thickness_m: f64,
        samples: usize,
    ) -> Result<Self, ImplantError> {
        let mid = layer_thickness_m / 2.0;
        Self::from_fn(layer_thickness_m, samples, |z| {
            (PI * (z - mid) / effective_thickness_m).cos().powi(2)
        })?
        .normalized()
    }

    /// Fundamental TE mode of a symmetric slab of index `index` in air,
    /// keeping only the interior cosine-squared part.
    pub fn slab_fundamental(
        layer_thickness_m: f64,
        wavelength_m: f64,
        index: f64,
        samples: usize,
    ) -> Result<Self, ImplantError> {
        let t_eff = slab_effective_thickness(layer_thickness_m, wavelength_m, index)?;
        Self::cosine_squared(layer_thickness_m, t_eff, samples)
    }

    pub fn layer_thickness_m(&self) -> f64 {
        self.layer_thickness_m
    }

    fn step(&self) -> f64 {
        self.layer_thickness_m / (self.intensity.len() - 1) as f64
    }

    /// Linear interpolation of the sampled intensity.
    pub fn intensity_at(&self, z: f64) -> f64 {
        let h = self.step();
        let u = (z / h).clamp(0.0, (self.intensity.len() - 1) as f64);
        let i = (u.floor() as usize).min(self.intensity.len() - 2);
        let f = u - i as f64;
        self.intensity[i] * (1.0 - f) + self.intensity[i + 1] * f
    }

    /// `∫|E|² dz` over the layer (exact for the piecewise-linear interpolant).
    pub fn norm(&self) -> f64 {
        let h = self.step();
        let n = self.intensity.len();
        h * (self.intensity.iter().sum::<f64>() - 0.5 * (self.intensity[0] + self.intensity[n - 1]))
    }

    pub fn normalized(mut self) -> Result<Self, ImplantError> {
        let norm = self.norm();
        if !(norm > 0.0) {
            return Err(ImplantError::InvalidParameter(
                "mode profile is identically zero".into(),
            ));
        }
        self.intensity.iter_mut().for_each(|v| *v /= norm);
        Ok(self)
    }

    pub fn max_intensity(&self) -> f64 {
        self.intensity.iter().copied().fold(0.0, f64::max)
    }
}

/// Period `π/κ` of the interior cosine of the fundamental slab mode, from
/// `u tan u = √(V² − u²)` with `u = κ t / 2` and `V = k₀ (t/2) √(n² − 1)`.
pub fn slab_effective_thickness(
    thickness_m: f64,
    wavelength_m: f64,
    index: f64,
) -> Result<f64, ImplantError> {
    if !(thickness_m > 0.0 && wavelength_m > 0.0 && index > 1.0) {
        return Err(ImplantError::InvalidParameter(
            "slab needs positive thickness and wavelength, index > 1".into(),
        ));
    }
    let v = 2.0 * PI / wavelength_m * thickness_m / 2.0 * (index * index - 1.0).sqrt();
    let g = |u: f64| u * u.tan() - (v * v - u * u).max(0.0).sqrt();
    // The fundamental root lies in (0, min(V, π/2)); g is increasing there.
    let (mut lo, mut hi) = (0.0, v.min(PI / 2.0 - 1e-12));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = 0.5 * (lo + hi);
    let kappa = 2.0 * u / thickness_m;
    Ok(PI / kappa)
}

/// Ion-weighted mode intensity relative to placing every ion at the field
/// maximum: `∫C|E|² dz / (max|E|² ∫C dz)`.
pub fn overlap_figure_of_merit(
    profile: &ImplantProfile,
    mode: &ModeProfile,
) -> Result<f64, ImplantError> {
    profile.validate()?;
    let pts: Vec<f64> = profile
        .breakpoints()
        .into_iter()
        .filter(|z| *z <= mode.layer_thickness_m)
        .collect();
    overlap_with_density(|z| profile.gaussian(z), &pts, mode)
}

/// Overlap for an arbitrary non-negative density. `breakpoints` must span the
/// layer and split it where the density has narrow features.
pub fn overlap_with_density(
    density: impl Fn(f64) -> f64,
    breakpoints: &[f64],
    mode: &ModeProfile,
) -> Result<f64, ImplantError> {
    let norm = mode.norm();
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(ImplantError::NotNormalized(norm));
    }
    let integrate = |f: &dyn Fn(f64) -> f64| -> f64 {
        breakpoints
            .windows(2)
            .map(|w| adaptive_simpson(f, w[0], w[1], 1e-10))
            .sum()
    };
    let weighted = integrate(&|z| density(z) * mode.intensity_at(z));
    let total = integrate(&|z| density(z));
    if !(total > 0.0) {
        return Err(ImplantError::InvalidParameter(
            "ion density integrates to zero".into(),
        ));
    }
    Ok((weighted / (mode.max_intensity() * total)).clamp(0.0, 1.0))
}

/// Writes `depth_m,concentration_cm3` rows with a header.
pub fn write_profile_csv<W: Write>(mut w: W, samples: &[(f64, f64)]) -> std::io::Result<()> {
    writeln!(w, "depth_m,concentration_cm3")?;
    for (z, c) in samples {
        writeln!(w, "{z:.6e},{c:.6e}")?;
    }
    Ok(())
}

/// Reads `depth_m,concentration_cm3` rows, skipping `#` comments and the header.
pub fn read_profile_csv<R: BufRead>(r: R) -> Result<Vec<(f64, f64)>, ImplantError> {
    let mut out = Vec::new();
    let mut header_seen = false;
    for (idx, line) in r.lines().enumerate() {
        let line = line.map_err(|e| ImplantError::Io(e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !header_seen {
            header_seen = true;
            continue;
        }
        let parse_err = |message: String| ImplantError::Parse {
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(parse_err(format!(
                "expected 2 columns, found {}",
                fields.len()
            )));
        }
        let z: f64 = fields[0]
            .parse()
            .map_err(|_| parse_err(format!("bad depth '{}'", fields[0])))?;
        let c: f64 = fields[1]
            .parse()
            .map_err(|_| parse_err(format!("bad concentration '{}'", fields[1])))?;
        out.push((z, c));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn concentration_at_peak_and_half_width() {
        let p = ImplantProfile::default();
        assert_relative_eq!(
            p.concentration_at(200e-9).unwrap(),
            2e19,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            p.concentration_at(145e-9).unwrap(),
            1e19,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            p.concentration_at(255e-9).unwrap(),
            1e19,
            max_relative = 1e-12
        );
    }

    #[test]
    fn concentration_at_surface() {
        let p = ImplantProfile::default();
        assert!((p.sigma_m() - 46.71e-9).abs() < 0.01e-9);
        let c = p.concentration_at(0.0).unwrap();
        assert!((c - 2.1e15).abs() < 0.05e15, "{c}");
        assert!(p.concentration_at(-1e-9).is_err());
        assert!(p.concentration_at(801e-9).is_err());
    }

    #[test]
    fn dose_matches_closed_form_and_fluence() {
        let p = ImplantProfile::default();
        let dose = p.integrated_dose();
        // The surface cuts off a 4.3σ tail, about 1e-5 of the dose.
        assert_relative_eq!(dose, p.untruncated_dose(), max_relative = 2e-5);
        assert!(dose < p.untruncated_dose());
        assert!((dose - 2.34e14).abs() < 0.01e14, "{dose}");
        assert!((dose - 2.5e14).abs() / 2.5e14 < 0.10);
    }

    #[test]
    fn dose_is_linear_in_peak() {
        let p = ImplantProfile::default();
        let q = ImplantProfile {
            peak_concentration_cm3: 4e19,
            ..p
        };
        assert_relative_eq!(
            q.integrated_dose(),
            2.0 * p.integrated_dose(),
            max_relative = 1e-9
        );
        let zero = ImplantProfile {
            peak_concentration_cm3: 0.0,
            ..p
        };
        assert_eq!(zero.integrated_dose(), 0.0);
    }

    #[test]
    fn ideal_placement_has_unit_overlap() {
        let mode = ModeProfile::cosine_squared(800e-9, 1000e-9, 2001).unwrap();
        let thin = ImplantProfile {
            peak_depth_m: 400e-9,
            fwhm_m: 0.1e-9,
            ..ImplantProfile::default()
        };
        let eta = overlap_figure_of_merit(&thin, &mode).unwrap();
        assert!((eta - 1.0).abs() < 1e-6, "{eta}");
    }

    #[test]
    fn uniform_density_gives_flatness_factor() {
        let mode = ModeProfile::cosine_squared(800e-9, 800e-9, 4001).unwrap();
        let eta = overlap_with_density(|_| 1.0, &[0.0, 800e-9], &mode).unwrap();
        // mean/max of cos² over a full period
        assert!((eta - 0.5).abs() < 1e-6, "{eta}");
    }

    #[test]
    fn unnormalized_mode_is_rejected() {
        let mode = ModeProfile::from_fn(800e-9, 101, |_| 1.0).unwrap();
        let err = overlap_figure_of_merit(&ImplantProfile::default(), &mode).unwrap_err();
        assert!(matches!(err, ImplantError::NotNormalized(_)));
    }

    #[test]
    fn slab_mode_extends_beyond_layer() {
        let t_eff = slab_effective_thickness(800e-9, 900e-9, 1.45).unwrap();
        assert!(t_eff > 800e-9 && t_eff < 1300e-9, "{t_eff}");
    }

    #[test]
    fn default_profile_couples_well_to_slab_mode() {
        let mode = ModeProfile::slab_fundamental(800e-9, 900e-9, 1.45, 4001).unwrap();
        let eta = overlap_figure_of_merit(&ImplantProfile::default(), &mode).unwrap();
        assert!(eta > 0.5 && eta < 1.0, "{eta}");
    }

    #[test]
    fn profile_estimated_from_samples() {
        let p = ImplantProfile::default();
        let est = ImplantProfile::from_samples(&p.sample(1601), p.fluence_cm2).unwrap();
        assert_relative_eq!(est.peak_depth_m, p.peak_depth_m, max_relative = 1e-9);
        assert_relative_eq!(est.fwhm_m, p.fwhm_m, max_relative = 1e-3);
        assert_relative_eq!(
            est.peak_concentration_cm3,
            p.peak_concentration_cm3,
            max_relative = 1e-9
        );
    }

    #[test]
    fn csv_reader_reports_line_numbers() {
        let text = "# comment\ndepth_m,concentration_cm3\n0.0,1e19\n1e-9,oops\n";
        let err = read_profile_csv(text.as_bytes()).unwrap_err();
        assert_eq!(
            err,
            ImplantError::Parse {
                line: 4,
                message: "bad concentration 'oops'".into()
            }
        );
    }
}
