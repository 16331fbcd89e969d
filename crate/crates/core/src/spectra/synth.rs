use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{SpectraError, Spectrum};
use crate::wgm::{
    evanescent_decay_length, resonance_wavelengths, CavityGeometry, OpticalConstants, Polarization,
};

/// Integrated intensity (a.u. × m) of a line at the envelope peak with unit
/// amplitude and zero gap: a resolution-limited 0.1 nm line then peaks near 1.
pub const REFERENCE_LINE_WIDTH_M: f64 = 0.1e-9;

/// Envelope level below which a band is considered outside the emission.
const ENVELOPE_SUPPORT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisParams {
    pub geometry: CavityGeometry,
    pub constants: OpticalConstants,
    pub radial_order: u32,
    /// `f64::INFINITY` gives delta-like lines.
    pub intrinsic_q: f64,
    /// Offset of the TM comb from the TE comb.
    pub te_tm_splitting_m: f64,
    pub envelope_center_m: f64,
    pub envelope_fwhm_m: f64,
    pub envelope_amplitude: f64,
    pub gap_m: f64,
    pub background_level: f64,
    pub noise_rms: f64,
    /// Spectrograph FWHM; 0 disables the instrument kernel.
    pub resolution_fwhm_m: f64,
    pub seed: u64,
}

impl Default for SynthesisParams {
    /// 55 µm toroid seen through a 0.1 nm spectrograph, 1.2 nm TE–TM splitting.
    fn default() -> Self {
        Self {
            geometry: CavityGeometry::with_diameter(55e-6).expect("valid geometry"),
            constants: OpticalConstants::default(),
            radial_order: 1,
            intrinsic_q: 1e8,
            te_tm_splitting_m: 1.2e-9,
            envelope_center_m: 900e-9,
            envelope_fwhm_m: 30e-9,
            envelope_amplitude: 1.0,
            gap_m: 0.0,
            background_level: 0.1,
            noise_rms: 0.02,
            resolution_fwhm_m: 0.1e-9,
            seed: 1,
        }
    }
}

impl SynthesisParams {
    pub fn validate(&self) -> Result<(), SpectraError> {
        let bad = |m: &str| Err(SpectraError::InvalidParameter(m.to_string()));
        self.geometry.validate()?;
        self.constants.validate()?;
        if !(self.intrinsic_q > 0.0) {
            return bad("intrinsic Q must be positive");
        }
        if !(self.envelope_fwhm_m > 0.0) {
            return bad("envelope FWHM must be positive");
        }
        if !(self.gap_m >= 0.0) {
            return bad("gap must be non-negative");
        }
        if !(self.background_level >= 0.0
            && self.noise_rms >= 0.0
            && self.envelope_amplitude >= 0.0)
        {
            return bad("background, noise and amplitude must be non-negative");
        }
        if !(self.resolution_fwhm_m >= 0.0) {
            return bad("resolution must be non-negative");
        }
        if !self.te_tm_splitting_m.is_finite() {
            return bad("TE–TM splitting must be finite");
        }
        Ok(())
    }

    /// Gaussian Nd³⁺ emission envelope, 1 at its center.
    pub fn envelope(&self, wavelength_m: f64) -> f64 {
        let u = (wavelength_m - self.envelope_center_m) / self.envelope_fwhm_m;
        (-4.0 * 2f64.ln() * u * u).exp()
    }
}

/// One Lorentzian line of the synthesized comb.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombLine {
    pub wavelength_m: f64,
    pub polarization: Polarization,
    /// Integrated intensity (a.u. × m).
    pub area: f64,
    pub fwhm_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SynthesisWarning {
    /// The emission envelope is negligible over the whole band.
    EnvelopeOutsideBand,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub spectrum: Spectrum,
    /// Every line that contributes to the band, sorted by wavelength.
    pub lines: Vec<CombLine>,
    pub warnings: Vec<SynthesisWarning>,
}

impl Synthesis {
    pub fn lines_within(&self, lo: f64, hi: f64) -> impl Iterator<Item = &CombLine> {
        self.lines
            .iter()
            .filter(move |l| l.wavelength_m >= lo && l.wavelength_m <= hi)
    }
}

/// Renders the TE/TM comb over `band` on a uniform grid of `grid_step` (m).
pub fn synthesize(
    params: &SynthesisParams,
    band: (f64, f64),
    grid_step: f64,
) -> Result<Synthesis, SpectraError> {
    params.validate()?;
    let (lo, hi) = band;
    if !(lo > 0.0 && hi > lo) {
        return Err(SpectraError::InvalidParameter(
            "band must satisfy 0 < λ_min < λ_max".into(),
        ));
    }
    if !(grid_step > 0.0) {
        return Err(SpectraError::InvalidParameter(
            "grid step must be positive".into(),
        ));
    }
    let res = params.resolution_fwhm_m;
    if res > 0.0 && grid_step > res / 4.0 {
        return Err(SpectraError::Undersampled {
            step: grid_step,
            resolution: res,
        });
    }

    let n = ((hi - lo) / grid_step).floor() as usize + 1;
    let grid: Vec<f64> = (0..n).map(|i| lo + i as f64 * grid_step).collect();

    let mut warnings = Vec::new();
    let env_max = envelope_max(params, lo, hi);
    if env_max < ENVELOPE_SUPPORT {
        log::warn!("band [{lo:.4e}, {hi:.4e}] m lies outside the emission envelope");
        warnings.push(SynthesisWarning::EnvelopeOutsideBand);
    }

    let lines = comb_lines(params, lo, hi, grid_step)?;

    // Bin-integrated Lorentzians keep each line's area exact on the grid.
    let mut density = vec![0.0; n];
    for line in &lines {
        let gamma = line.fwhm_m / 2.0;
        for (i, &x) in grid.iter().enumerate() {
            let (a, b) = (
                x - grid_step / 2.0 - line.wavelength_m,
                x + grid_step / 2.0 - line.wavelength_m,
            );
            let frac = if gamma > 0.0 {
                ((b / gamma).atan() - (a / gamma).atan()) / PI
            } else if a <= 0.0 && b > 0.0 {
                1.0
            } else {
                0.0
            };
            density[i] += line.area * frac / grid_step;
        }
    }

    let mut intensity = convolve_gaussian(&density, res, grid_step);

    let noise = if params.noise_rms > 0.0 {
        Some(
            Normal::new(0.0, params.noise_rms)
                .map_err(|e| SpectraError::InvalidParameter(e.to_string()))?,
        )
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for v in intensity.iter_mut() {
        *v += params.background_level;
        if let Some(noise) = &noise {
            *v += noise.sample(&mut rng);
        }
        *v = v.max(0.0);
    }

    Ok(Synthesis {
        spectrum: Spectrum::new(grid, intensity, res)?,
        lines,
        warnings,
    })
}

fn envelope_max(params: &SynthesisParams, lo: f64, hi: f64) -> f64 {
    let c = params.envelope_center_m.clamp(lo, hi);
    params.envelope(c)
}

/// TE lines from the resonance condition and TM lines offset by the splitting,
/// over the band widened by enough margin to capture tails entering it.
fn comb_lines(
    params: &SynthesisParams,
    lo: f64,
    hi: f64,
    grid_step: f64,
) -> Result<Vec<CombLine>, SpectraError> {
    let q = params.intrinsic_q;
    let width_at = |lambda: f64| if q.is_finite() { lambda / q } else { 0.0 };
    let margin = params.te_tm_splitting_m.abs()
        + 10.0 * params.resolution_fwhm_m
        + (100.0 * width_at(hi)).min(20e-9)
        + grid_step;
    let te = resonance_wavelengths(
        &params.geometry,
        &params.constants,
        params.radial_order,
        ((lo - margin).max(1e-9), hi + margin),
    )?;
    let mut lines = Vec::with_capacity(2 * te.len());
    for mode in &te {
        let decay = evanescent_decay_length(mode.effective_index, mode.wavelength_m)?;
        let gap_factor = (-params.gap_m / decay).exp();
        for (pol, lambda) in [
            (Polarization::TE, mode.wavelength_m),
            (
                Polarization::TM,
                mode.wavelength_m + params.te_tm_splitting_m,
            ),
        ] {
            let weight = params.envelope_amplitude * params.envelope(lambda) * gap_factor;
            lines.push(CombLine {
                wavelength_m: lambda,
                polarization: pol,
                area: weight * REFERENCE_LINE_WIDTH_M,
                fwhm_m: width_at(lambda),
            });
        }
    }
    lines.sort_by(|a, b| a.wavelength_m.total_cmp(&b.wavelength_m));
    Ok(lines)
}

/// Discrete convolution with a unit-sum Gaussian kernel truncated at ±5σ.
/// Edge samples are replicated past the ends so a flat baseline stays flat.
pub(crate) fn convolve_gaussian(data: &[f64], fwhm: f64, step: f64) -> Vec<f64> {
    if !(fwhm > 0.0) || data.is_empty() {
        return data.to_vec();
    }
    let sigma = fwhm / (2.0 * (2.0 * 2f64.ln()).sqrt()) / step;
    let half = (5.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-half..=half)
        .map(|m| (-(m as f64).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= sum);
    let n = data.len() as isize;
    (0..n)
        .map(|i| {
            kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * data[(i + k as isize - half).clamp(0, n - 1) as usize])
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> SynthesisParams {
        SynthesisParams {
            background_level: 0.0,
            noise_rms: 0.0,
            ..SynthesisParams::default()
        }
    }

    #[test]
    fn delta_lines_without_instrument_touch_only_comb_bins() {
        let p = SynthesisParams {
            intrinsic_q: f64::INFINITY,
            resolution_fwhm_m: 0.0,
            ..quiet()
        };
        let step = 0.01e-9;
        let s = synthesize(&p, (890e-9, 910e-9), step).unwrap();
        let lines: Vec<f64> = s
            .lines_within(890e-9, 910e-9)
            .map(|l| l.wavelength_m)
            .collect();
        assert!(!lines.is_empty());
        for (x, v) in s
            .spectrum
            .wavelengths()
            .iter()
            .zip(s.spectrum.intensities())
        {
            let near = lines.iter().any(|l| (x - l).abs() <= step / 2.0 + 1e-18);
            if *v > 0.0 {
                assert!(near, "nonzero sample at {x}");
            }
        }
        let lit = s
            .spectrum
            .intensities()
            .iter()
            .filter(|v| **v > 0.0)
            .count();
        assert_eq!(lit, lines.len());
    }

    #[test]
    fn convolution_preserves_line_area() {
        let p = SynthesisParams {
            intrinsic_q: 1e5,
            ..quiet()
        };
        let step = 0.01e-9;
        let s = synthesize(&p, (880e-9, 920e-9), step).unwrap();
        // Integrate between midpoints of neighbouring lines so no line straddles an edge.
        let centers: Vec<f64> = s
            .lines_within(880e-9, 920e-9)
            .map(|l| l.wavelength_m)
            .collect();
        let lo = 0.5 * (centers[0] + centers[1]);
        let hi = 0.5 * (centers[centers.len() - 2] + centers[centers.len() - 1]);
        let expected: f64 = s.lines_within(lo, hi).map(|l| l.area).sum();
        let got: f64 = s
            .spectrum
            .wavelengths()
            .iter()
            .zip(s.spectrum.intensities())
            .filter(|(x, _)| **x >= lo && **x < hi)
            .map(|(_, v)| v * step)
            .sum();
        assert!(
            (got - expected).abs() / expected < 0.005,
            "{got} vs {expected}"
        );
    }

    #[test]
    fn undersampled_grid_is_rejected() {
        let err = synthesize(&quiet(), (890e-9, 910e-9), 0.05e-9).unwrap_err();
        assert!(matches!(err, SpectraError::Undersampled { .. }));
    }

    #[test]
    fn out_of_envelope_band_warns() {
        let s = synthesize(&quiet(), (1200e-9, 1210e-9), 0.025e-9).unwrap();
        assert_eq!(s.warnings, vec![SynthesisWarning::EnvelopeOutsideBand]);
        assert!(s.spectrum.intensities().iter().all(|v| *v < 1e-6));
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let p = SynthesisParams::default();
        let a = synthesize(&p, (895e-9, 905e-9), 0.025e-9).unwrap();
        let b = synthesize(&p, (895e-9, 905e-9), 0.025e-9).unwrap();
        assert_eq!(a.spectrum, b.spectrum);
        let c = synthesize(
            &SynthesisParams { seed: 2, ..p },
            (895e-9, 905e-9),
            0.025e-9,
        )
        .unwrap();
        assert_ne!(a.spectrum, c.spectrum);
    }

    #[test]
    fn kernel_has_unit_sum() {
        let mut data = vec![0.0; 201];
        data[100] = 1.0;
        let out = convolve_gaussian(&data, 0.1, 0.01);
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
