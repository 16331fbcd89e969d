use serde::{Deserialize, Serialize};

use super::synth::convolve_gaussian;
use super::{SpectraError, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolarizationLabel {
    TE,
    TM,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub wavelength_m: f64,
    pub height: f64,
    pub fwhm_m: f64,
    pub prominence: f64,
    pub polarization_label: PolarizationLabel,
}

/// Detected peaks, sorted by wavelength, with the comb parameters once classified.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
    pub fsr_estimate_m: Option<f64>,
    pub splitting_estimate_m: Option<f64>,
    /// `λ / fwhm` for each peak.
    pub q_lower_bounds: Vec<f64>,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn wavelengths(&self) -> Vec<f64> {
        self.peaks.iter().map(|p| p.wavelength_m).collect()
    }
}

/// Robust white-noise RMS estimate from the median absolute first difference.
pub fn noise_floor(spectrum: &Spectrum) -> f64 {
    let v = spectrum.intensities();
    if v.len() < 3 {
        return 0.0;
    }
    let mut diffs: Vec<f64> = v.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let mid = diffs.len() / 2;
    let (_, median, _) = diffs.select_nth_unstable_by(mid, f64::total_cmp);
    *median / (0.674_489_75 * std::f64::consts::SQRT_2)
}

struct Candidate {
    index: usize,
    height: f64,
    prominence: f64,
    left_base: usize,
    right_base: usize,
}

/// Local maxima (plateaus resolved to their middle sample), endpoints excluded.
fn local_maxima(s: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let n = s.len();
    let mut i = 1;
    while i + 1 < n {
        if s[i - 1] < s[i] {
            let mut j = i;
            while j + 1 < n && s[j + 1] == s[i] {
                j += 1;
            }
            if j + 1 < n && s[j + 1] < s[i] {
                out.push((i + j) / 2);
                i = j + 1;
                continue;
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

fn prominence(s: &[f64], i: usize) -> Candidate {
    let h = s[i];
    let (mut left_min, mut left_base) = (h, i);
    let mut k = i;
    while k > 0 {
        k -= 1;
        if s[k] > h {
            break;
        }
        if s[k] < left_min {
            left_min = s[k];
            left_base = k;
        }
    }
    let (mut right_min, mut right_base) = (h, i);
    let mut k = i;
    while k + 1 < s.len() {
        k += 1;
        if s[k] > h {
            break;
        }
        if s[k] < right_min {
            right_min = s[k];
            right_base = k;
        }
    }
    Candidate {
        index: i,
        height: h,
        prominence: h - left_min.max(right_min),
        left_base,
        right_base,
    }
}

/// Finds peaks whose prominence exceeds `min_prominence`.
///
/// Prominence is measured on the spectrum smoothed by the instrument kernel,
/// which suppresses sample-to-sample noise without moving symmetric peaks.
/// Heights and widths come from the unsmoothed data.
pub fn detect_peaks(spectrum: &Spectrum, min_prominence: f64) -> Result<PeakSet, SpectraError> {
    if spectrum.len() < 3 {
        return Ok(PeakSet::default());
    }
    let floor = noise_floor(spectrum);
    if !(min_prominence > floor) {
        return Err(SpectraError::ThresholdBelowNoise {
            threshold: min_prominence,
            floor,
        });
    }
    let raw = spectrum.intensities();
    let x = spectrum.wavelengths();
    let step = spectrum.step();
    let res = spectrum.resolution_fwhm_m();
    let smoothed = if res >= 2.0 * step {
        convolve_gaussian(raw, res, step)
    } else {
        raw.to_vec()
    };
    let reach = ((res / step / 2.0).round() as usize).max(1);

    let mut peaks = Vec::new();
    for i in local_maxima(&smoothed) {
        let c = prominence(&smoothed, i);
        if c.prominence < min_prominence {
            continue;
        }
        let center = parabolic_vertex(&smoothed, x, c.index);
        let lo = c.index.saturating_sub(reach).max(c.left_base);
        let hi = (c.index + reach).min(c.right_base);
        let top = (lo..=hi)
            .max_by(|a, b| raw[*a].total_cmp(&raw[*b]))
            .unwrap_or(c.index);
        let base = c.height - c.prominence;
        let height = raw[top];
        let level = base + 0.5 * (height - base);
        let fwhm = half_width_crossings(raw, x, top, level, c.left_base, c.right_base);
        peaks.push(Peak {
            wavelength_m: center,
            height,
            fwhm_m: fwhm,
            prominence: c.prominence,
            polarization_label: PolarizationLabel::Unknown,
        });
    }
    peaks.sort_by(|a, b| a.wavelength_m.total_cmp(&b.wavelength_m));
    let q_lower_bounds = peaks
        .iter()
        .map(|p| {
            if p.fwhm_m > 0.0 {
                p.wavelength_m / p.fwhm_m
            } else {
                f64::INFINITY
            }
        })
        .collect();
    Ok(PeakSet {
        peaks,
        fsr_estimate_m: None,
        splitting_estimate_m: None,
        q_lower_bounds,
    })
}

fn parabolic_vertex(s: &[f64], x: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= s.len() {
        return x[i];
    }
    let denom = s[i - 1] - 2.0 * s[i] + s[i + 1];
    if denom >= 0.0 {
        return x[i];
    }
    let delta = (0.5 * (s[i - 1] - s[i + 1]) / denom).clamp(-0.5, 0.5);
    let step = if delta >= 0.0 {
        x[i + 1] - x[i]
    } else {
        x[i] - x[i - 1]
    };
    x[i] + delta * step
}

/// Width between the linearly interpolated `level` crossings on either side
/// of `top`, bounded by the peak's bases.
fn half_width_crossings(
    raw: &[f64],
    x: &[f64],
    top: usize,
    level: f64,
    left: usize,
    right: usize,
) -> f64 {
    let mut k = top;
    let mut left_x = x[left];
    while k > left {
        if raw[k - 1] < level {
            let f = (level - raw[k - 1]) / (raw[k] - raw[k - 1]);
            left_x = x[k - 1] + f * (x[k] - x[k - 1]);
            break;
        }
        k -= 1;
    }
    let mut k = top;
    let mut right_x = x[right];
    while k < right {
        if raw[k + 1] < level {
            let f = (raw[k] - level) / (raw[k] - raw[k + 1]);
            right_x = x[k] + f * (x[k + 1] - x[k]);
            break;
        }
        k += 1;
    }
    right_x - left_x
}
