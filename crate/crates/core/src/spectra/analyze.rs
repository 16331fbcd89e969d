use serde::{Deserialize, Serialize};

use super::peaks::{detect_peaks, noise_floor, Peak, PeakSet, PolarizationLabel};
use super::{SpectraError, Spectrum};
use crate::wgm::{invert_comb_spacing, OpticalConstants};

/// Spacings larger than this multiple of the upper-quartile spacing are
/// treated as gaps left by a missing peak and kept out of the clustering.
const GAP_FACTOR: f64 = 1.4;
const MIN_CLUSTER_RATIO: f64 = 1.25;
const MAX_CLUSTER_CV: f64 = 0.2;
const RESOLUTION_LIMITED_FACTOR: f64 = 1.5;

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn upper_quartile(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[(3 * (v.len() - 1)) / 4]
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn coefficient_of_variation(v: &[f64]) -> f64 {
    let m = mean(v);
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64;
    var.sqrt() / m
}

/// Two-group split of sorted values minimizing the summed squared deviation.
/// Returns the largest value of the lower group.
fn two_means_threshold(sorted: &[f64]) -> Option<f64> {
    if sorted.len() < 2 {
        return None;
    }
    let sse = |v: &[f64]| {
        let m = mean(v);
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>()
    };
    (1..sorted.len())
        .map(|k| (k, sse(&sorted[..k]) + sse(&sorted[k..])))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| sorted[k - 1])
}

/// Period of a set of line positions from the most frequently recurring
/// pairwise separation.
fn comb_autocorrelation(positions: &[f64]) -> Option<f64> {
    let spacings: Vec<f64> = positions.windows(2).map(|w| w[1] - w[0]).collect();
    let min_sp = spacings.iter().copied().fold(f64::INFINITY, f64::min);
    let max_sp = spacings.iter().copied().fold(0.0, f64::max);
    let mut best: Option<(usize, f64, f64)> = None;
    for (a, pa) in positions.iter().enumerate() {
        for pb in &positions[a + 1..] {
            let d = pb - pa;
            if d < 0.9 * min_sp || d > 2.0 * max_sp {
                continue;
            }
            let tol = 0.1 * d;
            let matched: Vec<f64> = positions
                .iter()
                .filter_map(|p| {
                    positions
                        .iter()
                        .map(|q| q - p)
                        .filter(|sep| (sep - d).abs() <= tol)
                        .min_by(|x, y| (x - d).abs().total_cmp(&(y - d).abs()))
                })
                .collect();
            let score = matched.len();
            let refined = median(&matched);
            let better = match best {
                None => true,
                Some((s, _, prev)) => score > s || (score == s && refined < prev - 1e-3 * prev),
            };
            if better {
                best = Some((score, d, refined));
            }
        }
    }
    best.map(|(_, _, refined)| refined)
}

/// Labels a comb of alternating TE/TM peaks and estimates the FSR and the
/// TE–TM splitting. Labels are relative: the lower member of each close pair
/// is called TE.
pub fn classify_comb(peaks: &PeakSet) -> Result<PeakSet, SpectraError> {
    let n = peaks.len();
    if n < 4 {
        return Err(SpectraError::TooFewPeaks(n));
    }
    let mut out = peaks.clone();
    out.peaks
        .iter_mut()
        .for_each(|p| p.polarization_label = PolarizationLabel::Unknown);
    let pos = out.wavelengths();
    let spacings: Vec<f64> = pos.windows(2).map(|w| w[1] - w[0]).collect();
    let q3 = upper_quartile(&spacings);
    let mut core: Vec<f64> = spacings
        .iter()
        .copied()
        .filter(|s| *s <= GAP_FACTOR * q3)
        .collect();
    core.sort_by(f64::total_cmp);

    let split = two_means_threshold(&core).and_then(|thr| {
        let small: Vec<f64> = core.iter().copied().filter(|s| *s <= thr).collect();
        let large: Vec<f64> = core.iter().copied().filter(|s| *s > thr).collect();
        let bimodal = !small.is_empty()
            && !large.is_empty()
            && mean(&large) / mean(&small) >= MIN_CLUSTER_RATIO
            && coefficient_of_variation(&small) < MAX_CLUSTER_CV
            && coefficient_of_variation(&large) < MAX_CLUSTER_CV;
        bimodal.then(|| (thr, median(&small), median(&large)))
    });

    let Some((thr, split_est, large_est)) = split else {
        out.fsr_estimate_m = comb_autocorrelation(&pos);
        out.splitting_estimate_m = None;
        return Ok(out);
    };

    let fsr0 = split_est + large_est;
    let mut i = 0;
    while i + 1 < n {
        if spacings[i] <= thr {
            out.peaks[i].polarization_label = PolarizationLabel::TE;
            out.peaks[i + 1].polarization_label = PolarizationLabel::TM;
            i += 2;
        } else {
            i += 1;
        }
    }

    // Unpaired peaks take the label whose comb they fall on.
    let te_ref: Vec<f64> = out
        .peaks
        .iter()
        .filter(|p| p.polarization_label == PolarizationLabel::TE)
        .map(|p| p.wavelength_m)
        .collect();
    let tol = 0.3 * split_est.min(fsr0 - split_est);
    for k in 0..n {
        if out.peaks[k].polarization_label != PolarizationLabel::Unknown {
            continue;
        }
        let p = out.peaks[k].wavelength_m;
        let Some(r) = te_ref
            .iter()
            .copied()
            .min_by(|a, b| (a - p).abs().total_cmp(&(b - p).abs()))
        else {
            continue;
        };
        let phase = (p - r) / fsr0;
        let offset = (phase - phase.floor()) * fsr0;
        if offset < tol || fsr0 - offset < tol {
            out.peaks[k].polarization_label = PolarizationLabel::TE;
        } else if (offset - split_est).abs() < tol {
            out.peaks[k].polarization_label = PolarizationLabel::TM;
        }
    }

    let mut same: Vec<f64> = Vec::new();
    for label in [PolarizationLabel::TE, PolarizationLabel::TM] {
        let members: Vec<f64> = out
            .peaks
            .iter()
            .filter(|p| p.polarization_label == label)
            .map(|p| p.wavelength_m)
            .collect();
        for w in members.windows(2) {
            let d = w[1] - w[0];
            let k = (d / fsr0).round().max(1.0);
            same.push(d / k);
        }
    }
    out.fsr_estimate_m = Some(if same.is_empty() { fsr0 } else { median(&same) });
    out.splitting_estimate_m = Some(split_est);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QBound {
    pub q_measured: f64,
    /// Measured width within 1.5× the instrument resolution.
    pub resolution_limited: bool,
}

/// Quality factor the spectrograph can vouch for: `λ / max(fwhm, resolution)`.
pub fn q_bound(peak: &Peak, resolution_fwhm_m: f64) -> Result<QBound, SpectraError> {
    if !(peak.fwhm_m >= 0.0 && resolution_fwhm_m >= 0.0) {
        return Err(SpectraError::InvalidParameter(
            "widths must be non-negative".into(),
        ));
    }
    let width = peak.fwhm_m.max(resolution_fwhm_m);
    if width == 0.0 {
        return Err(SpectraError::InvalidParameter(
            "peak width and resolution are both zero".into(),
        ));
    }
    Ok(QBound {
        q_measured: peak.wavelength_m / width,
        resolution_limited: peak.fwhm_m <= RESOLUTION_LIMITED_FACTOR * resolution_fwhm_m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub constants: OpticalConstants,
    pub radial_order: u32,
    /// Defaults to five times the estimated noise floor.
    pub min_prominence: Option<f64>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            constants: OpticalConstants::default(),
            radial_order: 1,
            min_prominence: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub peaks: PeakSet,
    pub inferred_diameter_m: Option<f64>,
    pub q_bounds: Vec<QBound>,
    pub noise_floor: f64,
    pub min_prominence: f64,
}

/// Detects and classifies the comb, then infers the major diameter from the
/// FSR with the index that reproduces the resonance-comb spacing.
pub fn analyze(
    spectrum: &Spectrum,
    options: &AnalysisOptions,
) -> Result<AnalysisReport, SpectraError> {
    if spectrum.len() < 3 {
        return Ok(AnalysisReport::default());
    }
    let floor = noise_floor(spectrum);
    let v = spectrum.intensities();
    let range = v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - v.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold = match options.min_prominence {
        Some(t) => t,
        None => (5.0 * floor).max(1e-3 * range),
    };
    if !(threshold > 0.0) {
        return Ok(AnalysisReport {
            noise_floor: floor,
            ..AnalysisReport::default()
        });
    }
    let mut peaks = detect_peaks(spectrum, threshold)?;
    if peaks.len() >= 4 {
        peaks = classify_comb(&peaks)?;
    }
    let inferred_diameter_m = match peaks.fsr_estimate_m {
        Some(fsr) => infer_diameter(fsr, &peaks, options),
        None => None,
    };
    let q_bounds = peaks
        .peaks
        .iter()
        .map(|p| q_bound(p, spectrum.resolution_fwhm_m()))
        .collect::<Result<_, _>>()?;
    Ok(AnalysisReport {
        peaks,
        inferred_diameter_m,
        q_bounds,
        noise_floor: floor,
        min_prominence: threshold,
    })
}

fn infer_diameter(fsr: f64, peaks: &PeakSet, options: &AnalysisOptions) -> Option<f64> {
    let center = median(&peaks.wavelengths());
    invert_comb_spacing(
        fsr,
        &options.constants.at_wavelength(center),
        options.radial_order,
    )
    .ok()
}
