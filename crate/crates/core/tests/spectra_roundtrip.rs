use toroidsim::spectra::*;
use toroidsim::wgm::{effective_index, evanescent_decay_length, CavityGeometry, Polarization};

const BAND: (f64, f64) = (880e-9, 920e-9);
const STEP: f64 = 0.025e-9;

fn noiseless() -> SynthesisParams {
    SynthesisParams {
        noise_rms: 0.0,
        ..SynthesisParams::default()
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Same-polarization spacing of the synthesized comb itself.
fn true_fsr(s: &Synthesis) -> f64 {
    let te: Vec<f64> = s
        .lines_within(BAND.0, BAND.1)
        .filter(|l| l.polarization == Polarization::TE)
        .map(|l| l.wavelength_m)
        .collect();
    median(te.windows(2).map(|w| w[1] - w[0]).collect())
}

#[test]
fn noiseless_round_trip_recovers_comb_and_diameter() {
    let p = noiseless();
    let s = synthesize(&p, BAND, STEP).unwrap();
    let r = analyze(&s.spectrum, &AnalysisOptions::default()).unwrap();
    assert!(r.peaks.len() >= 6);
    let fsr = r.peaks.fsr_estimate_m.unwrap();
    let truth = true_fsr(&s);
    assert!((fsr - truth).abs() / truth < 0.01, "{fsr} vs {truth}");
    let split = r.peaks.splitting_estimate_m.unwrap();
    assert!((split - p.te_tm_splitting_m).abs() / p.te_tm_splitting_m < 0.02);
    let d = r.inferred_diameter_m.unwrap();
    let d0 = p.geometry.major_diameter_m();
    assert!((d - d0).abs() / d0 < 0.02, "{d}");
    assert!(fsr > split);
}

#[test]
fn noisy_round_trip_over_seeds() {
    let mut good = 0;
    for seed in 0..50 {
        let p = SynthesisParams {
            seed,
            ..SynthesisParams::default()
        };
        let s = synthesize(&p, BAND, STEP).unwrap();
        let r = analyze(&s.spectrum, &AnalysisOptions::default()).unwrap();
        let (Some(fsr), Some(split), Some(d)) = (
            r.peaks.fsr_estimate_m,
            r.peaks.splitting_estimate_m,
            r.inferred_diameter_m,
        ) else {
            continue;
        };
        if (fsr - 3.2e-9).abs() / 3.2e-9 < 0.05
            && (split - 1.2e-9).abs() / 1.2e-9 < 0.1
            && (d - 55e-6).abs() / 55e-6 < 0.05
        {
            good += 1;
        }
    }
    assert!(good >= 45, "{good}/50");
}

#[test]
fn alternating_spacings_follow_the_comb() {
    let s = synthesize(&noiseless(), BAND, STEP).unwrap();
    let r = analyze(&s.spectrum, &AnalysisOptions::default()).unwrap();
    let w = r.peaks.wavelengths();
    for (k, pair) in w.windows(2).enumerate() {
        let gap = (pair[1] - pair[0]) * 1e9;
        // The large spacing grows with wavelength along with the FSR.
        let expect = if k % 2 == 0 { 1.2 } else { 2.1 };
        assert!((gap - expect).abs() < 0.2, "spacing {k}: {gap}");
    }
    for (k, p) in r.peaks.peaks.iter().enumerate() {
        let label = if k % 2 == 0 {
            PolarizationLabel::TE
        } else {
            PolarizationLabel::TM
        };
        assert_eq!(p.polarization_label, label);
    }
}

#[test]
fn detected_count_matches_lines_inside_envelope_fwhm() {
    let p = SynthesisParams::default();
    let s = synthesize(&p, BAND, STEP).unwrap();
    let half = p.envelope_fwhm_m / 2.0;
    let (lo, hi) = (p.envelope_center_m - half, p.envelope_center_m + half);
    let expected = s.lines_within(lo, hi).count();
    let peaks = detect_peaks(&s.spectrum, 5.0 * noise_floor(&s.spectrum)).unwrap();
    let found = peaks
        .peaks
        .iter()
        .filter(|q| q.wavelength_m >= lo && q.wavelength_m <= hi)
        .count();
    assert_eq!(found, expected);
}

#[test]
fn pure_noise_rarely_produces_peaks() {
    let mut false_positive_runs = 0;
    for seed in 0..100 {
        let p = SynthesisParams {
            envelope_amplitude: 0.0,
            background_level: 1.0,
            noise_rms: 0.05,
            seed,
            ..SynthesisParams::default()
        };
        let s = synthesize(&p, BAND, STEP).unwrap();
        let found = detect_peaks(&s.spectrum, 5.0 * p.noise_rms).unwrap();
        if !found.is_empty() {
            false_positive_runs += 1;
        }
    }
    assert!(false_positive_runs < 1, "{false_positive_runs}/100");
}

#[test]
fn ultra_high_q_is_resolution_limited() {
    let p = SynthesisParams {
        intrinsic_q: 1e8,
        ..SynthesisParams::default()
    };
    let s = synthesize(&p, BAND, STEP).unwrap();
    let r = analyze(&s.spectrum, &AnalysisOptions::default()).unwrap();
    let center = r
        .peaks
        .peaks
        .iter()
        .zip(&r.q_bounds)
        .min_by(|a, b| {
            (a.0.wavelength_m - 900e-9)
                .abs()
                .total_cmp(&(b.0.wavelength_m - 900e-9).abs())
        })
        .unwrap();
    assert!(
        (center.1.q_measured - 9000.0).abs() < 900.0,
        "{}",
        center.1.q_measured
    );
    assert!(center.1.resolution_limited);
    assert!(r.q_bounds.iter().all(|q| q.resolution_limited));
}

#[test]
fn three_micron_gap_extinguishes_signal() {
    let near = synthesize(&noiseless(), BAND, STEP).unwrap();
    let far = synthesize(
        &SynthesisParams {
            gap_m: 3e-6,
            ..noiseless()
        },
        BAND,
        STEP,
    )
    .unwrap();
    for (a, b) in near.lines.iter().zip(&far.lines) {
        assert!(b.area / a.area < 1e-8);
    }
    let p = noiseless();
    let n_eff = effective_index(&p.geometry, &p.constants, 1).unwrap();
    let lambda = evanescent_decay_length(n_eff, p.constants.vacuum_wavelength_m).unwrap();
    assert!(lambda > 100e-9 && lambda < 200e-9, "{lambda}");
}

#[test]
fn intensity_is_linear_in_envelope_amplitude() {
    let base = SynthesisParams {
        background_level: 0.0,
        ..noiseless()
    };
    let a = synthesize(&base, BAND, STEP).unwrap();
    let b = synthesize(
        &SynthesisParams {
            envelope_amplitude: 2.0,
            ..base
        },
        BAND,
        STEP,
    )
    .unwrap();
    for (x, y) in a
        .spectrum
        .intensities()
        .iter()
        .zip(b.spectrum.intensities())
    {
        assert!((y - 2.0 * x).abs() <= 1e-12 * y.abs());
    }
}

#[test]
fn constant_background_does_not_change_peak_count() {
    let s = synthesize(&SynthesisParams::default(), BAND, STEP).unwrap();
    let thr = 5.0 * noise_floor(&s.spectrum);
    let n0 = detect_peaks(&s.spectrum, thr).unwrap().len();
    for offset in [0.5, 3.0, 100.0] {
        let shifted = s.spectrum.with_background(offset).unwrap();
        assert_eq!(detect_peaks(&shifted, thr).unwrap().len(), n0);
    }
}

#[test]
fn seeded_synthesis_is_bit_reproducible() {
    let p = SynthesisParams::default();
    let a = synthesize(&p, BAND, STEP).unwrap();
    let b = synthesize(&p, BAND, STEP).unwrap();
    let bits = |s: &Synthesis| {
        s.spectrum
            .intensities()
            .iter()
            .map(|v| v.to_bits())
            .collect::<Vec<_>>()
    };
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn smaller_toroid_doubles_the_fsr() {
    let p = SynthesisParams {
        geometry: CavityGeometry::with_diameter(27.5e-6).unwrap(),
        ..noiseless()
    };
    let s = synthesize(&p, BAND, STEP).unwrap();
    let r = analyze(&s.spectrum, &AnalysisOptions::default()).unwrap();
    let d = r.inferred_diameter_m.unwrap();
    assert!((d - 27.5e-6).abs() / 27.5e-6 < 0.02, "{d}");
    let fsr = r.peaks.fsr_estimate_m.unwrap();
    assert!(fsr > 6.0e-9 && fsr < 7.0e-9, "{fsr}");
}

#[test]
fn csv_round_trip_preserves_analysis() {
    let s = synthesize(&SynthesisParams::default(), BAND, STEP).unwrap();
    let mut buf = Vec::new();
    write_spectrum_csv(&mut buf, &s.spectrum).unwrap();
    let back = read_spectrum_csv(buf.as_slice(), s.spectrum.resolution_fwhm_m()).unwrap();
    let a = analyze(&s.spectrum, &AnalysisOptions::default()).unwrap();
    let b = analyze(&back, &AnalysisOptions::default()).unwrap();
    assert_eq!(a.peaks.len(), b.peaks.len());
    let (da, db) = (
        a.inferred_diameter_m.unwrap(),
        b.inferred_diameter_m.unwrap(),
    );
    assert!((da - db).abs() / da < 1e-6);
}
