mod common;

use common::airy_series::{airy_ai_neg, airy_zero_oracle};
use toroidsim::airy::{airy_zero, MAX_AIRY_ZERO};

#[test]
fn series_reproduces_values_at_origin() {
    assert!((airy_ai_neg(0.0) - 0.355_028_053_887_817_2).abs() < 1e-16);
}

#[test]
fn library_zeros_match_series_bisection() {
    for n in 1..=MAX_AIRY_ZERO {
        let oracle = airy_zero_oracle(n);
        let lib = airy_zero(n).unwrap();
        assert!((lib - oracle).abs() < 1e-11, "n={n}: {lib} vs {oracle}");
    }
}

#[test]
fn zeros_agree_with_asymptotic_expansion() {
    // α_n ≈ t^(2/3) (1 + 5/48 t⁻²), t = 3π(4n−1)/8
    for n in 3..=MAX_AIRY_ZERO {
        let t = 3.0 * std::f64::consts::PI * (4.0 * n as f64 - 1.0) / 8.0;
        let approx = t.powf(2.0 / 3.0) * (1.0 + 5.0 / 48.0 / (t * t));
        assert!((airy_zero(n).unwrap() - approx).abs() < 1e-3, "n={n}");
    }
}
