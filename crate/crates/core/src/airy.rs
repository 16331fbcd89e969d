//! Zeros of the Airy function `Ai(-z)`.
//!
//! `w(z) = Ai(-z)` satisfies `w'' = -z w`. The zeros are found by marching
//! that ODE forward from `z = 0` with local Taylor expansions (exact up to
//! truncation since the solution is entire), bracketing sign changes and
//! polishing each root with Newton steps on the same local series.

use std::sync::OnceLock;

use crate::wgm::WgmError;

/// Highest zero index served by [`airy_zero`].
pub const MAX_AIRY_ZERO: u32 = 10;

const AI_AT_ZERO: f64 = 0.355_028_053_887_817_2;
const AI_PRIME_AT_ZERO: f64 = -0.258_819_403_792_806_8;

const STEP: f64 = 1.0 / 16.0;
const MAX_TERMS: usize = 60;

static ZEROS: OnceLock<[f64; MAX_AIRY_ZERO as usize]> = OnceLock::new();

/// Returns `α_n`, the n-th positive root of `Ai(-z)`, for `1 ≤ n ≤ 10`.
pub fn airy_zero(n: u32) -> Result<f64, WgmError> {
    if n == 0 || n > MAX_AIRY_ZERO {
        return Err(WgmError::RadialOrderOutOfRange(n));
    }
    Ok(ZEROS.get_or_init(compute_zeros)[(n - 1) as usize])
}

/// Evaluates `w(z0 + t)` and `w'(z0 + t)` from the values at `z0`.
fn taylor(z0: f64, w0: f64, dw0: f64, t: f64) -> (f64, f64) {
    // c[k+2] (k+2)(k+1) = -(z0 c[k] + c[k-1])
    let mut c_prev2 = 0.0; // c[k-1]
    let mut c_prev = w0; // c[k]
    let mut c_cur = dw0; // c[k+1]
    let mut w = w0 + dw0 * t;
    let mut dw = dw0;
    let mut t_pow = t; // t^(k+1)
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let c_next = -(z0 * c_prev + c_prev2) / ((kf + 2.0) * (kf + 1.0));
        // term index k+2
        dw += (kf + 2.0) * c_next * t_pow;
        t_pow *= t;
        let term = c_next * t_pow;
        w += term;
        // Coefficients can vanish individually, so test three in a row.
        let tail = (c_next.abs() + c_cur.abs() + c_prev.abs()) * t_pow.abs();
        if tail < 1e-20 * w.abs().max(1e-300) {
            break;
        }
        c_prev2 = c_prev;
        c_prev = c_cur;
        c_cur = c_next;
    }
    (w, dw)
}

fn compute_zeros() -> [f64; MAX_AIRY_ZERO as usize] {
    let mut zeros = [0.0; MAX_AIRY_ZERO as usize];
    let mut found = 0;
    let (mut z, mut w, mut dw) = (0.0_f64, AI_AT_ZERO, -AI_PRIME_AT_ZERO);
    while found < zeros.len() {
        let (w1, dw1) = taylor(z, w, dw, STEP);
        if w.signum() != w1.signum() {
            // Secant start inside the bracket, then Newton on the local series.
            let mut t = STEP * w / (w - w1);
            for _ in 0..50 {
                let (f, df) = taylor(z, w, dw, t);
                let dt = f / df;
                t = (t - dt).clamp(0.0, STEP);
                if dt.abs() < 1e-16 {
                    break;
                }
            }
            zeros[found] = z + t;
            found += 1;
        }
        z += STEP;
        w = w1;
        dw = dw1;
    }
    zeros
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_zeros_match_tabulated_values() {
        assert!((airy_zero(1).unwrap() - 2.338_107_410_459_767).abs() < 1e-12);
        assert!((airy_zero(2).unwrap() - 4.087_949_444_130_97).abs() < 1e-12);
        assert!((airy_zero(3).unwrap() - 5.520_559_828_095_551).abs() < 1e-12);
    }

    #[test]
    fn zeros_strictly_increase() {
        let zs: Vec<f64> = (1..=MAX_AIRY_ZERO).map(|n| airy_zero(n).unwrap()).collect();
        assert!(zs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn out_of_range_orders_are_rejected() {
        assert_eq!(airy_zero(0), Err(WgmError::RadialOrderOutOfRange(0)));
        assert_eq!(airy_zero(11), Err(WgmError::RadialOrderOutOfRange(11)));
    }

    #[test]
    fn forward_then_backward_series_step_is_identity() {
        let (w, dw) = taylor(0.0, AI_AT_ZERO, -AI_PRIME_AT_ZERO, 0.5);
        let (w0, dw0) = taylor(0.5, w, dw, -0.5);
        assert!((w0 - AI_AT_ZERO).abs() < 1e-14);
        assert!((dw0 + AI_PRIME_AT_ZERO).abs() < 1e-14);
    }
}
