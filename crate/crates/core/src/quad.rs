//! Adaptive Simpson quadrature.

const MAX_DEPTH: u32 = 50;

/// Integrates `f` over `[a, b]` to roughly `rel_tol` relative accuracy.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // Seed with a coarse composite rule so narrow features are not missed.
    const PANELS: usize = 64;
    let h = (b - a) / PANELS as f64;
    let coarse: f64 = (0..PANELS)
        .map(|i| {
            let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            simpson(&f, x0, x1).0
        })
        .sum();
    let abs_tol = (rel_tol * coarse.abs()).max(f64::MIN_POSITIVE);
    (0..PANELS)
        .map(|i| {
            let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (whole, fa, fm, fb) = simpson(&f, x0, x1);
            recurse(
                &f,
                x0,
                x1,
                fa,
                fm,
                fb,
                whole,
                abs_tol / PANELS as f64,
                MAX_DEPTH,
            )
        })
        .sum()
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64, f64) {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    ((b - a) / 6.0 * (fa + 4.0 * fm + fb), fa, fm, fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (f(0.5 * (a + m)), f(0.5 * (m + b)));
    let left = (m - a) / 6.0 * (fa + 4.0 * lm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * rm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, lm, fm, left, tol / 2.0, depth - 1)
        + recurse(f, m, b, fm, rm, fb, right, tol / 2.0, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_functions() {
        let v = adaptive_simpson(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-10);
        assert!((v - 2.0).abs() < 1e-9);
        let g = adaptive_simpson(|x| (-x * x / 2.0).exp(), -10.0, 10.0, 1e-10);
        assert!((g - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(adaptive_simpson(|x| x, 1.0, 1.0, 1e-8), 0.0);
    }
}
