//! Normalized sinc and the Blackman–Harris kernel.

use std::f64::consts::PI;

/// `sinc(x) = sin(πx)/(πx)`, with `sinc(0) = 1` by the limit. Near zero a
/// two-term Taylor expansion is used to avoid the 0/0 cancellation.
pub fn sinc(x: f64) -> f64 {
    let t = PI * x;
    if t.abs() < 1e-4 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

/// Blackman–Harris kernel
/// `H(x) = (1/2) sinc(x) + (9/32)(sinc(x+1) + sinc(x-1)) - (1/32)(sinc(x+3) + sinc(x-3))`.
///
/// Decays like `|x|^{-5}`: the five translates cancel the `x^{-1}` and
/// `x^{-3}` terms of the common `sin(πx)` envelope.
pub fn blackman_harris(x: f64) -> f64 {
    0.5 * sinc(x) + (9.0 / 32.0) * (sinc(x + 1.0) + sinc(x - 1.0))
        - (1.0 / 32.0) * (sinc(x + 3.0) + sinc(x - 3.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_at_zero_and_integers() {
        assert_eq!(sinc(0.0), 1.0);
        for k in 1..=20 {
            assert!(sinc(k as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn sinc_taylor_branch_matches_direct_formula() {
        // the two formulas agree at the switchover point
        for t in [1e-4f64, 0.9e-4, 1.1e-4] {
            let taylor = 1.0 - t * t / 6.0;
            let direct = t.sin() / t;
            assert!((taylor - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn blackman_harris_integer_values() {
        assert!((blackman_harris(0.0) - 0.5).abs() < 1e-15);
        assert!((blackman_harris(1.0) - 9.0 / 32.0).abs() < 1e-15);
        assert!((blackman_harris(-1.0) - 9.0 / 32.0).abs() < 1e-15);
        assert!((blackman_harris(3.0) + 1.0 / 32.0).abs() < 1e-15);
        assert!((blackman_harris(-3.0) + 1.0 / 32.0).abs() < 1e-15);
        assert!(blackman_harris(2.0).abs() < 1e-15);
        assert!(blackman_harris(5.0).abs() < 1e-15);
    }

    #[test]
    fn blackman_harris_even() {
        for i in 0..200 {
            let x = i as f64 * 0.05;
            assert!((blackman_harris(x) - blackman_harris(-x)).abs() < 1e-15);
        }
    }

    #[test]
    fn quintic_decay_envelope_bounded() {
        // |H(x)| x^5 stays bounded well past the fitting window
        let mut max = 0.0f64;
        for i in 0..=9900 {
            let x = 10.0 + i as f64 * 0.1;
            max = max.max(blackman_harris(x).abs() * x.powi(5));
        }
        assert!(max < 2.0, "envelope max {max}");
    }
}
