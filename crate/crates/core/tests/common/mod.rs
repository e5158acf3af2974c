//! Independent oracles used by the integration tests: deliberately brute
//! force and implementation-agnostic so they cross-check the library's fast
//! paths rather than restate them.

#![allow(dead_code)]

use kantorovich_sampling::intervals::IntervalSequence;
use kantorovich_sampling::kernel::Kernel;

/// Adaptive Simpson quadrature with explicit error control.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(f, a, fa, m, fm, flm);
        let right = simpson(f, m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, flm, left, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, frm, right, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(f, a, fa, b, fb, fm);
    recurse(f, a, fa, b, fb, fm, whole, tol, 40)
}

/// Brute-force Kantorovich series for compactly supported kernels: full
/// index window straight from the support, cell integrals by adaptive
/// Simpson. Shares no code with the library's operator path.
pub fn oracle_kantorovich(
    kernel: &Kernel,
    intervals: &IntervalSequence,
    f: &dyn Fn(f64) -> f64,
    w: f64,
    x: f64,
) -> f64 {
    let r = kernel
        .compact_radius()
        .expect("oracle requires a compact kernel");
    let u = w * x;
    let klo = (u - r).floor() as i64 - 2;
    let khi = (u + r).ceil() as i64 + 2;
    let mut acc = 0.0;
    for k in klo..=khi {
        let phi = kernel.eval(u - k as f64);
        if phi == 0.0 {
            continue;
        }
        let (a, b) = intervals.endpoints(k);
        let lo = (k as f64 + a) / w;
        let hi = (k as f64 + b) / w;
        let integral = adaptive_simpson(f, lo, hi, 1e-13);
        acc += phi * integral / (hi - lo);
    }
    acc
}

/// One convolution level computed numerically:
/// `B_h(x) = ∫_{x-1/2}^{x+1/2} B_{h-1}(t) dt`. With `B_1` exact by
/// definition, agreement at every order pins the closed recursion by
/// induction.
pub fn oracle_bspline_convolution(h: u32, x: f64) -> f64 {
    assert!(h >= 2);
    let lower = kantorovich_sampling::kernel::bspline::BSpline::new(h - 1);
    adaptive_simpson(&|t| lower.eval(t), x - 0.5, x + 0.5, 1e-13)
}

/// O(n^2) modulus of continuity over an explicit grid: max |f(x_i) - f(x_j)|
/// over all pairs with |x_i - x_j| <= delta.
pub fn oracle_modulus(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, n: usize, delta: f64) -> f64 {
    let xs: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut max = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            if xs[j] - xs[i] > delta {
                break;
            }
            max = max.max((vals[i] - vals[j]).abs());
        }
    }
    max
}

/// Brute-force absolute moment `sup_u Σ_k |φ(u-k)| |k-u|^ν` on a dense
/// u-grid with a wide fixed window.
pub fn oracle_absolute_moment(kernel: &Kernel, nu: u32, grid: usize, window: i64) -> f64 {
    let mut sup = 0.0f64;
    for i in 0..grid {
        let u = i as f64 / grid as f64;
        let mut sum = 0.0;
        for k in -window..=window {
            let d = k as f64 - u;
            sum += kernel.eval(u - k as f64).abs() * d.abs().powi(nu as i32);
        }
        sup = sup.max(sum);
    }
    sup
}
