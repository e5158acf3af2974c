//! Grid helpers: sup estimation over one period and linspace construction.

use rayon::prelude::*;

/// Maximum of `f` over `n` equispaced points in `[0, 1)`, followed by one
/// local refinement pass at 8x density around the coarse maximum. The summed
/// kernel quantities this is applied to are continuous and 1-periodic in `u`,
/// so the period grid captures the sup up to grid resolution.
pub fn periodic_grid_sup(n: usize, f: impl Fn(f64) -> f64 + Sync) -> f64 {
    assert!(n >= 2, "grid_size must be at least 2");
    let vals: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| f(i as f64 / n as f64))
        .collect();
    let (imax, &vmax) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    refine_around(imax as f64 / n as f64, 1.0 / n as f64, vmax, &f)
}

/// Refine a coarse maximum: 17 samples spanning one coarse step on each side
/// at 8x density.
pub(crate) fn refine_around(u0: f64, step: f64, coarse: f64, f: &impl Fn(f64) -> f64) -> f64 {
    let mut best = coarse;
    for j in -8i32..=8 {
        let u = (u0 + f64::from(j) * step / 8.0).rem_euclid(1.0);
        let v = f(u);
        if v > best {
            best = v;
        }
    }
    best
}

/// Equispaced grid with `points` samples, inclusive of both endpoints.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        n => (0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
