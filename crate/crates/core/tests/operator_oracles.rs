//! The operator path against a brute-force full-window adaptive-quadrature
//! oracle, on randomized configurations.

mod common;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use kantorovich_sampling::functions;
use kantorovich_sampling::intervals::IntervalSequence;
use kantorovich_sampling::kernel::Kernel;
use kantorovich_sampling::operator::{apply_kantorovich, OperatorConfig};

fn kernels() -> Vec<Kernel> {
    vec![
        Kernel::bspline(2).unwrap(),
        Kernel::bspline(3).unwrap(),
        Kernel::spline_combo(3, -1.0, 1.0).unwrap(),
    ]
}

fn interval_families() -> Vec<IntervalSequence> {
    vec![
        IntervalSequence::constant(0.0, 1.0).unwrap(),
        IntervalSequence::constant(-0.5, 0.5).unwrap(),
        IntervalSequence::seeded_alpha(1.0, 0.5, 2.0, 42).unwrap(),
    ]
}

#[test]
fn random_configurations_match_oracle() {
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let kernels = kernels();
    let families = interval_families();
    let funcs = [
        functions::sine(),
        functions::windowed_quadratic(),
        functions::x_sin_3x(),
    ];
    for trial in 0..40 {
        let kernel = &kernels[rng.gen_range(0..kernels.len())];
        let intervals = &families[rng.gen_range(0..families.len())];
        let f = &funcs[rng.gen_range(0..funcs.len())];
        let w = rng.gen_range(2.0..100.0);
        let x = rng.gen_range(-2.0..2.0);
        let cfg = OperatorConfig::with_defaults(kernel, intervals, w).unwrap();
        let fast = apply_kantorovich(f, x, &cfg).unwrap();
        let slow = common::oracle_kantorovich(kernel, intervals, &|u| f.eval(u), w, x);
        assert!(
            (fast - slow).abs() < 1e-9,
            "trial {trial}: {} / {} / {} w={w} x={x}: {fast} vs {slow}",
            kernel.name(),
            intervals.describe(),
            f.name()
        );
    }
}

#[test]
fn seeded_intervals_change_values_but_not_constants() {
    let kernel = Kernel::bspline(2).unwrap();
    let a = IntervalSequence::seeded_alpha(1.0, 0.5, 2.0, 42).unwrap();
    let b = IntervalSequence::seeded_alpha(1.0, 0.5, 2.0, 43).unwrap();
    let f = functions::sine();
    let cfg_a = OperatorConfig::with_defaults(&kernel, &a, 16.0).unwrap();
    let cfg_b = OperatorConfig::with_defaults(&kernel, &b, 16.0).unwrap();
    let va = apply_kantorovich(&f, 0.37, &cfg_a).unwrap();
    let vb = apply_kantorovich(&f, 0.37, &cfg_b).unwrap();
    assert_ne!(va, vb);
    assert_eq!(a.alpha(), b.alpha());
    assert_eq!(a.delta_star(), b.delta_star());
}

#[test]
fn truncated_decay_window_is_close_to_a_wider_one() {
    // Blackman-Harris: tightening the truncation tolerance by two orders of
    // magnitude moves the value by less than the coarser tolerance x sup|f|
    let kernel = Kernel::blackman_harris_kernel();
    let intervals = IntervalSequence::constant(0.0, 1.0).unwrap();
    let f = functions::sine();
    for (w, x) in [(8.0, 0.3), (64.0, -1.7)] {
        let coarse = OperatorConfig::new(&kernel, &intervals, w, 1e-8, 8).unwrap();
        let fine = OperatorConfig::new(&kernel, &intervals, w, 1e-10, 8).unwrap();
        let vc = apply_kantorovich(&f, x, &coarse).unwrap();
        let vf = apply_kantorovich(&f, x, &fine).unwrap();
        assert!((vc - vf).abs() <= 1e-8 * 1.0 + 1e-12, "w={w} x={x}");
    }
}
