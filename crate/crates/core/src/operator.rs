//! Evaluation of the Kantorovich sampling series `K_w f` and the classical
//! generalized sampling series `T_w f`.
//!
//! `K_w f(x) = Σ_k (w/Δ_k) φ(wx−k) ∫ f` over the cells
//! `[(k+a_k)/w, (k+b_k)/w]`; `T_w f(x) = Σ_k φ(wx−k) f(k/w)`. The infinite
//! series is reduced to a finite window: exact for compact kernels, and with
//! a tail contribution bounded by `truncation_tolerance · ‖f‖_∞` for kernels
//! of polynomial decay.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functions::TargetFunction;
use crate::intervals::IntervalSequence;
use crate::kernel::Kernel;
use crate::quadrature::GaussLegendre;

pub const DEFAULT_TRUNCATION_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_QUADRATURE_ORDER: usize = 8;

pub struct OperatorConfig<'a> {
    kernel: &'a Kernel,
    intervals: &'a IntervalSequence,
    w: f64,
    truncation_tolerance: f64,
    quad: GaussLegendre,
}

impl<'a> OperatorConfig<'a> {
    pub fn new(
        kernel: &'a Kernel,
        intervals: &'a IntervalSequence,
        w: f64,
        truncation_tolerance: f64,
        quadrature_order: usize,
    ) -> Result<Self> {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sampling rate w must be positive and finite, got {w}"
            )));
        }
        if !(truncation_tolerance > 0.0) {
            return Err(Error::InvalidArgument(
                "truncation tolerance must be positive".into(),
            ));
        }
        if quadrature_order < 2 {
            return Err(Error::InvalidArgument(
                "quadrature order must be at least 2".into(),
            ));
        }
        Ok(OperatorConfig {
            kernel,
            intervals,
            w,
            truncation_tolerance,
            quad: GaussLegendre::new(quadrature_order)?,
        })
    }

    pub fn with_defaults(
        kernel: &'a Kernel,
        intervals: &'a IntervalSequence,
        w: f64,
    ) -> Result<Self> {
        OperatorConfig::new(
            kernel,
            intervals,
            w,
            DEFAULT_TRUNCATION_TOLERANCE,
            DEFAULT_QUADRATURE_ORDER,
        )
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn kernel(&self) -> &Kernel {
        self.kernel
    }

    pub fn intervals(&self) -> &IntervalSequence {
        self.intervals
    }

    pub fn truncation_tolerance(&self) -> f64 {
        self.truncation_tolerance
    }

    /// Index window for the series at evaluation point `x` (all `k` with
    /// `φ(wx−k)` inside support, or within the certified decay truncation).
    pub fn window(&self, x: f64) -> Result<(i64, i64)> {
        self.kernel.index_window(self.w * x, self.truncation_tolerance)
    }

    fn require_bounded(&self, f: &TargetFunction) -> Result<()> {
        if !f.sup_bound().is_finite() {
            return Err(Error::InvalidArgument(format!(
                "function '{}' carries no finite sup bound; the operator requires bounded input",
                f.name()
            )));
        }
        Ok(())
    }
}

/// Mean value of `f` over the cell `[(k+a_k)/w, (k+b_k)/w]`, by fixed-order
/// Gauss–Legendre quadrature (exact for polynomials of degree
/// `< 2·quadrature_order`).
pub fn cell_average(f: &TargetFunction, k: i64, cfg: &OperatorConfig) -> Result<f64> {
    let (a, b) = cfg.intervals.endpoints(k);
    if !(b > a) {
        return Err(Error::InvalidIntervals(format!(
            "degenerate cell at k = {k}: a_k = {a}, b_k = {b}"
        )));
    }
    let lo = (k as f64 + a) / cfg.w;
    let hi = (k as f64 + b) / cfg.w;
    let mut bad: Option<f64> = None;
    let integral = cfg.quad.integrate(lo, hi, |u| {
        let v = f.eval(u);
        if !v.is_finite() && bad.is_none() {
            bad = Some(u);
        }
        v
    });
    if let Some(u) = bad {
        return Err(Error::NonFinite {
            what: format!("f inside cell k = {k}"),
            x: u,
        });
    }
    Ok(integral / (hi - lo))
}

/// `K_w f(x)`: kernel-weighted sum of the cell averages over the certified
/// window. Summation order is fixed (ascending `k`) for determinism.
pub fn apply_kantorovich(f: &TargetFunction, x: f64, cfg: &OperatorConfig) -> Result<f64> {
    cfg.require_bounded(f)?;
    let (klo, khi) = cfg.window(x)?;
    let mut acc = 0.0;
    for k in klo..=khi {
        let weight = cfg.kernel.eval(cfg.w * x - k as f64);
        if weight == 0.0 {
            continue;
        }
        acc += weight * cell_average(f, k, cfg)?;
    }
    Ok(acc)
}

/// `T_w f(x) = Σ_k φ(wx−k) f(k/w)`, for comparison against `K_w`.
pub fn apply_generalized_sampling(f: &TargetFunction, x: f64, cfg: &OperatorConfig) -> Result<f64> {
    cfg.require_bounded(f)?;
    let (klo, khi) = cfg.window(x)?;
    let mut acc = 0.0;
    for k in klo..=khi {
        let weight = cfg.kernel.eval(cfg.w * x - k as f64);
        if weight == 0.0 {
            continue;
        }
        let v = f.eval(k as f64 / cfg.w);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                what: "point sample".into(),
                x: k as f64 / cfg.w,
            });
        }
        acc += weight * v;
    }
    Ok(acc)
}

/// Elementwise [`apply_kantorovich`] over a grid. Points are evaluated in
/// parallel but assembled in order; the result is identical to sequential
/// evaluation.
pub fn apply_on_grid(f: &TargetFunction, grid: &[f64], cfg: &OperatorConfig) -> Result<Vec<f64>> {
    let results: Vec<Result<f64>> = grid
        .par_iter()
        .map(|&x| apply_kantorovich(f, x, cfg))
        .collect();
    let mut out = Vec::with_capacity(results.len());
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => out.push(v),
            Err(e) => {
                return Err(Error::AtGridPoint {
                    index,
                    source: Box::new(e),
                })
            }
        }
    }
    Ok(out)
}

/// Reconstruction from measured averaged samples: `Σ_k φ(wx−k)·averages[k]`.
/// Every `k` in the truncation window of `x` must be present.
pub fn apply_from_samples(
    averages: &BTreeMap<i64, f64>,
    x: f64,
    cfg: &OperatorConfig,
) -> Result<f64> {
    let (klo, khi) = cfg.window(x)?;
    let mut acc = 0.0;
    for k in klo..=khi {
        let weight = cfg.kernel.eval(cfg.w * x - k as f64);
        if weight == 0.0 {
            continue;
        }
        let v = averages.get(&k).ok_or(Error::MissingSample(k))?;
        acc += weight * v;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions;
    use crate::intervals::IntervalSequence;
    use crate::kernel::Kernel;

    fn cfg<'a>(k: &'a Kernel, s: &'a IntervalSequence, w: f64) -> OperatorConfig<'a> {
        OperatorConfig::with_defaults(k, s, w).unwrap()
    }

    #[test]
    fn cell_average_of_constant_and_linear() {
        let k = Kernel::bspline(2).unwrap();
        let s = IntervalSequence::constant(0.0, 1.0).unwrap();
        let c = cfg(&k, &s, 10.0);
        let f5 = functions::constant(5.0);
        assert!((cell_average(&f5, 3, &c).unwrap() - 5.0).abs() < 1e-14);
        // f(u) = u over [(3+0)/10, (3+1)/10] has mean 0.35
        let id = functions::clamped_identity(1000.0);
        assert!((cell_average(&id, 3, &c).unwrap() - 0.35).abs() < 1e-14);
        // f(u) = u^2 over [0, 1] has mean 1/3
        let q = functions::windowed_quadratic();
        let c1 = cfg(&k, &s, 1.0);
        assert!((cell_average(&q, 0, &c1).unwrap() - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn constants_are_reproduced() {
        let s = IntervalSequence::constant(0.0, 1.0).unwrap();
        let f5 = functions::constant(5.0);
        for kern in [
            Kernel::bspline(2).unwrap(),
            Kernel::bspline(3).unwrap(),
            Kernel::spline_combo(3, -1.0, 1.0).unwrap(),
        ] {
            let c = cfg(&kern, &s, 8.0);
            for x in [-3.2, 0.0, 0.7, 11.0] {
                assert!((apply_kantorovich(&f5, x, &c).unwrap() - 5.0).abs() < 1e-12);
                assert!((apply_generalized_sampling(&f5, x, &c).unwrap() - 5.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_shift_identity() {
        // K_w id = x + alpha/(2w) for m1-clean kernels with constant alpha
        let k = Kernel::bspline(2).unwrap();
        let s = IntervalSequence::constant(0.0, 1.0).unwrap();
        let c = cfg(&k, &s, 8.0);
        let id = functions::clamped_identity(1000.0);
        let got = apply_kantorovich(&id, 0.7, &c).unwrap();
        assert!((got - 0.7625).abs() < 1e-12, "got {got}");
        // T_w is exact on linear functions
        let t = apply_generalized_sampling(&id, 0.7, &c).unwrap();
        assert!((t - 0.7).abs() < 1e-12);
        assert!((got - t - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn grid_application_matches_pointwise() {
        let k = Kernel::bspline(3).unwrap();
        let s = IntervalSequence::constant(-0.5, 0.5).unwrap();
        let c = cfg(&k, &s, 16.0);
        let f = functions::sine();
        assert!(apply_on_grid(&f, &[], &c).unwrap().is_empty());
        let grid = [-1.0, 0.25, 2.0];
        let batch = apply_on_grid(&f, &grid, &c).unwrap();
        for (i, &x) in grid.iter().enumerate() {
            assert_eq!(batch[i], apply_kantorovich(&f, x, &c).unwrap());
        }
    }

    #[test]
    fn from_samples_is_definitionally_consistent() {
        let k = Kernel::bspline(2).unwrap();
        let s = IntervalSequence::constant(0.0, 1.0).unwrap();
        let c = cfg(&k, &s, 4.0);
        let f = functions::sine();
        let x = 1.3;
        let (klo, khi) = c.window(x).unwrap();
        let mut avgs = BTreeMap::new();
        for k in klo..=khi {
            avgs.insert(k, cell_average(&f, k, &c).unwrap());
        }
        let direct = apply_kantorovich(&f, x, &c).unwrap();
        let from_samples = apply_from_samples(&avgs, x, &c).unwrap();
        assert_eq!(direct, from_samples);
    }

    #[test]
    fn missing_sample_is_reported_by_index() {
        let k = Kernel::bspline(2).unwrap();
        let s = IntervalSequence::constant(0.0, 1.0).unwrap();
        let c = cfg(&k, &s, 10.0);
        let mut avgs = BTreeMap::new();
        avgs.insert(6, 1.0);
        avgs.insert(8, 1.0);
        // x = 0.7 needs k = 7
        match apply_from_samples(&avgs, 0.7, &c) {
            Err(Error::MissingSample(7)) => {}
            other => panic!("expected MissingSample(7), got {other:?}"),
        }
    }

    #[test]
    fn compact_window_size_bound() {
        // at most ceil(2R) + 1 indices for a kernel supported in [-R, R]
        for kern in [Kernel::bspline(2).unwrap(), Kernel::bspline(5).unwrap()] {
            let r = kern.compact_radius().unwrap();
            let s = IntervalSequence::constant(0.0, 1.0).unwrap();
            let c = cfg(&kern, &s, 7.3);
            for i in 0..50 {
                let x = -2.0 + i as f64 * 0.17;
                let (klo, khi) = c.window(x).unwrap();
                let count = khi - klo + 1;
                assert!(count <= (2.0 * r).ceil() as i64 + 1, "x={x} count={count}");
            }
        }
    }

    #[test]
    fn unbounded_input_rejected() {
        let k = Kernel::bspline(2).unwrap();
        let s = IntervalSequence::constant(0.0, 1.0).unwrap();
        let c = cfg(&k, &s, 8.0);
        let f = functions::sine().derivative_fn().unwrap(); // no sup certificate
        assert!(apply_kantorovich(&f, 0.0, &c).is_err());
    }

    #[test]
    fn rejects_bad_config() {
        let k = Kernel::bspline(2).unwrap();
        let s = IntervalSequence::constant(0.0, 1.0).unwrap();
        assert!(OperatorConfig::new(&k, &s, 0.0, 1e-10, 8).is_err());
        assert!(OperatorConfig::new(&k, &s, 1.0, 0.0, 8).is_err());
        assert!(OperatorConfig::new(&k, &s, 1.0, 1e-10, 1).is_err());
    }
}
