//! Executable convergence experiments: Voronovskaya residuals, the
//! quantitative first-order bound through the least concave majorant, and the
//! Hölder-order bound with empirical rate fitting.

pub mod modulus;

pub use modulus::{concave_majorant, estimate_modulus, ModulusProfile};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::TargetFunction;
use crate::intervals::IntervalSequence;
use crate::kernel::Kernel;
use crate::moments::{self, MomentTable};
use crate::operator::{apply_kantorovich, OperatorConfig};

/// Slack multiplier accepted when checking `residual ≤ bound`; covers
/// grid-sup underestimation of moduli and moment sups.
pub const BOUND_VALIDITY_TOLERANCE: f64 = 1.05;
/// Errors at or below this are treated as floating-point floor: excluded
/// from rate fits and given ratio 0 when the bound is exactly zero.
pub const RESIDUAL_FLOOR: f64 = 1e-13;
/// A zero bound (linear functions) is accepted when the residual is below
/// this absolute level.
pub const ZERO_BOUND_FLOOR: f64 = 1e-8;

const MODULUS_GRID_DENSITY: usize = 2001;

/// `w·(K_w f(x) − f(x)) − (α/2)·f′(x)` — zero in the limit `w → ∞` for
/// differentiable `f` when the interval family has constant endpoint sum α.
pub fn voronovskaya_residual(f: &TargetFunction, x: f64, cfg: &OperatorConfig) -> Result<f64> {
    let alpha = cfg.intervals().alpha().ok_or_else(|| {
        Error::Hypothesis("Voronovskaya residual requires constant a_k + b_k".into())
    })?;
    let d = f.derivative_at(x)?;
    let kw = apply_kantorovich(f, x, cfg)?;
    Ok(cfg.w() * (kw - f.eval(x)) - alpha / 2.0 * d)
}

/// `A = (M*)² M₀ + 2 M* M₁ + M₂`, the constant of the first-order bound.
pub fn theorem2_constant(moments: &MomentTable, intervals: &IntervalSequence) -> f64 {
    let m_star = intervals.m_star();
    m_star * m_star * moments.m0 + 2.0 * m_star * moments.m1 + moments.m2
}

/// First-order quantitative bound on the Voronovskaya residual:
/// `(A/Δ*)·ω̄(f′, Δ*/(2w))`.
pub fn theorem2_bound(
    f: &TargetFunction,
    cfg: &OperatorConfig,
    moments: &MomentTable,
    profile_of_f_prime: &ModulusProfile,
) -> Result<f64> {
    if !f.has_derivative() {
        return Err(Error::Hypothesis(format!(
            "first-order bound requires a derivative for '{}'",
            f.name()
        )));
    }
    let delta_star = cfg.intervals().delta_star();
    let a = theorem2_constant(moments, cfg.intervals());
    let omega_bar = profile_of_f_prime.majorant_at(delta_star / (2.0 * cfg.w()))?;
    Ok(a / delta_star * omega_bar)
}

/// Compact-support variant of the first-order bound, with constant
/// `M₀·(R² + 2RM* + (M*)²)/Δ*` for kernels supported in `[−R, R]`.
pub fn theorem2_bound_compact(
    f: &TargetFunction,
    cfg: &OperatorConfig,
    moments: &MomentTable,
    profile_of_f_prime: &ModulusProfile,
    r: f64,
) -> Result<f64> {
    if cfg.kernel().compact_radius().is_none() {
        return Err(Error::Hypothesis(format!(
            "compact-support bound requires a compactly supported kernel, '{}' is not",
            cfg.kernel().name()
        )));
    }
    if !f.has_derivative() {
        return Err(Error::Hypothesis(format!(
            "first-order bound requires a derivative for '{}'",
            f.name()
        )));
    }
    let m_star = cfg.intervals().m_star();
    let delta_star = cfg.intervals().delta_star();
    let constant = moments.m0 * (r * r + 2.0 * r * m_star + m_star * m_star) / delta_star;
    let omega_bar = profile_of_f_prime.majorant_at(delta_star / (2.0 * cfg.w()))?;
    Ok(constant * omega_bar)
}

/// Hölder-order bound
/// `ω(f, w^{−β})·(M_β + (M*)^β M₀ + M₀) + 2^{β+1}‖f‖_∞ w^{−β} M_β`,
/// valid only for `w > 2M*` (strict — the statement's hypothesis).
pub fn theorem3_bound(
    f: &TargetFunction,
    beta: f64,
    w: f64,
    moments: &MomentTable,
    m_star: f64,
    omega_at: f64,
) -> Result<f64> {
    if !(0.0 < beta && beta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "order beta must lie in (0, 1), got {beta}"
        )));
    }
    if !(w > 2.0 * m_star) {
        return Err(Error::Hypothesis(format!(
            "Hoelder-order bound requires w > 2 M* strictly (w = {w}, 2 M* = {})",
            2.0 * m_star
        )));
    }
    let m_beta = match &moments.fractional {
        Some(entry) if entry.beta == beta => entry.value,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "moment table for '{}' carries no fractional moment of order {beta}",
                moments.kernel_name
            )))
        }
    };
    let sup = f.sup_bound();
    if !sup.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "function '{}' carries no finite sup bound",
            f.name()
        )));
    }
    let wb = w.powf(-beta);
    Ok(omega_at * (m_beta + m_star.powf(beta) * moments.m0 + moments.m0)
        + 2f64.powf(beta + 1.0) * sup * wb * m_beta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateMode {
    /// Residual `w(K_w f − f) − (α/2)f′` against the first-order bound.
    Voronovskaya,
    /// Plain error `K_w f − f` against the Hölder-order bound.
    HolderOrder { beta: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    pub w: f64,
    pub max_abs_residual: f64,
    pub theorem_bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub kernel_name: String,
    pub interval_spec: String,
    pub function_name: String,
    pub rows: Vec<RateRow>,
    /// `−slope` of the least-squares fit of `log error` against `log w`;
    /// absent when too few rows rise above the floating-point floor.
    pub fitted_order: Option<f64>,
    pub alpha: Option<f64>,
    pub bound_validity_tolerance: f64,
}

impl ConvergenceReport {
    pub fn bounds_hold(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.ratio <= self.bound_validity_tolerance)
    }
}

fn ratio_of(residual: f64, bound: f64) -> f64 {
    if bound > 0.0 {
        residual / bound
    } else if residual <= ZERO_BOUND_FLOOR {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Least-squares slope of `log error` vs `log w`, rows at the float floor
/// excluded; returns the fitted convergence order (`−slope`).
pub fn fit_order(rows: &[RateRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.max_abs_residual > RESIDUAL_FLOOR)
        .map(|r| (r.w.ln(), r.max_abs_residual.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    Some(-(n * sxy - sx * sy) / denom)
}

/// Modulus profile of `f'` sampled at every bound-evaluation point
/// `Δ*/(2w)` plus a geometric ladder, with the concave majorant filled.
pub fn derivative_modulus_profile(
    f: &TargetFunction,
    intervals: &IntervalSequence,
    w_list: &[f64],
) -> Result<ModulusProfile> {
    let fp = f.derivative_fn()?;
    let delta_star = intervals.delta_star();
    let mut deltas: Vec<f64> = w_list.iter().map(|&w| delta_star / (2.0 * w)).collect();
    let region = fp.modulus_region();
    let span = (region.1 - region.0) / 2.0;
    let lo = deltas.iter().copied().fold(f64::INFINITY, f64::min) / 2.0;
    let steps = 16;
    for i in 0..=steps {
        deltas.push(lo * (span / lo).powf(i as f64 / steps as f64));
    }
    deltas.sort_by(f64::total_cmp);
    deltas.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let profile = estimate_modulus(&fp, region, &deltas, MODULUS_GRID_DENSITY)?;
    Ok(concave_majorant(profile))
}

fn max_over_grid(grid: &[f64], eval: impl Fn(f64) -> Result<f64> + Sync) -> Result<f64> {
    let vals: Vec<Result<f64>> = grid.par_iter().map(|&x| eval(x)).collect();
    let mut max = 0.0f64;
    for v in vals {
        max = max.max(v?.abs());
    }
    Ok(max)
}

/// One row per `w`: the max-over-grid residual (or error), the matching
/// theorem bound, and their ratio; plus the fitted empirical order.
pub fn rate_table(
    f: &TargetFunction,
    kernel: &Kernel,
    intervals: &IntervalSequence,
    w_list: &[f64],
    x_grid: &[f64],
    mode: RateMode,
) -> Result<ConvergenceReport> {
    if w_list.is_empty() {
        return Err(Error::InvalidArgument("empty w list".into()));
    }
    for pair in w_list.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(Error::InvalidArgument(
                "w list must be strictly increasing".into(),
            ));
        }
    }

    let mut rows = Vec::with_capacity(w_list.len());
    match mode {
        RateMode::Voronovskaya => {
            let table = moments::moment_table_cached(kernel, None)?;
            let profile = derivative_modulus_profile(f, intervals, w_list)?;
            for &w in w_list {
                let cfg = OperatorConfig::with_defaults(kernel, intervals, w)?;
                let residual = max_over_grid(x_grid, |x| voronovskaya_residual(f, x, &cfg))?;
                let bound = theorem2_bound(f, &cfg, &table, &profile)?;
                rows.push(RateRow {
                    w,
                    max_abs_residual: residual,
                    theorem_bound: bound,
                    ratio: ratio_of(residual, bound),
                });
            }
        }
        RateMode::HolderOrder { beta } => {
            let table = moments::moment_table_cached(kernel, Some(beta))?;
            let m_star = intervals.m_star();
            // omega sampled exactly at every evaluation point w^{-beta}
            let mut deltas: Vec<f64> = w_list.iter().map(|&w| w.powf(-beta)).collect();
            deltas.sort_by(f64::total_cmp);
            deltas.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
            let profile =
                estimate_modulus(f, f.modulus_region(), &deltas, MODULUS_GRID_DENSITY)?;
            for &w in w_list {
                let cfg = OperatorConfig::with_defaults(kernel, intervals, w)?;
                let error = max_over_grid(x_grid, |x| {
                    Ok(apply_kantorovich(f, x, &cfg)? - f.eval(x))
                })?;
                let omega_at = profile.omega_at(w.powf(-beta))?;
                let bound = theorem3_bound(f, beta, w, &table, m_star, omega_at)?;
                rows.push(RateRow {
                    w,
                    max_abs_residual: error,
                    theorem_bound: bound,
                    ratio: ratio_of(error, bound),
                });
            }
        }
    }

    let fitted_order = fit_order(&rows);
    Ok(ConvergenceReport {
        kernel_name: kernel.name().to_string(),
        interval_spec: intervals.describe(),
        function_name: f.name().to_string(),
        rows,
        fitted_order,
        alpha: intervals.alpha(),
        bound_validity_tolerance: BOUND_VALIDITY_TOLERANCE,
    })
}
