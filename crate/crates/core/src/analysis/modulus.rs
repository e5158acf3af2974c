//! Empirical modulus of continuity `ω(f,δ)` and its least concave majorant
//! `ω̄`, realized as the upper concave hull of the sampled points.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::TargetFunction;

/// Number of sub-δ offsets scanned per grid point. The largest offset equals
/// δ exactly, so Lipschitz-type extremes attained at distance exactly δ are
/// hit without grid rounding.
const OFFSETS_PER_DELTA: usize = 16;

#[derive(Debug, Clone, Serialize)]
pub struct ModulusProfile {
    deltas: Vec<f64>,
    omegas: Vec<f64>,
    /// Piecewise-linear least concave majorant; empty until
    /// [`concave_majorant`] fills it.
    majorant_breakpoints: Vec<(f64, f64)>,
}

impl ModulusProfile {
    /// Builds a profile from raw samples. `deltas` must start at 0 and be
    /// strictly increasing; `omegas` must start at 0, be nonnegative and
    /// nondecreasing.
    pub fn from_samples(deltas: Vec<f64>, omegas: Vec<f64>) -> Result<Self> {
        if deltas.len() != omegas.len() || deltas.len() < 2 {
            return Err(Error::InvalidArgument(
                "modulus profile needs matching delta/omega lists with at least 2 samples".into(),
            ));
        }
        if deltas[0] != 0.0 || omegas[0] != 0.0 {
            return Err(Error::InvalidArgument(
                "modulus profile must start at (0, 0)".into(),
            ));
        }
        for i in 1..deltas.len() {
            if !(deltas[i] > deltas[i - 1]) || !deltas[i].is_finite() {
                return Err(Error::InvalidArgument(
                    "deltas must be finite and strictly increasing".into(),
                ));
            }
            if !(omegas[i] >= omegas[i - 1]) || !omegas[i].is_finite() {
                return Err(Error::InvalidArgument(
                    "omegas must be finite and nondecreasing".into(),
                ));
            }
        }
        Ok(ModulusProfile {
            deltas,
            omegas,
            majorant_breakpoints: Vec::new(),
        })
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn majorant_breakpoints(&self) -> &[(f64, f64)] {
        &self.majorant_breakpoints
    }

    /// Sampled `ω` at a sampled δ (linear interpolation between samples).
    pub fn omega_at(&self, delta: f64) -> Result<f64> {
        eval_piecewise(
            self.deltas.iter().copied().zip(self.omegas.iter().copied()),
            delta,
        )
    }

    /// `ω̄(δ)`: linear interpolation on the hull, constant beyond the last
    /// breakpoint (concavity-preserving extension of a bounded modulus).
    pub fn majorant_at(&self, delta: f64) -> Result<f64> {
        if self.majorant_breakpoints.is_empty() {
            return Err(Error::InvalidArgument(
                "majorant not computed; call concave_majorant first".into(),
            ));
        }
        eval_piecewise(self.majorant_breakpoints.iter().copied(), delta)
    }
}

fn eval_piecewise(points: impl Iterator<Item = (f64, f64)>, delta: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "modulus argument must be nonnegative, got {delta}"
        )));
    }
    let mut prev: Option<(f64, f64)> = None;
    for (d, v) in points {
        if delta <= d {
            return Ok(match prev {
                None => v,
                Some((pd, pv)) => pv + (v - pv) * (delta - pd) / (d - pd),
            });
        }
        prev = Some((d, v));
    }
    // beyond the last sample: constant extension
    Ok(prev.map(|(_, v)| v).unwrap_or(0.0))
}

/// Estimates `ω(f,δ) = sup_{|x−y|≤δ} |f(x)−f(y)|` over a bounded region by
/// scanning a dense grid with [`OFFSETS_PER_DELTA`] offsets per δ. Monotone
/// in δ by running max.
pub fn estimate_modulus(
    f: &TargetFunction,
    region: (f64, f64),
    deltas: &[f64],
    grid_density: usize,
) -> Result<ModulusProfile> {
    let (lo, hi) = region;
    if !lo.is_finite() || !hi.is_finite() || !(hi > lo) {
        return Err(Error::InvalidArgument(format!(
            "modulus region must be a finite interval, got ({lo}, {hi})"
        )));
    }
    if deltas.is_empty() {
        return Err(Error::InvalidArgument("empty delta list".into()));
    }
    for i in 0..deltas.len() {
        if !(deltas[i] > if i == 0 { 0.0 } else { deltas[i - 1] }) {
            return Err(Error::InvalidArgument(
                "deltas must be positive and strictly increasing".into(),
            ));
        }
    }
    if grid_density < 2 {
        return Err(Error::InvalidArgument(
            "grid density must be at least 2".into(),
        ));
    }

    let step = (hi - lo) / (grid_density - 1) as f64;
    let base: Vec<(f64, f64)> = (0..grid_density)
        .map(|i| {
            let x = lo + i as f64 * step;
            (x, f.eval(x))
        })
        .collect();
    if let Some(&(x, v)) = base.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: format!("f = {}", f.name()),
            x: if v.is_finite() { 0.0 } else { x },
        });
    }

    let mut out_d = Vec::with_capacity(deltas.len() + 1);
    let mut out_o = Vec::with_capacity(deltas.len() + 1);
    out_d.push(0.0);
    out_o.push(0.0);
    let mut running = 0.0f64;
    for &delta in deltas {
        for &(x, fx) in &base {
            for j in 1..=OFFSETS_PER_DELTA {
                let y = x + delta * j as f64 / OFFSETS_PER_DELTA as f64;
                if y > hi + 1e-12 {
                    break;
                }
                let fy = f.eval(y);
                if !fy.is_finite() {
                    return Err(Error::NonFinite {
                        what: format!("f = {}", f.name()),
                        x: y,
                    });
                }
                let diff = (fx - fy).abs();
                if diff > running {
                    running = diff;
                }
            }
        }
        out_d.push(delta);
        out_o.push(running);
    }
    ModulusProfile::from_samples(out_d, out_o)
}

/// Fills `majorant_breakpoints` with the upper concave hull of the sampled
/// points — the pointwise-smallest piecewise-linear concave function that
/// dominates every sample. Hull vertices are a subset of the input samples.
pub fn concave_majorant(mut profile: ModulusProfile) -> ModulusProfile {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(profile.deltas.len());
    for (&d, &o) in profile.deltas.iter().zip(profile.omegas.iter()) {
        let p = (d, o);
        while hull.len() >= 2 {
            let o2 = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            // pop `a` when it lies on or below the chord o2 -> p
            let cross = (a.0 - o2.0) * (p.1 - o2.1) - (a.1 - o2.1) * (p.0 - o2.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    profile.majorant_breakpoints = hull;
    profile
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions;
    use std::sync::Arc;

    fn linear_profile() -> ModulusProfile {
        ModulusProfile::from_samples(vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 1.0]).unwrap()
    }

    #[test]
    fn constant_function_has_zero_modulus() {
        let f = functions::constant(3.0);
        let p = estimate_modulus(&f, (0.0, 5.0), &[0.1, 0.5, 1.0], 200).unwrap();
        assert!(p.omegas().iter().all(|&o| o == 0.0));
    }

    #[test]
    fn lipschitz_one_is_exact_at_sampled_delta() {
        let f = functions::clamped_identity(1000.0);
        let p = estimate_modulus(&f, (0.0, 10.0), &[0.5], 500).unwrap();
        assert!((p.omegas()[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn sine_over_full_period_reaches_two() {
        let f = functions::sine();
        let pi = std::f64::consts::PI;
        let p = estimate_modulus(&f, (0.0, 2.0 * pi), &[pi], 4001).unwrap();
        assert!((p.omegas()[1] - 2.0).abs() < 1e-4, "got {}", p.omegas()[1]);
    }

    #[test]
    fn concave_input_is_its_own_majorant() {
        let p = concave_majorant(linear_profile());
        for (&d, &o) in p.deltas().iter().zip(p.omegas().iter()) {
            assert!((p.majorant_at(d).unwrap() - o).abs() < 1e-15);
        }
    }

    #[test]
    fn majorant_of_square_samples_is_the_chord() {
        let deltas = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        let omegas: Vec<f64> = deltas.iter().map(|d| d * d).collect();
        let p = concave_majorant(ModulusProfile::from_samples(deltas, omegas).unwrap());
        assert_eq!(p.majorant_breakpoints(), &[(0.0, 0.0), (1.0, 1.0)]);
        assert!((p.majorant_at(0.5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_point_majorant_interpolates() {
        let p = concave_majorant(ModulusProfile::from_samples(vec![0.0, 1.0], vec![0.0, 3.0]).unwrap());
        assert!((p.majorant_at(0.5).unwrap() - 1.5).abs() < 1e-15);
        // constant extension beyond the last breakpoint
        assert!((p.majorant_at(7.0).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn domination_and_concavity_hold() {
        let deltas = vec![0.0, 0.1, 0.3, 0.35, 0.8, 1.0];
        let omegas = vec![0.0, 0.05, 0.3, 0.31, 0.9, 0.95];
        let p = concave_majorant(ModulusProfile::from_samples(deltas, omegas).unwrap());
        for (&d, &o) in p.deltas().iter().zip(p.omegas().iter()) {
            assert!(p.majorant_at(d).unwrap() >= o - 1e-14);
        }
        let bp = p.majorant_breakpoints();
        for w in bp.windows(3) {
            let s1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            let s2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
            assert!(s2 <= s1 + 1e-12);
        }
    }

    #[test]
    fn rejects_malformed_samples() {
        assert!(ModulusProfile::from_samples(vec![0.0, 1.0], vec![0.0, -1.0]).is_err());
        assert!(ModulusProfile::from_samples(vec![0.5, 1.0], vec![0.0, 1.0]).is_err());
        assert!(ModulusProfile::from_samples(vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 1.0]).is_err());
        assert!(ModulusProfile::from_samples(vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn estimator_rejects_non_finite_values() {
        let f = crate::functions::TargetFunction::new(
            "bad",
            Arc::new(|x: f64| if x > 0.5 { f64::NAN } else { x }),
            None,
            1.0,
            crate::functions::Smoothness::C0,
            (0.0, 1.0),
        );
        assert!(estimate_modulus(&f, (0.0, 1.0), &[0.2], 50).is_err());
    }
}
