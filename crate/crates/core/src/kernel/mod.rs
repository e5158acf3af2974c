//! Kernel functions for the sampling series and numeric admissibility checks.
//!
//! A kernel `φ` is admissible when it forms a partition of unity
//! (`Σ_k φ(u−k) = 1`), has vanishing first algebraic moment
//! (`Σ_k φ(u−k)(k−u) = 0`), and has a finite second absolute moment with
//! uniformly vanishing tails. [`certify`] checks all of this on a periodic
//! `u`-grid, with analytic tail bounds for kernels of polynomial decay.

pub mod bspline;
mod sinc;

pub use bspline::BSpline;
pub use sinc::{blackman_harris, sinc};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid;

/// Serializable kernel description. This is the wire format accepted by the
/// CLI and used as the cache key for moment tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    /// Cardinal B-spline of order `h`.
    Bspline { h: u32 },
    /// Two-translate combination `a0 B_h(x−eps0) + a1 B_h(x−eps1)` with the
    /// coefficients solved from the partition-of-unity and first-moment
    /// constraints.
    SplineCombo { h: u32, eps0: f64, eps1: f64 },
    BlackmanHarris,
    /// The identically-zero kernel. Never admissible; kept as a negative
    /// control for certification.
    Zero,
}

/// Declared support/decay class of a kernel, in units of the sample index.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Support {
    CompactInterval { lo: f64, hi: f64 },
    /// `|φ(x)| ≤ bound_constant / |x|^exponent` for `|x| ≥ onset_radius`.
    PolynomialDecay {
        exponent: f64,
        onset_radius: f64,
        bound_constant: f64,
    },
}

#[derive(Debug, Clone)]
enum Eval {
    Spline(BSpline),
    Combo {
        spline: BSpline,
        eps0: f64,
        eps1: f64,
        a0: f64,
        a1: f64,
    },
    BlackmanHarris,
    Zero,
}

/// An evaluable kernel with its declared support class.
#[derive(Debug, Clone)]
pub struct Kernel {
    spec: KernelSpec,
    name: String,
    support: Support,
    kind: Eval,
    sup_norm: f64,
}

/// Solves the 2x2 system `a0 + a1 = 1`, `eps0 a0 + eps1 a1 = 0`.
pub fn solve_combo_coefficients(eps0: f64, eps1: f64) -> Result<(f64, f64)> {
    if eps0 == eps1 {
        return Err(Error::InvalidKernel(
            "spline combination shifts must differ (singular system)".into(),
        ));
    }
    let a0 = eps1 / (eps1 - eps0);
    let a1 = -eps0 / (eps1 - eps0);
    Ok((a0, a1))
}

/// `B_h(x)` for order `h ≥ 1` and finite `x`.
pub fn eval_bspline(h: u32, x: f64) -> Result<f64> {
    if h == 0 {
        return Err(Error::InvalidKernel("B-spline order must be >= 1".into()));
    }
    if !x.is_finite() {
        return Err(Error::NonFinite {
            what: "B-spline argument".into(),
            x,
        });
    }
    Ok(BSpline::new(h).eval(x))
}

/// `H(x)` for finite `x`.
pub fn eval_blackman_harris(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite {
            what: "Blackman-Harris argument".into(),
            x,
        });
    }
    Ok(blackman_harris(x))
}

impl Kernel {
    pub fn from_spec(spec: KernelSpec) -> Result<Kernel> {
        match spec {
            KernelSpec::Bspline { h } => {
                if h == 0 {
                    return Err(Error::InvalidKernel("B-spline order must be >= 1".into()));
                }
                let b = BSpline::new(h);
                let (lo, hi) = b.support();
                let sup = b.eval(0.0);
                Ok(Kernel {
                    spec,
                    name: format!("bspline{h}"),
                    support: Support::CompactInterval { lo, hi },
                    kind: Eval::Spline(b),
                    sup_norm: sup,
                })
            }
            KernelSpec::SplineCombo { h, eps0, eps1 } => {
                if h < 2 {
                    return Err(Error::InvalidKernel(
                        "spline combination requires order h >= 2".into(),
                    ));
                }
                if !(eps0 < eps1) {
                    return Err(Error::InvalidKernel(
                        "spline combination requires eps0 < eps1".into(),
                    ));
                }
                let (a0, a1) = solve_combo_coefficients(eps0, eps1)?;
                let b = BSpline::new(h);
                let half = f64::from(h) / 2.0;
                // union of the two translated supports
                let (lo, hi) = (eps0 - half, eps1 + half);
                let eval = move |x: f64, b: &BSpline| a0 * b.eval(x - eps0) + a1 * b.eval(x - eps1);
                let sup = (0..=4000)
                    .map(|i| eval(lo + (hi - lo) * i as f64 / 4000.0, &b).abs())
                    .fold(0.0, f64::max);
                Ok(Kernel {
                    spec,
                    name: format!("combo_h{h}[{eps0},{eps1}]"),
                    support: Support::CompactInterval { lo, hi },
                    kind: Eval::Combo {
                        spline: b,
                        eps0,
                        eps1,
                        a0,
                        a1,
                    },
                    sup_norm: sup,
                })
            }
            KernelSpec::BlackmanHarris => {
                let onset = 10.0;
                // Fitted decay constant: max of |H(x)| x^5 over [N0, 4 N0].
                let mut m = 0.0f64;
                for i in 0..=30000 {
                    let x = onset + 3.0 * onset * i as f64 / 30000.0;
                    m = m.max(blackman_harris(x).abs() * x.powi(5));
                }
                let sup = (0..=8000)
                    .map(|i| blackman_harris(-10.0 + 20.0 * i as f64 / 8000.0).abs())
                    .fold(0.0, f64::max);
                Ok(Kernel {
                    spec,
                    name: "blackman_harris".into(),
                    support: Support::PolynomialDecay {
                        exponent: 5.0,
                        onset_radius: onset,
                        bound_constant: m,
                    },
                    kind: Eval::BlackmanHarris,
                    sup_norm: sup,
                })
            }
            KernelSpec::Zero => Ok(Kernel {
                spec,
                name: "zero".into(),
                support: Support::CompactInterval { lo: -1.0, hi: 1.0 },
                kind: Eval::Zero,
                sup_norm: 0.0,
            }),
        }
    }

    pub fn bspline(h: u32) -> Result<Kernel> {
        Kernel::from_spec(KernelSpec::Bspline { h })
    }

    pub fn spline_combo(h: u32, eps0: f64, eps1: f64) -> Result<Kernel> {
        Kernel::from_spec(KernelSpec::SplineCombo { h, eps0, eps1 })
    }

    pub fn blackman_harris_kernel() -> Kernel {
        Kernel::from_spec(KernelSpec::BlackmanHarris).expect("always constructible")
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            Eval::Spline(b) => b.eval(x),
            Eval::Combo {
                spline,
                eps0,
                eps1,
                a0,
                a1,
            } => a0 * spline.eval(x - eps0) + a1 * spline.eval(x - eps1),
            Eval::BlackmanHarris => blackman_harris(x),
            Eval::Zero => 0.0,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn is_compact(&self) -> bool {
        matches!(self.support, Support::CompactInterval { .. })
    }

    /// `R` such that a compact kernel is supported in `[-R, R]`.
    pub fn compact_radius(&self) -> Option<f64> {
        match self.support {
            Support::CompactInterval { lo, hi } => Some(lo.abs().max(hi.abs())),
            Support::PolynomialDecay { .. } => None,
        }
    }

    /// Sup norm over the evaluation region, used by the Remark-style moment
    /// comparison `M_μ ≤ 2‖φ‖_∞ + M_ν`.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// Upper bound on `Σ_{|u−k| > r} |φ(u−k)| |k−u|^ν`, uniform in `u`.
    ///
    /// For decay exponent `p` the integrand is dominated by
    /// `M t^{ν−p}`, so the sum is at most `2M (r^{ν−p} + r^{ν−p+1}/(p−ν−1))`.
    pub fn tail_bound(&self, r: f64, nu: f64) -> Result<f64> {
        match self.support {
            Support::CompactInterval { .. } => {
                let srad = self.compact_radius().unwrap();
                if r >= srad {
                    Ok(0.0)
                } else {
                    // crude but safe: every remaining term is bounded by the sup norm
                    Ok(self.sup_norm * (2.0 * srad + 1.0) * srad.powf(nu))
                }
            }
            Support::PolynomialDecay {
                exponent: p,
                onset_radius,
                bound_constant: m,
            } => {
                if p - nu <= 1.0 {
                    return Err(Error::InvalidArgument(format!(
                        "moment of order {nu} not summable for decay exponent {p}"
                    )));
                }
                if r < onset_radius {
                    return Err(Error::InvalidArgument(format!(
                        "tail bound only valid beyond the decay onset radius {onset_radius}"
                    )));
                }
                Ok(2.0 * m * (r.powf(nu - p) + r.powf(nu - p + 1.0) / (p - nu - 1.0)))
            }
        }
    }

    /// Smallest summation radius with certified tail `≤ tol` for the absolute
    /// moment of order `nu`. For compact kernels this is the support radius.
    pub fn radius_for(&self, nu: f64, tol: f64) -> Result<f64> {
        match self.support {
            Support::CompactInterval { .. } => Ok(self.compact_radius().unwrap()),
            Support::PolynomialDecay { onset_radius, .. } => {
                let mut r = onset_radius.max(1.0);
                let mut bound = self.tail_bound(r, nu)?;
                if bound <= tol {
                    return Ok(r);
                }
                let mut lo;
                loop {
                    lo = r;
                    r *= 2.0;
                    if r > 1e12 {
                        return Err(Error::Truncation {
                            achieved: bound,
                            requested: tol,
                        });
                    }
                    bound = self.tail_bound(r, nu)?;
                    if bound <= tol {
                        break;
                    }
                }
                let mut hi = r;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if self.tail_bound(mid, nu)? <= tol {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Ok(hi)
            }
        }
    }

    /// Integer index window `{k : φ(u−k) possibly nonzero}` for the series at
    /// `u`, exact for compact kernels and tail-certified (order 0, budget
    /// `tol`) for decay kernels.
    pub fn index_window(&self, u: f64, tol: f64) -> Result<(i64, i64)> {
        match self.support {
            Support::CompactInterval { lo, hi } => {
                Ok(((u - hi).ceil() as i64, (u - lo).floor() as i64))
            }
            Support::PolynomialDecay { .. } => {
                let r = self.radius_for(0.0, tol)?;
                Ok(((u - r).ceil() as i64, (u + r).floor() as i64))
            }
        }
    }
}

/// Numeric admissibility certificate: grid-sup defects for the
/// partition-of-unity and first-moment conditions, second-moment tail
/// behaviour per radius, and an optional fractional moment estimate.
#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityCertificate {
    pub kernel: String,
    pub grid_size: usize,
    /// max over the `u`-grid of `|Σ_k φ(u−k) − 1|`, plus the analytic series
    /// tail for decay kernels.
    pub partition_of_unity_defect: f64,
    /// max over the `u`-grid of `|Σ_k φ(u−k)(k−u)|`, plus the series tail.
    pub first_moment_defect: f64,
    pub m2_finite: bool,
    /// grid-sup estimate of `M_2(φ)` including the analytic tail.
    pub m2_sup: f64,
    /// analytic bound on what the reported defects drop beyond the summation
    /// window (zero for compact kernels).
    pub series_tail_bound: f64,
    /// analytic truncation bound on `m2_sup` (coarser: finiteness is the
    /// condition, not a tight value).
    pub m2_tail_bound: f64,
    pub tail_vanishing: Vec<TailSample>,
    pub fractional_beta: Option<FractionalMoment>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailSample {
    pub radius: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FractionalMoment {
    pub beta: f64,
    pub value: f64,
}

struct WindowPlan {
    /// summation radius; `None` means "use the exact compact support window"
    radius: Option<f64>,
    pou_tail: f64,
    m1_tail: f64,
    m2_tail: f64,
    beta_tail: f64,
}

fn plan_window(kernel: &Kernel, radii: &[f64], beta: Option<f64>) -> Result<WindowPlan> {
    match kernel.support {
        Support::CompactInterval { .. } => Ok(WindowPlan {
            radius: None,
            pou_tail: 0.0,
            m1_tail: 0.0,
            m2_tail: 0.0,
            beta_tail: 0.0,
        }),
        Support::PolynomialDecay { .. } => {
            let r1 = kernel.radius_for(1.0, 1e-9)?;
            let r2 = kernel.radius_for(2.0, 1e-6)?;
            let rb = match beta {
                Some(b) => kernel.radius_for(b, 1e-9)?,
                None => 0.0,
            };
            let rmax = radii.iter().copied().fold(0.0f64, f64::max) + 1.0;
            let w = r1.max(r2).max(rb).max(rmax);
            Ok(WindowPlan {
                radius: Some(w),
                pou_tail: kernel.tail_bound(w, 0.0)?,
                m1_tail: kernel.tail_bound(w, 1.0)?,
                m2_tail: kernel.tail_bound(w, 2.0)?,
                beta_tail: match beta {
                    Some(b) => kernel.tail_bound(w, b)?,
                    None => 0.0,
                },
            })
        }
    }
}

struct Sums {
    m0: f64,
    m1: f64,
    m2_abs: f64,
    tails: Vec<f64>,
    mbeta: f64,
}

fn sums_at(kernel: &Kernel, u: f64, plan: &WindowPlan, radii: &[f64], beta: Option<f64>) -> Sums {
    let (klo, khi) = match plan.radius {
        Some(r) => ((u - r).ceil() as i64, (u + r).floor() as i64),
        None => kernel.index_window(u, 0.0).expect("compact window"),
    };
    let mut s = Sums {
        m0: 0.0,
        m1: 0.0,
        m2_abs: 0.0,
        tails: vec![0.0; radii.len()],
        mbeta: 0.0,
    };
    for k in klo..=khi {
        let v = kernel.eval(u - k as f64);
        if v == 0.0 {
            continue;
        }
        let d = k as f64 - u;
        s.m0 += v;
        s.m1 += v * d;
        let w2 = v.abs() * d * d;
        s.m2_abs += w2;
        for (i, &r) in radii.iter().enumerate() {
            if d.abs() > r {
                s.tails[i] += w2;
            }
        }
        if let Some(b) = beta {
            s.mbeta += v.abs() * d.abs().powf(b);
        }
    }
    s
}

/// Checks the admissibility conditions on `grid_size` equispaced points of
/// `[0, 1)` (the summed quantities are 1-periodic in `u`), with one local
/// refinement pass around each grid maximum.
pub fn certify(
    kernel: &Kernel,
    grid_size: usize,
    radii: &[f64],
    beta: Option<f64>,
) -> Result<AdmissibilityCertificate> {
    if grid_size < 2 {
        return Err(Error::InvalidArgument("grid_size must be at least 2".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) || radii.iter().any(|&r| r <= 0.0) {
        return Err(Error::InvalidArgument(
            "radii must be positive and increasing".into(),
        ));
    }
    if let Some(b) = beta {
        if !(0.0 < b && b < 1.0) {
            return Err(Error::InvalidArgument("beta must lie in (0, 1)".into()));
        }
    }
    let plan = plan_window(kernel, radii, beta)?;

    use rayon::prelude::*;
    let grid: Vec<Sums> = (0..grid_size)
        .into_par_iter()
        .map(|i| sums_at(kernel, i as f64 / grid_size as f64, &plan, radii, beta))
        .collect();

    let step = 1.0 / grid_size as f64;
    let refine = |pick: &dyn Fn(&Sums) -> f64| -> f64 {
        let (imax, vmax) = grid
            .iter()
            .map(pick)
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        grid::refine_around(imax as f64 * step, step, vmax, &|u| {
            pick(&sums_at(kernel, u, &plan, radii, beta))
        })
    };

    let pou = refine(&|s: &Sums| (s.m0 - 1.0).abs()) + plan.pou_tail;
    let m1 = refine(&|s: &Sums| s.m1.abs()) + plan.m1_tail;
    let m2 = refine(&|s: &Sums| s.m2_abs) + plan.m2_tail;
    let tails: Vec<TailSample> = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| TailSample {
            radius: r,
            value: refine(&|s: &Sums| s.tails[i]) + plan.m2_tail,
        })
        .collect();
    let fractional = beta.map(|b| FractionalMoment {
        beta: b,
        value: refine(&|s: &Sums| s.mbeta) + plan.beta_tail,
    });

    Ok(AdmissibilityCertificate {
        kernel: kernel.name().to_string(),
        grid_size,
        partition_of_unity_defect: pou,
        first_moment_defect: m1,
        m2_finite: true,
        m2_sup: m2,
        series_tail_bound: plan.pou_tail.max(plan.m1_tail),
        m2_tail_bound: plan.m2_tail,
        tail_vanishing: tails,
        fractional_beta: fractional,
    })
}
