//! Target functions with certified sup bounds and (where available)
//! derivatives.
//!
//! The operator requires bounded, uniformly continuous inputs, so the
//! unbounded classics (`x`, `x²`, `x·sin 3x`) are continued outside a core
//! window: the derivative is tapered linearly to zero over a ramp of width
//! `T`, which keeps the continuation `C¹`, bounded, and leaves the modulus of
//! continuity of `f'` attained inside the core.

use std::sync::Arc;

use crate::error::{Error, Result};

type EvalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub enum Smoothness {
    C0,
    C1,
    Holder { beta: f64, constant: f64 },
}

#[derive(Clone)]
pub struct TargetFunction {
    name: String,
    f: EvalFn,
    derivative: Option<EvalFn>,
    sup_bound: f64,
    smoothness: Smoothness,
    /// region on which the (global) modulus of continuity is attained
    modulus_region: (f64, f64),
}

impl std::fmt::Debug for TargetFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TargetFunction")
            .field("name", &self.name)
            .field("sup_bound", &self.sup_bound)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

impl TargetFunction {
    pub fn new(
        name: impl Into<String>,
        f: EvalFn,
        derivative: Option<EvalFn>,
        sup_bound: f64,
        smoothness: Smoothness,
        modulus_region: (f64, f64),
    ) -> Self {
        TargetFunction {
            name: name.into(),
            f,
            derivative,
            sup_bound,
            smoothness,
            modulus_region,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn derivative_at(&self, x: f64) -> Result<f64> {
        match &self.derivative {
            Some(d) => Ok(d(x)),
            None => Err(Error::InvalidArgument(format!(
                "function '{}' has no derivative evaluator",
                self.name
            ))),
        }
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    /// A target function whose evaluator is the derivative of this one.
    pub fn derivative_fn(&self) -> Result<TargetFunction> {
        let d = self.derivative.clone().ok_or_else(|| {
            Error::InvalidArgument(format!(
                "function '{}' has no derivative evaluator",
                self.name
            ))
        })?;
        Ok(TargetFunction {
            name: format!("{}'", self.name),
            f: d,
            derivative: None,
            sup_bound: f64::INFINITY,
            smoothness: Smoothness::C0,
            modulus_region: self.modulus_region,
        })
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn smoothness(&self) -> &Smoothness {
        &self.smoothness
    }

    pub fn modulus_region(&self) -> (f64, f64) {
        self.modulus_region
    }
}

/// `C¹` ramp that integrates a derivative tapering linearly from `d0` at the
/// core edge to zero at distance `t_ramp`, then stays constant.
fn taper(t: f64, d0: f64, t_ramp: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t < t_ramp {
        d0 * (t - t * t / (2.0 * t_ramp))
    } else {
        d0 * t_ramp / 2.0
    }
}

fn taper_slope(t: f64, d0: f64, t_ramp: f64) -> f64 {
    if t <= 0.0 || t >= t_ramp {
        0.0
    } else {
        d0 * (1.0 - t / t_ramp)
    }
}

pub fn constant(c: f64) -> TargetFunction {
    TargetFunction::new(
        format!("const:{c}"),
        Arc::new(move |_| c),
        Some(Arc::new(|_| 0.0)),
        c.abs(),
        Smoothness::C1,
        (-4.0, 4.0),
    )
}

/// Identity clamped to `[-cap, cap]`; the linear exact-reproduction identity
/// holds wherever the operator window stays inside the core.
pub fn clamped_identity(cap: f64) -> TargetFunction {
    TargetFunction::new(
        "identity",
        Arc::new(move |x: f64| x.clamp(-cap, cap)),
        Some(Arc::new(move |x: f64| if x.abs() < cap { 1.0 } else { 0.0 })),
        cap,
        Smoothness::C0,
        (-4.0, 4.0),
    )
}

/// `x²` on `[-X0, X0]` with a bounded `C¹` continuation.
pub fn windowed_quadratic() -> TargetFunction {
    const X0: f64 = 8.0;
    const T: f64 = 8.0;
    let f = move |x: f64| {
        let a = x.abs();
        if a <= X0 {
            x * x
        } else {
            X0 * X0 + taper(a - X0, 2.0 * X0, T)
        }
    };
    let df = move |x: f64| {
        let a = x.abs();
        let d = if a <= X0 {
            2.0 * a
        } else {
            taper_slope(a - X0, 2.0 * X0, T)
        };
        d * x.signum()
    };
    TargetFunction::new(
        "quadratic",
        Arc::new(f),
        Some(Arc::new(df)),
        // continuation plateau: X0^2 + taper(T) = X0^2 + X0*T
        X0 * X0 + X0 * T,
        Smoothness::C1,
        (-4.0, 4.0),
    )
}

pub fn sine() -> TargetFunction {
    TargetFunction::new(
        "sin",
        Arc::new(f64::sin),
        Some(Arc::new(f64::cos)),
        1.0,
        Smoothness::C1,
        (-4.0, 4.0),
    )
}

/// `x sin(3x)` on `[-X0, X0]` with a bounded `C¹` continuation (the function
/// is even, so the continuation is mirrored).
pub fn x_sin_3x() -> TargetFunction {
    const X0: f64 = 4.0;
    const T: f64 = 4.0;
    let core = |x: f64| x * (3.0 * x).sin();
    let dcore = |x: f64| (3.0 * x).sin() + 3.0 * x * (3.0 * x).cos();
    let edge = core(X0);
    let dedge = dcore(X0);
    let f = move |x: f64| {
        let a = x.abs();
        if a <= X0 {
            core(x)
        } else {
            edge + taper(a - X0, dedge, T)
        }
    };
    let df = move |x: f64| {
        let a = x.abs();
        let d = if a <= X0 {
            dcore(a)
        } else {
            taper_slope(a - X0, dedge, T)
        };
        d * x.signum()
    };
    // numeric sup certificate with headroom
    let mut sup = 0.0f64;
    for i in 0..=20_000 {
        let x = -(X0 + T) + 2.0 * (X0 + T) * i as f64 / 20_000.0;
        sup = sup.max(f(x).abs());
    }
    TargetFunction::new(
        "xsin3x",
        Arc::new(f),
        Some(Arc::new(df)),
        sup * 1.001,
        Smoothness::C1,
        (-(X0 + T), X0 + T),
    )
}

/// `|sin x|^β`, the Hölder-`β` test family (Hölder constant 1).
pub fn holder_sine(beta: f64) -> Result<TargetFunction> {
    if !(0.0 < beta && beta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "Hoelder exponent must lie in (0, 1), got {beta}"
        )));
    }
    Ok(TargetFunction::new(
        format!("holder:{beta}"),
        Arc::new(move |x: f64| x.sin().abs().powf(beta)),
        None,
        1.0,
        Smoothness::Holder {
            beta,
            constant: 1.0,
        },
        (-4.0, 4.0),
    ))
}

/// Parses builtin function names: `const:<c>`, `identity`, `quadratic`,
/// `sin`, `xsin3x`, `holder:<beta>`.
pub fn builtin(name: &str) -> Result<TargetFunction> {
    if let Some(rest) = name.strip_prefix("const:") {
        let c: f64 = rest
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad constant in '{name}'")))?;
        return Ok(constant(c));
    }
    if let Some(rest) = name.strip_prefix("holder:") {
        let b: f64 = rest
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad exponent in '{name}'")))?;
        return holder_sine(b);
    }
    match name {
        "identity" => Ok(clamped_identity(1000.0)),
        "quadratic" => Ok(windowed_quadratic()),
        "sin" => Ok(sine()),
        "xsin3x" => Ok(x_sin_3x()),
        _ => Err(Error::InvalidArgument(format!(
            "unknown builtin function '{name}'"
        ))),
    }
}
