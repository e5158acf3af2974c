//! Interval sequences `{a_k}, {b_k}` defining the averaging windows
//! `[(k+a_k)/w, (k+b_k)/w]`, together with the certified constants that enter
//! every error bound: `Δ*` (lower bound on the widths), `M*` (upper bound on
//! the endpoint magnitudes), and, when constant, `α = a_k + b_k`.

use std::ops::RangeInclusive;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serializable interval-family description (the CLI wire format).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntervalSpec {
    Constant {
        a: f64,
        b: f64,
    },
    /// Non-constant admissible family with `a_k + b_k = alpha` and
    /// pseudo-random widths in `[delta_star, 2 m_star − |alpha|]`.
    SymmetricAlpha {
        alpha: f64,
        delta_star: f64,
        m_star: f64,
        seed: u64,
    },
}

#[derive(Clone)]
enum Kind {
    Constant {
        a: f64,
        b: f64,
    },
    Seeded {
        alpha: f64,
        delta_star: f64,
        delta_max: f64,
        seed: u64,
    },
    /// Arbitrary generator; mostly useful for negative tests.
    Custom(Arc<dyn Fn(i64) -> (f64, f64) + Send + Sync>),
}

#[derive(Clone)]
pub struct IntervalSequence {
    spec: Option<IntervalSpec>,
    kind: Kind,
    alpha: Option<f64>,
    delta_star: f64,
    m_star: f64,
}

impl std::fmt::Debug for IntervalSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IntervalSequence")
            .field("describe", &self.describe())
            .finish()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub checked: i64,
    pub first_violation: Option<Violation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub k: i64,
    pub message: String,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic uniform variate in [0, 1) from (seed, k). Counter-based so
/// that `a_k` is random-access for arbitrary `k` without stored state.
fn unit_from(seed: u64, k: i64) -> f64 {
    let h = splitmix64(seed ^ splitmix64(k as u64));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

impl IntervalSequence {
    /// Classical Kantorovich case: `a_k = a`, `b_k = b` for all `k`.
    pub fn constant(a: f64, b: f64) -> Result<Self> {
        if !(b > a) {
            return Err(Error::InvalidIntervals(format!(
                "requires b > a, got a = {a}, b = {b}"
            )));
        }
        Ok(IntervalSequence {
            spec: Some(IntervalSpec::Constant { a, b }),
            kind: Kind::Constant { a, b },
            alpha: Some(a + b),
            delta_star: b - a,
            m_star: a.abs().max(b.abs()),
        })
    }

    /// Non-constant family with constant endpoint sum `alpha`: per index,
    /// `Δ_k` is drawn deterministically from `[delta_star, 2 m_star − |alpha|]`
    /// and `a_k = (alpha − Δ_k)/2`, `b_k = (alpha + Δ_k)/2`.
    pub fn seeded_alpha(alpha: f64, delta_star: f64, m_star: f64, seed: u64) -> Result<Self> {
        if delta_star <= 0.0 {
            return Err(Error::InvalidIntervals("delta_star must be positive".into()));
        }
        let delta_max = 2.0 * m_star - alpha.abs();
        if delta_max < delta_star {
            return Err(Error::InvalidIntervals(format!(
                "infeasible constraints: need delta_star <= 2 m_star - |alpha| \
                 (delta_star = {delta_star}, bound = {delta_max})"
            )));
        }
        Ok(IntervalSequence {
            spec: Some(IntervalSpec::SymmetricAlpha {
                alpha,
                delta_star,
                m_star,
                seed,
            }),
            kind: Kind::Seeded {
                alpha,
                delta_star,
                delta_max,
                seed,
            },
            alpha: Some(alpha),
            delta_star,
            m_star,
        })
    }

    /// Hand-built generator with caller-declared constants. The declared
    /// constants are trusted; `validate` exists to check them.
    pub fn custom(
        generator: Arc<dyn Fn(i64) -> (f64, f64) + Send + Sync>,
        delta_star: f64,
        m_star: f64,
        alpha: Option<f64>,
    ) -> Self {
        IntervalSequence {
            spec: None,
            kind: Kind::Custom(generator),
            alpha,
            delta_star,
            m_star,
        }
    }

    pub fn from_spec(spec: &IntervalSpec) -> Result<Self> {
        match *spec {
            IntervalSpec::Constant { a, b } => IntervalSequence::constant(a, b),
            IntervalSpec::SymmetricAlpha {
                alpha,
                delta_star,
                m_star,
                seed,
            } => IntervalSequence::seeded_alpha(alpha, delta_star, m_star, seed),
        }
    }

    pub fn endpoints(&self, k: i64) -> (f64, f64) {
        match &self.kind {
            Kind::Constant { a, b } => (*a, *b),
            Kind::Seeded {
                alpha,
                delta_star,
                delta_max,
                seed,
            } => {
                let d = delta_star + (delta_max - delta_star) * unit_from(*seed, k);
                ((alpha - d) / 2.0, (alpha + d) / 2.0)
            }
            Kind::Custom(f) => f(k),
        }
    }

    pub fn width(&self, k: i64) -> f64 {
        let (a, b) = self.endpoints(k);
        b - a
    }

    /// The constant value of `a_k + b_k`, when the family has one.
    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn delta_star(&self) -> f64 {
        self.delta_star
    }

    pub fn m_star(&self) -> f64 {
        self.m_star
    }

    pub fn spec(&self) -> Option<&IntervalSpec> {
        self.spec.as_ref()
    }

    pub fn describe(&self) -> String {
        match &self.spec {
            Some(IntervalSpec::Constant { a, b }) => format!("constant({a},{b})"),
            Some(IntervalSpec::SymmetricAlpha {
                alpha,
                delta_star,
                m_star,
                seed,
            }) => format!("symmetric_alpha({alpha},{delta_star},{m_star},seed={seed})"),
            None => "custom".into(),
        }
    }

    /// Checks the three invariants (width, boundedness, constant sum) over a
    /// range of indices. Violations are report content, not errors.
    pub fn validate(&self, k_range: RangeInclusive<i64>) -> ValidationReport {
        const TOL: f64 = 1e-12;
        let mut checked = 0;
        for k in k_range {
            checked += 1;
            let (a, b) = self.endpoints(k);
            if b - a < self.delta_star - TOL {
                return ValidationReport {
                    ok: false,
                    checked,
                    first_violation: Some(Violation {
                        k,
                        message: format!("width {} below delta_star {}", b - a, self.delta_star),
                    }),
                };
            }
            if a.abs() > self.m_star + TOL || b.abs() > self.m_star + TOL {
                return ValidationReport {
                    ok: false,
                    checked,
                    first_violation: Some(Violation {
                        k,
                        message: format!("endpoint ({a}, {b}) exceeds m_star {}", self.m_star),
                    }),
                };
            }
            if let Some(alpha) = self.alpha {
                if (a + b - alpha).abs() > TOL {
                    return ValidationReport {
                        ok: false,
                        checked,
                        first_violation: Some(Violation {
                            k,
                            message: format!("a_k + b_k = {} differs from alpha {alpha}", a + b),
                        }),
                    };
                }
            }
        }
        ValidationReport {
            ok: true,
            checked,
            first_violation: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_case() {
        let s = IntervalSequence::constant(0.0, 1.0).unwrap();
        assert_eq!(s.alpha(), Some(1.0));
        assert_eq!(s.delta_star(), 1.0);
        assert_eq!(s.m_star(), 1.0);
        assert_eq!(s.endpoints(17), (0.0, 1.0));

        let s = IntervalSequence::constant(-0.5, 0.5).unwrap();
        assert_eq!(s.alpha(), Some(0.0));
        assert_eq!(s.delta_star(), 1.0);
        assert_eq!(s.m_star(), 0.5);

        assert!(IntervalSequence::constant(0.0, 0.0).is_err());
        assert!(IntervalSequence::constant(1.0, 0.5).is_err());
    }

    #[test]
    fn seeded_family_invariants() {
        let s = IntervalSequence::seeded_alpha(1.0, 0.5, 2.0, 42).unwrap();
        for k in -1000..=1000 {
            let (a, b) = s.endpoints(k);
            assert!((a + b - 1.0).abs() < 1e-12, "k={k}");
            assert!(b - a >= 0.5 - 1e-12);
            assert!(b - a <= 3.0 + 1e-12);
            assert!(a.abs() <= 2.0 && b.abs() <= 2.0);
        }
        assert!(s.validate(-1000..=1000).ok);
    }

    #[test]
    fn seeded_family_is_deterministic() {
        let s1 = IntervalSequence::seeded_alpha(1.0, 0.5, 2.0, 42).unwrap();
        let s2 = IntervalSequence::seeded_alpha(1.0, 0.5, 2.0, 42).unwrap();
        for k in [-57, 0, 3, 1_000_000] {
            assert_eq!(s1.endpoints(k), s2.endpoints(k));
        }
        let s3 = IntervalSequence::seeded_alpha(1.0, 0.5, 2.0, 43).unwrap();
        assert_ne!(s1.endpoints(0), s3.endpoints(0));
    }

    #[test]
    fn infeasible_constraints_rejected() {
        // needs b >= 1.5 > m_star
        assert!(IntervalSequence::seeded_alpha(0.0, 3.0, 1.0, 1).is_err());
        assert!(IntervalSequence::seeded_alpha(1.0, 0.0, 2.0, 1).is_err());
    }

    #[test]
    fn validate_catches_degenerate_width() {
        let gen = Arc::new(|k: i64| if k == 5 { (0.3, 0.3) } else { (0.0, 1.0) });
        let s = IntervalSequence::custom(gen, 0.5, 1.0, None);
        let report = s.validate(-10..=10);
        assert!(!report.ok);
        assert_eq!(report.first_violation.unwrap().k, 5);
    }

    #[test]
    fn midpoint_identity_for_constant_alpha() {
        let s = IntervalSequence::seeded_alpha(1.0, 0.25, 3.0, 7).unwrap();
        for k in -50..=50 {
            let (a, b) = s.endpoints(k);
            assert!(((a + b) / 2.0 - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn interval_spec_json() {
        let js = r#"{"kind":"symmetric_alpha","alpha":1,"delta_star":0.5,"m_star":2,"seed":42}"#;
        let spec: IntervalSpec = serde_json::from_str(js).unwrap();
        let s = IntervalSequence::from_spec(&spec).unwrap();
        assert_eq!(s.alpha(), Some(1.0));
    }
}
