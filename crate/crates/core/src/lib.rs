//! Kantorovich-type sampling operators with admissible kernels and
//! convergence experiments.
//!
//! The central object is the series
//!
//! ```text
//! K_w f(x) = Σ_k (w / Δ_k) φ(wx − k) ∫_{(k+a_k)/w}^{(k+b_k)/w} f(u) du
//! ```
//!
//! where `φ` is a kernel satisfying a partition-of-unity condition, a
//! vanishing first moment, and a finite second absolute moment, and
//! `{a_k}, {b_k}` are bounded interval sequences with widths
//! `Δ_k = b_k − a_k > 0`. The crate provides:
//!
//! * [`kernel`] — B-spline kernels, two-translate spline combinations, the
//!   Blackman–Harris kernel, and numeric admissibility certification;
//! * [`moments`] — algebraic, absolute, and fractional kernel moments with
//!   certified series truncation;
//! * [`intervals`] — constant and seeded interval families with the derived
//!   constants `α`, `Δ*`, `M*`;
//! * [`operator`] — evaluation of `K_w f` and the classical sampling series
//!   `T_w f`, from closed-form targets or from measured averaged samples;
//! * [`analysis`] — Voronovskaya residuals, quantitative error bounds using
//!   the least concave majorant of the modulus of continuity, and empirical
//!   convergence-rate fitting.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod functions;
pub mod grid;
pub mod intervals;
pub mod kernel;
pub mod moments;
pub mod operator;
pub mod quadrature;

pub use error::{Error, Result};
