//! Centered cardinal B-splines as exact piecewise polynomials.
//!
//! `B_h` is the h-fold convolution of the indicator of `[-1/2, 1/2]`. The
//! convolution recursion `B_h = B_{h-1} ⋆ B_1` is carried out symbolically on
//! the polynomial segments, so evaluation is a single Horner pass with exact
//! (up to f64 rounding) coefficients.

/// B-spline of order `h ≥ 1`, supported on `[-h/2, h/2]`, nonnegative, even,
/// and integrating to 1. Segment `j` covers `[lo + j, lo + j + 1]` and stores
/// coefficients in the local variable `t = x - (lo + j) ∈ [0, 1]`.
#[derive(Debug, Clone)]
pub struct BSpline {
    h: u32,
    lo: f64,
    segments: Vec<Vec<f64>>,
}

impl BSpline {
    pub fn new(h: u32) -> Self {
        assert!(h >= 1, "B-spline order must be at least 1");
        // B_1 is the indicator of [-1/2, 1/2]: one constant segment.
        let mut segments = vec![vec![1.0]];
        for _ in 2..=h {
            segments = convolve_with_indicator(&segments);
        }
        BSpline {
            h,
            lo: -(f64::from(h)) / 2.0,
            segments,
        }
    }

    pub fn order(&self) -> u32 {
        self.h
    }

    /// Support interval `[-h/2, h/2]`.
    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.lo + self.segments.len() as f64)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.segments.len();
        let s = x - self.lo;
        // right-open support: keeps B_1 a true partition of unity at the
        // knots and avoids rounding residue at the right edge (h >= 2 is
        // continuous, so the convention is invisible there)
        if s < 0.0 || s >= n as f64 {
            return 0.0;
        }
        let j = s.floor() as usize;
        let t = s - j as f64;
        horner(&self.segments[j], t)
    }
}

/// One convolution step with the unit indicator: if `A` is the running
/// antiderivative of the input spline, the result's segment `j` is
/// `A_j(t) - A_{j-1}(t)` on the shifted knot grid.
fn convolve_with_indicator(segments: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = segments.len();
    let mut anti = Vec::with_capacity(n);
    let mut carry = 0.0;
    for seg in segments {
        let mut a = integrate(seg);
        a[0] = carry;
        carry = horner(&a, 1.0);
        anti.push(a);
    }
    let total = carry; // mass of the spline, always 1
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let upper = if j < n { anti[j].clone() } else { vec![total] };
        let lower = if j == 0 {
            Vec::new()
        } else {
            anti[j - 1].clone()
        };
        out.push(poly_sub(&upper, &lower));
    }
    out
}

fn integrate(coeffs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(coeffs.len() + 1);
    out.push(0.0);
    for (i, c) in coeffs.iter().enumerate() {
        out.push(c / (i as f64 + 1.0));
    }
    out
}

fn poly_sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] -= c;
    }
    out
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}
