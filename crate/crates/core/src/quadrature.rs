//! Adaptive Gauss–Kronrod quadrature (7/15-point pair) with global
//! bisection of the worst interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances shared by every quadrature in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Improper integrals are truncated where the integrand's analytic
    /// envelope falls below this value.
    pub tail_epsilon: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            tail_epsilon: 1e-12,
            max_subdivisions: 1 << 20,
        }
    }
}

impl QuadratureSettings {
    pub fn new(abs_tol: f64, rel_tol: f64, tail_epsilon: f64, max_subdivisions: usize) -> Result<Self> {
        let s = Self { abs_tol, rel_tol, tail_epsilon, max_subdivisions };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol > 0.0
            && self.tail_epsilon > 0.0
            && self.max_subdivisions >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("quadrature settings {self:?}")))
        }
    }

    /// Settings with both tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol / factor,
            rel_tol: self.rel_tol / factor,
            ..*self
        }
    }

    /// Smallest `T` with `scale * exp(-rate * T) < tail_epsilon`.
    pub fn truncation_point(&self, scale: f64, rate: f64) -> f64 {
        if scale <= self.tail_epsilon {
            return 0.0;
        }
        (scale / self.tail_epsilon).ln() / rate
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = hl * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * hl, ((kron - gauss) * hl).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integral of `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, q: &QuadratureSettings) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, q).map(|v| -v);
    }
    let (value, err) = gk15(&f, a, b);
    if !value.is_finite() {
        return Err(Error::Numerical(format!("non-finite integrand on [{a}, {b}]")));
    }
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value, err });
    let mut total = value;
    let mut total_err = err;
    let mut splits = 0usize;
    while total_err > q.abs_tol.max(q.rel_tol * total.abs()) {
        if splits >= q.max_subdivisions {
            return Err(Error::Numerical(format!(
                "quadrature on [{a}, {b}] did not converge (err {total_err:e})"
            )));
        }
        let worst = heap.pop().expect("heap holds at least one interval");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision; accept it
            heap.push(Piece { err: 0.0, ..worst });
            total_err = heap.iter().map(|p| p.err).sum();
            if heap.iter().all(|p| p.err == 0.0) {
                break;
            }
            continue;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Piece { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, err: e2 });
        splits += 1;
        if splits.is_multiple_of(64) {
            // resum to keep the running totals free of drift
            total = heap.iter().map(|p| p.value).sum();
            total_err = heap.iter().map(|p| p.err).sum();
        }
    }
    Ok(heap.iter().map(|p| p.value).sum())
}

/// Integral of `f` over `[a, ∞)` for an integrand bounded by
/// `scale · exp(-rate · t)`; truncated where the envelope's remaining mass
/// drops below `tail_epsilon`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    scale: f64,
    rate: f64,
    q: &QuadratureSettings,
) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::Truncation(format!("envelope rate {rate} is not positive")));
    }
    let end = a.max(0.0) + q.truncation_point(scale / rate, rate).max(0.0);
    integrate_breaks(&f, &[a, end], q)
}

/// Integral over consecutive breakpoints `[p0, p1], [p1, p2], ...`.
pub fn integrate_breaks<F: Fn(f64) -> f64>(f: &F, points: &[f64], q: &QuadratureSettings) -> Result<f64> {
    let mut total = 0.0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            total += integrate(f, w[0], w[1], q)?;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_exact() {
        let q = QuadratureSettings::default();
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, &q).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn kink_is_resolved_adaptively() {
        let q = QuadratureSettings::default();
        let v = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &q).unwrap();
        assert_abs_diff_eq!(v, 0.045 + 0.245, epsilon = 1e-9);
    }

    #[test]
    fn exponential_tail() {
        let q = QuadratureSettings::default();
        let v = integrate_to_infinity(|t: f64| (-2.0 * t).exp(), 0.0, 1.0, 2.0, &q).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-11);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let q = QuadratureSettings::default();
        let v = integrate(|x: f64| x, 1.0, 0.0, &q).unwrap();
        assert_abs_diff_eq!(v, -0.5, epsilon = 1e-14);
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(QuadratureSettings::new(0.0, 1e-9, 1e-12, 10).is_err());
        assert!(QuadratureSettings::new(1e-9, 1e-9, 1e-12, 0).is_err());
    }

    #[test]
    fn subdivision_cap_reports_failure() {
        let q = QuadratureSettings { max_subdivisions: 1, abs_tol: 1e-15, rel_tol: 1e-15, ..Default::default() };
        let r = integrate(|x: f64| x.sqrt().sin() / (x + 1e-9).sqrt(), 0.0, 50.0, &q);
        assert!(matches!(r, Err(Error::Numerical(_))));
    }
}
