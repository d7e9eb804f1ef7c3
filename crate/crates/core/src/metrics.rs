//! Probability metrics: the weighted L1 distance `ν_γ`, the Kantorovich
//! metric, its tail-truncated version `Q_y`, and the uniform distance.
//!
//! Distances between parametric laws integrate `|F̄ - G̃|` piecewise between
//! the crossings of the two tails, so the kink of the absolute value never
//! falls inside a quadrature panel.

use crate::distributions::ClaimDistribution;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::quadrature::{integrate_breaks, QuadratureSettings};

/// Number of scan cells used to bracket sign changes of a tail difference.
const CROSSING_SCAN: usize = 8192;
const CROSSING_TOL: f64 = 1e-12;

/// Distance between grid functions together with a discretization/truncation
/// uncertainty estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridDistance {
    pub value: f64,
    /// Location of the maximum (sup distance) or `NaN` for integral distances.
    pub argmax: f64,
    pub uncertainty: f64,
}

/// Bisection for a sign change of `f` on `[a, b]`.
pub fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Sign changes of `f` on `(0, end]`, bracketed on a uniform scan and refined by bisection.
pub fn sign_changes(f: &dyn Fn(f64) -> f64, end: f64) -> Vec<f64> {
    let dt = end / CROSSING_SCAN as f64;
    let mut roots = Vec::new();
    // both tails equal 1 at the origin; start the scan just inside
    let mut prev_t = dt * 1e-6;
    let mut prev = f(prev_t);
    for i in 1..=CROSSING_SCAN {
        let t = i as f64 * dt;
        let v = f(t);
        if v == 0.0 {
            continue;
        }
        if prev != 0.0 && (v > 0.0) != (prev > 0.0) {
            roots.push(bisect(f, prev_t, t, CROSSING_TOL));
        }
        prev = v;
        prev_t = t;
    }
    roots
}

/// Points in `(0, ∞)` where the tails of `a` and `b` cross.
pub fn tail_crossings(a: &ClaimDistribution, b: &ClaimDistribution, q: &QuadratureSettings) -> Result<Vec<f64>> {
    let end = a.truncation_point(0.0, q.tail_epsilon)?.max(b.truncation_point(0.0, q.tail_epsilon)?);
    let diff = |t: f64| a.tail(t) - b.tail(t);
    Ok(sign_changes(&diff, end))
}

fn merged_breakpoints(
    a: &ClaimDistribution,
    b: &ClaimDistribution,
    gamma: f64,
    from: f64,
    q: &QuadratureSettings,
) -> Result<Vec<f64>> {
    let mut pts = a.breakpoints(gamma, q.tail_epsilon)?;
    pts.extend(b.breakpoints(gamma, q.tail_epsilon)?);
    pts.extend(tail_crossings(a, b, q)?);
    pts.push(from);
    pts.retain(|p| *p >= from);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    Ok(pts)
}

/// `ν_γ(F, G) = ∫_0^∞ (1+t)^γ |F̄(t) - Ḡ(t)| dt`.
pub fn nu_gamma(a: &ClaimDistribution, b: &ClaimDistribution, gamma: f64, q: &QuadratureSettings) -> Result<f64> {
    weighted_tail_distance(a, b, gamma, 0.0, q)
}

/// Kantorovich distance `∫ |F - G|`.
pub fn kantorovich(a: &ClaimDistribution, b: &ClaimDistribution, q: &QuadratureSettings) -> Result<f64> {
    nu_gamma(a, b, 0.0, q)
}

/// `Q_y(F, G) = ∫_y^∞ |F̄ - Ḡ|`.
pub fn q_y(a: &ClaimDistribution, b: &ClaimDistribution, y: f64, q: &QuadratureSettings) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::InvalidParameter(format!("y must be >= 0, got {y}")));
    }
    weighted_tail_distance(a, b, 0.0, y, q)
}

fn weighted_tail_distance(
    a: &ClaimDistribution,
    b: &ClaimDistribution,
    gamma: f64,
    from: f64,
    q: &QuadratureSettings,
) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
    }
    if a == b {
        return Ok(0.0);
    }
    let pts = merged_breakpoints(a, b, gamma, from, q)?;
    let f = |t: f64| (1.0 + t).powf(gamma) * (a.tail(t) - b.tail(t)).abs();
    integrate_breaks(&f, &pts, q)
}

/// Signed tail integral `∫_y^∞ (F̄ - Ḡ)`.
pub fn signed_tail_difference(a: &ClaimDistribution, b: &ClaimDistribution, y: f64) -> f64 {
    a.integrated_tail(y) - b.integrated_tail(y)
}

/// `ν_γ` between two grid functions. Each cell is integrated as a linear
/// interpolant split at its zero crossing; the part beyond the shorter grid is
/// covered by the envelopes and reported as uncertainty.
pub fn nu_gamma_grid(x: &GridFunction, y: &GridFunction, gamma: f64) -> Result<GridDistance> {
    x.check_compatible(y)?;
    let h = x.step();
    let n = x.len().min(y.len());
    let xs = x.values();
    let ys = y.values();
    let w = |t: f64| (1.0 + t).powf(gamma);
    let mut total = 0.0;
    for i in 0..n - 1 {
        let t0 = i as f64 * h;
        let t1 = t0 + h;
        let d0 = xs[i] - ys[i];
        let d1 = xs[i + 1] - ys[i + 1];
        if d0 * d1 < 0.0 {
            let tc = t0 + h * d0.abs() / (d0.abs() + d1.abs());
            total += 0.5 * (tc - t0) * w(t0) * d0.abs() + 0.5 * (t1 - tc) * w(t1) * d1.abs();
        } else {
            total += 0.5 * h * (w(t0) * d0.abs() + w(t1) * d1.abs());
        }
    }
    let end = (n - 1) as f64 * h;
    let mut uncertainty = 0.0;
    for g in [x, y] {
        uncertainty += if g.len() > n {
            // longer grid: its own values carry the remaining mass exactly
            let tail = g.values()[n - 1..].iter().map(|v| v.abs());
            let extra: f64 = tail.clone().sum::<f64>() * h;
            extra * w(g.end())
        } else {
            match g.envelope() {
                Some(e) => e.weighted_mass_from(end, gamma),
                None => 0.0,
            }
        };
    }
    Ok(GridDistance { value: total, argmax: f64::NAN, uncertainty })
}

/// Uniform distance `max |x - y|` over the common grid. The uncertainty adds
/// `h · max|slope|` of the difference and the envelope bound past the end.
pub fn sup_distance(x: &GridFunction, y: &GridFunction) -> Result<GridDistance> {
    x.check_compatible(y)?;
    let h = x.step();
    let n = x.len().min(y.len());
    let (xs, ys) = (x.values(), y.values());
    let mut best = 0.0;
    let mut arg = 0.0;
    let mut slope: f64 = 0.0;
    for i in 0..n {
        let d = (xs[i] - ys[i]).abs();
        if d > best {
            best = d;
            arg = i as f64 * h;
        }
        if i + 1 < n {
            slope = slope.max(((xs[i + 1] - ys[i + 1]) - (xs[i] - ys[i])).abs() / h);
        }
    }
    let end = (n - 1) as f64 * h;
    let beyond: f64 = [x, y]
        .iter()
        .map(|g| g.envelope().map(|e| e.at(end)).unwrap_or(0.0))
        .sum();
    Ok(GridDistance { value: best, argmax: arg, uncertainty: h * slope + (beyond - best).max(0.0) })
}
