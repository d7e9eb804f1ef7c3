//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export has a plain Rust counterpart returning `Result<_, String>` so
//! the numerics are testable natively.

use ruin_core::{ClaimDistribution, GridSpec, PerturbedModel, QuadratureSettings, RiskModel};
use wasm_bindgen::prelude::*;

/// Coarser than the CLI default; keeps the page responsive.
const STEP: f64 = 1.0 / 256.0;

fn claims(weights: &[f64], rates: &[f64]) -> ruin_core::Result<ClaimDistribution> {
    match (weights, rates) {
        ([_], [rate]) => ClaimDistribution::exponential(*rate),
        _ => ClaimDistribution::hyper_exponential(weights, rates),
    }
}

fn sample(points: usize, u_max: f64) -> impl Iterator<Item = f64> {
    let n = points.max(2);
    (0..n).map(move |i| u_max * i as f64 / (n - 1) as f64)
}

/// `ψ(u)` at `points` equally spaced `u` in `[0, u_max]`.
pub fn ruin_curve_values(
    lambda: f64,
    c: f64,
    weights: &[f64],
    rates: &[f64],
    u_max: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    let run = || -> ruin_core::Result<Vec<f64>> {
        let m = RiskModel::new(lambda, c, claims(weights, rates)?)?;
        let psi = m.ruin_probability(&GridSpec::with_step(STEP))?;
        Ok(sample(points, u_max).map(|u| psi.at(u)).collect())
    };
    run().map_err(|e| e.to_string())
}

/// Iterates `K̄_0 = k0, …, K̄_n` for exponential claims perturbed by
/// diffusion, followed by the fixed point; `(n + 2) · points` values, row by row.
#[allow(clippy::too_many_arguments)]
pub fn k_iterate_values(
    lambda: f64,
    c: f64,
    rate: f64,
    diffusion: f64,
    k0: f64,
    n: usize,
    u_max: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    let run = || -> ruin_core::Result<Vec<f64>> {
        let base = RiskModel::new(lambda, c, ClaimDistribution::exponential(rate)?)?;
        let pm = PerturbedModel::new(base, diffusion)?;
        let grid = GridSpec::with_step(STEP);
        let grid = GridSpec::new(STEP, Some(pm.u_max(&grid)?.max(u_max)));
        let trace = pm.k_iterates(k0, n, &grid)?;
        let fixed = pm.k_tail(&grid)?;
        Ok(trace
            .iterates
            .iter()
            .chain(std::iter::once(&fixed))
            .flat_map(|g| sample(points, u_max).map(move |u| g.at(u)))
            .collect())
    };
    run().map_err(|e| e.to_string())
}

/// DK3 for an exponential first model against a two-phase mixture:
/// `[value, oscillation_law, diffusion, claim_law, claim_mean, intensity]`.
#[allow(clippy::too_many_arguments)]
pub fn dk3_values(
    lambda: f64,
    c: f64,
    rate: f64,
    diffusion: f64,
    weights: &[f64],
    rates: &[f64],
    diffusion_tilde: f64,
) -> Result<Vec<f64>, String> {
    let run = || -> ruin_core::Result<Vec<f64>> {
        let pm = PerturbedModel::new(RiskModel::new(lambda, c, ClaimDistribution::exponential(rate)?)?, diffusion)?;
        let pmt = PerturbedModel::new(RiskModel::new(lambda, c, claims(weights, rates)?)?, diffusion_tilde)?;
        let r = ruin_core::dk3(&pm, &pmt, &QuadratureSettings::default())?;
        Ok(std::iter::once(r.value).chain(r.components.iter().map(|(_, v)| *v)).collect())
    };
    run().map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn ruin_curve(lambda: f64, c: f64, weights: &[f64], rates: &[f64], u_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    ruin_curve_values(lambda, c, weights, rates, u_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn k_iterates(
    lambda: f64,
    c: f64,
    rate: f64,
    diffusion: f64,
    k0: f64,
    n: usize,
    u_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    k_iterate_values(lambda, c, rate, diffusion, k0, n, u_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn dk3_bound(
    lambda: f64,
    c: f64,
    rate: f64,
    diffusion: f64,
    weights: &[f64],
    rates: &[f64],
    diffusion_tilde: f64,
) -> Result<Vec<f64>, JsError> {
    dk3_values(lambda, c, rate, diffusion, weights, rates, diffusion_tilde).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ruin_curve_starts_at_modulus() {
        let v = ruin_curve_values(0.5, 3.0, &[0.5, 0.5], &[1.25, 5.0 / 6.0], 10.0, 11).unwrap();
        assert_eq!(v.len(), 11);
        assert!((v[0] - 0.5 * 1.0 / 3.0 * (0.4 + 0.6)).abs() < 1e-12);
        assert!(v.windows(2).all(|w| w[1] <= w[0]));
        assert!(ruin_curve_values(2.0, 1.0, &[1.0], &[1.0], 1.0, 3).unwrap_err().contains("net profit"));
    }

    #[test]
    fn iterates_approach_fixed_point() {
        let v = k_iterate_values(0.5, 0.5, 2.0, 0.25, 0.0, 5, 4.0, 5).unwrap();
        assert_eq!(v.len(), 7 * 5);
        // u = 1 column: fifth iterate within 1e-5 of the fixed point
        assert!((v[5 * 5 + 1] - v[6 * 5 + 1]).abs() < 1e-5);
        assert!((v[6 * 5 + 1] - 0.3325717).abs() < 1e-5);
    }

    #[test]
    fn dk3_row() {
        let v = dk3_values(0.6, 1.0, 3.0, 2.0, &[0.5, 0.5], &[2.0, 6.0], 1.0).unwrap();
        assert!((v[0] - 0.2837).abs() < 1e-4);
        assert!((v[0] - v[1..].iter().sum::<f64>() / (1.0 - 0.2)).abs() < 1e-12);
        assert!(dk3_values(0.6, 1.0, 3.0, 0.1, &[0.5, 0.5], &[2.0, 6.0], 1.0).unwrap_err().contains("D ≥ D̃"));
    }
}
