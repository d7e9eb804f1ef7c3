//! The classical compound Poisson risk model: ruin probability, its weighted
//! moments and the deficit-at-ruin tail.

use rayon::prelude::*;

use crate::distributions::ClaimDistribution;
use crate::error::{Error, Result};
use crate::grid::{Envelope, GridFunction};
use crate::metrics::bisect;
use crate::renewal::{envelope_u_max, RenewalProblem, DEFAULT_STEP};

/// Uniform grid `0, step, ..., u_max`; `u_max = None` picks the smallest
/// domain on which the analytic envelope of the solution is below 1e-9.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub step: f64,
    pub u_max: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { step: DEFAULT_STEP, u_max: None }
    }
}

impl GridSpec {
    pub fn new(step: f64, u_max: Option<f64>) -> Self {
        Self { step, u_max }
    }

    pub fn with_step(step: f64) -> Self {
        Self { step, u_max: None }
    }
}

/// `(λ, c, F)` with the net profit condition `λμ/c < 1` enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskModel {
    lambda: f64,
    premium: f64,
    claims: ClaimDistribution,
    mean: f64,
}

impl RiskModel {
    pub fn new(lambda: f64, premium: f64, claims: ClaimDistribution) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        if !(premium > 0.0 && premium.is_finite()) {
            return Err(Error::InvalidParameter(format!("premium rate must be positive, got {premium}")));
        }
        let mean = claims.mean()?;
        let modulus = lambda * mean / premium;
        if modulus >= 1.0 {
            return Err(Error::NetProfit { modulus });
        }
        Ok(Self { lambda, premium, claims, mean })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn premium(&self) -> f64 {
        self.premium
    }

    pub fn claims(&self) -> &ClaimDistribution {
        &self.claims
    }

    pub fn mean_claim(&self) -> f64 {
        self.mean
    }

    /// `φ = λμ/c`.
    pub fn modulus(&self) -> f64 {
        self.lambda * self.mean / self.premium
    }

    /// Relative security loading `θ = c/(λμ) - 1`.
    pub fn loading(&self) -> f64 {
        self.premium / (self.lambda * self.mean) - 1.0
    }

    pub fn equilibrium(&self) -> Result<ClaimDistribution> {
        self.claims.equilibrium()
    }

    /// Lundberg exponent `R`: root of `φ E e^{R X_e} = 1` below the slowest
    /// claim rate. `None` for tabulated claims.
    pub fn adjustment_coefficient(&self) -> Option<f64> {
        let eq = self.claims.equilibrium().ok()?;
        let r_max = eq.slowest_rate()?;
        let phi = self.modulus();
        let f = |r: f64| phi * eq.mgf(r).unwrap_or(f64::INFINITY) - 1.0;
        Some(lundberg_root(&f, r_max))
    }

    /// Domain end for `grid` (explicit or from the Lundberg envelope).
    pub fn u_max(&self, grid: &GridSpec) -> Result<f64> {
        if let Some(u) = grid.u_max {
            return Ok(u);
        }
        match self.adjustment_coefficient() {
            Some(r) => Ok(envelope_u_max(self.modulus(), r)),
            None => Err(Error::InvalidParameter("tabulated claims need an explicit u_max".into())),
        }
    }

    /// Renewal problem for `Ḡ(·, y)`; `y = 0` gives the ruin probability.
    /// Kernel `F̄/μ`, forcing `(λ/c) ∫_{u+y}^∞ F̄`.
    pub fn deficit_problem(&self, y: f64, grid: &GridSpec) -> Result<RenewalProblem> {
        if !(y >= 0.0) {
            return Err(Error::InvalidParameter(format!("y must be >= 0, got {y}")));
        }
        let u_max = self.u_max(grid)?;
        let ratio = self.lambda / self.premium;
        let mu = self.mean;
        RenewalProblem::from_fns(
            self.modulus(),
            grid.step,
            u_max,
            |u| ratio * self.claims.integrated_tail(u + y),
            |t| self.claims.tail(t) / mu,
        )
    }

    fn envelope(&self) -> Option<Envelope> {
        self.adjustment_coefficient().map(|r| Envelope { scale: 1.0, rate: r })
    }

    fn finish(&self, g: GridFunction) -> Result<GridFunction> {
        let g = g.into_tail(1e-9)?;
        Ok(match self.envelope() {
            Some(e) => g.with_envelope(e),
            None => g,
        })
    }

    /// Grid solution of `ψ = (λ/c)(∫_u^∞ F̄ + ∫_0^u ψ(u-t) F̄(t) dt)`.
    pub fn ruin_probability(&self, grid: &GridSpec) -> Result<GridFunction> {
        self.finish(self.deficit_problem(0.0, grid)?.solve()?)
    }

    /// `φ e^{-β(1-φ)u}` for exponential claims.
    pub fn exact_ruin_exponential(&self, u: f64) -> Result<f64> {
        match self.claims {
            ClaimDistribution::Exponential { rate } => {
                let phi = self.modulus();
                Ok(phi * (-rate * (1.0 - phi) * u).exp())
            }
            _ => Err(Error::WrongVariant { expected: "Exponential claims" }),
        }
    }

    /// `E L = E X² / (2θμ)`, the mean maximal aggregate loss.
    pub fn mean_maximal_loss(&self) -> Result<f64> {
        Ok(self.claims.raw_moment(2)? / (2.0 * self.loading() * self.mean))
    }

    /// Raw moments `E L^k`, `k = 0..=order`, from the compound geometric
    /// recursion `(1-φ) E L^k = φ Σ_{j=1}^k C(k,j) E X_e^j E L^{k-j}`.
    pub fn maximal_loss_moments(&self, order: u32) -> Result<Vec<f64>> {
        let phi = self.modulus();
        let xe: Vec<f64> = (0..=order)
            .map(|j| Ok(self.claims.raw_moment(j + 1)? / ((j + 1) as f64 * self.mean)))
            .collect::<Result<_>>()?;
        let mut l = vec![1.0];
        for k in 1..=order {
            let mut s = 0.0;
            let mut binom = 1.0;
            for j in 1..=k {
                binom = binom * (k - j + 1) as f64 / j as f64;
                s += binom * xe[j as usize] * l[(k - j) as usize];
            }
            l.push(phi * s / (1.0 - phi));
        }
        Ok(l)
    }

    /// Closed form `M^L_γ = E[((1+L)^{γ+1} - 1)/(γ+1)]` for integer `γ`.
    pub fn weighted_psi_moment_exact(&self, gamma: u32) -> Result<f64> {
        let moments = self.maximal_loss_moments(gamma + 1)?;
        let p = gamma + 1;
        let mut binom = 1.0;
        let mut s = 0.0;
        for k in 1..=p {
            binom = binom * (p - k + 1) as f64 / k as f64;
            s += binom * moments[k as usize];
        }
        Ok(s / p as f64)
    }

    /// `M^L_γ = ∫_0^∞ (1+z)^γ ψ(z) dz` from the solver grid plus the
    /// Lundberg-envelope remainder past the grid end.
    pub fn weighted_psi_moment(&self, gamma: f64, grid: &GridSpec) -> Result<f64> {
        let psi = self.ruin_probability(grid)?;
        weighted_grid_moment(&psi, gamma)
    }

    /// `Ḡ(·, y)` on the grid.
    pub fn deficit_tail(&self, y: f64, grid: &GridSpec) -> Result<GridFunction> {
        self.finish(self.deficit_problem(y, grid)?.solve()?)
    }

    /// `Ḡ(·, y)` for several `y`, sharing one kernel.
    pub fn deficit_tails(&self, ys: &[f64], grid: &GridSpec) -> Result<Vec<GridFunction>> {
        let base = self.deficit_problem(0.0, grid)?;
        let ratio = self.lambda / self.premium;
        let h = grid.step;
        let forcings: Vec<Vec<f64>> = ys
            .iter()
            .map(|&y| {
                if !(y >= 0.0) {
                    return Err(Error::InvalidParameter(format!("y must be >= 0, got {y}")));
                }
                Ok((0..base.len())
                    .into_par_iter()
                    .map(|i| ratio * self.claims.integrated_tail(i as f64 * h + y))
                    .collect())
            })
            .collect::<Result<_>>()?;
        base.solve_many(&forcings)?.into_iter().map(|g| self.finish(g)).collect()
    }

    /// Truncated compound geometric sum `Σ_{n=1}^N (1-φ) φ^n F̄_e^{*n}(u)`
    /// with convolution powers built by the solver's discrete convolution.
    /// Returns the partial sum and the bound `φ^{N+1}` on the omitted terms.
    pub fn pk_series(&self, terms: usize, grid: &GridSpec) -> Result<(GridFunction, f64)> {
        let problem = self.deficit_problem(0.0, grid)?;
        let h = grid.step;
        let eq = self.equilibrium()?;
        let first: Vec<f64> = (0..problem.len()).map(|i| 1.0 - eq.tail(i as f64 * h)).collect();
        let phi = self.modulus();
        let sum = compound_geometric_tail(first, |g| problem.convolve(g), phi, terms)?;
        let g = GridFunction::new(h, sum)?;
        Ok((g, phi.powi(terms as i32 + 1)))
    }
}

/// `∫ (1+z)^γ g(z) dz` on the grid plus the envelope remainder.
pub(crate) fn weighted_grid_moment(g: &GridFunction, gamma: f64) -> Result<f64> {
    let weighted = g.map(|z, v| (1.0 + z).powf(gamma) * v)?;
    let end = g.end();
    let tail = match g.envelope() {
        Some(e) => {
            let last = *g.values().last().unwrap();
            // continue the last value with the envelope's decay rate
            Envelope { scale: last * (e.rate * end).exp(), rate: e.rate }.weighted_mass_from(end, gamma)
        }
        None => 0.0,
    };
    Ok(weighted.integral() + tail)
}

/// Root of an increasing function on `(0, upper)` that is negative at 0 and
/// blows up at `upper`.
pub(crate) fn lundberg_root(f: &dyn Fn(f64) -> f64, upper: f64) -> f64 {
    let mut hi = 0.5 * upper;
    let mut gap = 0.5;
    while !(f(hi).is_finite() && f(hi) > 0.0) && gap > 1e-15 {
        gap *= 0.5;
        hi = upper * (1.0 - gap);
    }
    bisect(f, 0.0, hi, 1e-14 * upper)
}

/// `Σ_{i=1}^N (1-φ) φ^i (1 - G_i(u))` with `G_1 = first`, `G_{i+1} = conv(G_i)`.
pub(crate) fn compound_geometric_tail(
    first: Vec<f64>,
    conv: impl Fn(&[f64]) -> Result<Vec<f64>>,
    phi: f64,
    terms: usize,
) -> Result<Vec<f64>> {
    let mut sum = vec![0.0; first.len()];
    let mut power = first;
    let mut weight = (1.0 - phi) * phi;
    for i in 1..=terms {
        for (s, p) in sum.iter_mut().zip(&power) {
            *s += weight * (1.0 - p);
        }
        if i < terms {
            power = conv(&power)?;
        }
        weight *= phi;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn exp_model(beta: f64, lambda: f64, c: f64) -> RiskModel {
        RiskModel::new(lambda, c, ClaimDistribution::exponential(beta).unwrap()).unwrap()
    }

    fn he_model(lambda: f64, c: f64) -> RiskModel {
        let he = ClaimDistribution::hyper_exponential(&[0.5, 0.5], &[1.25, 5.0 / 6.0]).unwrap();
        RiskModel::new(lambda, c, he).unwrap()
    }

    #[test]
    fn net_profit_is_enforced() {
        let e = ClaimDistribution::exponential(1.0).unwrap();
        assert!(matches!(RiskModel::new(1.0, 1.0, e.clone()), Err(Error::NetProfit { .. })));
        assert!(RiskModel::new(0.0, 1.0, e.clone()).is_err());
        let m = RiskModel::new(5.0 / 6.0, 3.0, e).unwrap();
        assert_abs_diff_eq!(m.modulus(), 1.0 / (1.0 + m.loading()), epsilon = 1e-12);
        assert_abs_diff_eq!(m.loading(), 2.6, epsilon = 1e-12);
    }

    #[test]
    fn adjustment_coefficient_exponential() {
        let m = exp_model(2.0, 0.5, 0.5);
        assert_abs_diff_eq!(m.adjustment_coefficient().unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn exact_exponential_ruin() {
        let m = exp_model(2.0, 0.5, 0.5);
        assert_eq!(m.exact_ruin_exponential(0.0).unwrap(), 0.5);
        assert_abs_diff_eq!(m.exact_ruin_exponential(1.0).unwrap(), 0.183940, epsilon = 5e-7);
        let m = exp_model(1.0, 5.0 / 6.0, 3.0);
        assert_abs_diff_eq!(m.exact_ruin_exponential(2.0).unwrap(), 0.0655214, epsilon = 5e-8);
        assert!(matches!(he_model(0.5, 3.0).exact_ruin_exponential(1.0), Err(Error::WrongVariant { .. })));
    }

    #[test]
    fn ruin_probability_matches_closed_form() {
        let m = exp_model(1.0, 5.0 / 6.0, 3.0);
        let psi = m.ruin_probability(&GridSpec::default()).unwrap();
        assert_eq!(psi.values()[0], m.modulus());
        let err = psi
            .points()
            .map(|(u, v)| (v - 5.0 / 18.0 * (-13.0 / 18.0 * u).exp()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn mean_maximal_loss_reference_values() {
        assert_abs_diff_eq!(exp_model(1.0, 5.0 / 6.0, 3.0).mean_maximal_loss().unwrap(), 2.0 / 5.2, epsilon = 1e-12);
        assert_abs_diff_eq!(he_model(5.0 / 6.0, 3.0).mean_maximal_loss().unwrap(), 0.4, epsilon = 1e-12);
        let m = he_model(5.0 / 6.0, 3.0);
        assert_abs_diff_eq!(m.weighted_psi_moment_exact(0).unwrap(), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn weighted_psi_moment_grid_agrees_with_closed_form() {
        let grid = GridSpec::with_step(1.0 / 256.0);
        for m in [he_model(5.0 / 6.0, 3.0), exp_model(1.0, 5.0 / 6.0, 3.0)] {
            for g in [0u32, 1] {
                let numeric = m.weighted_psi_moment(g as f64, &grid).unwrap();
                let exact = m.weighted_psi_moment_exact(g).unwrap();
                assert_relative_eq!(numeric, exact, max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn deficit_at_zero_is_ruin_probability() {
        let m = he_model(5.0 / 6.0, 3.0);
        let grid = GridSpec::with_step(1.0 / 256.0);
        let psi = m.ruin_probability(&grid).unwrap();
        let g0 = m.deficit_tail(0.0, &grid).unwrap();
        assert_eq!(psi.values(), g0.values());
    }

    #[test]
    fn deficit_memoryless_exponential() {
        // θ = 1, exponential(1): Ḡ(u, y) = ψ(u) e^{-y}
        let m = exp_model(1.0, 1.0, 2.0);
        let grid = GridSpec::with_step(1.0 / 512.0);
        let g = m.deficit_tail(0.5, &grid).unwrap();
        assert_abs_diff_eq!(g.values()[0], 0.5 * (-0.5f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(g.values()[0], 0.303265, epsilon = 5e-7);
        for (u, v) in g.points() {
            assert_abs_diff_eq!(v, m.exact_ruin_exponential(u).unwrap() * (-0.5f64).exp(), epsilon = 1e-6);
        }
    }

    #[test]
    fn deficit_tails_batch_matches_single() {
        let m = he_model(5.0 / 6.0, 3.0);
        let grid = GridSpec::with_step(1.0 / 128.0);
        let many = m.deficit_tails(&[0.1, 1.0], &grid).unwrap();
        let single = m.deficit_tail(1.0, &grid).unwrap();
        assert_eq!(many[1].values(), single.values());
        assert!(many[0].values().iter().zip(many[1].values()).all(|(a, b)| a >= b));
    }

    #[test]
    fn pk_series_matches_solver() {
        let m = he_model(5.0 / 6.0, 3.0);
        let grid = GridSpec::with_step(1.0 / 256.0);
        let psi = m.ruin_probability(&grid).unwrap();
        let (series, remainder) = m.pk_series(30, &grid).unwrap();
        assert_abs_diff_eq!(remainder, m.modulus().powi(31), epsilon = 1e-18);
        let gap = psi.values().iter().zip(series.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        // both sides carry an O(h²) discretization error
        assert!(gap <= remainder + 1e-5, "{gap}");
    }

    #[test]
    fn loss_moments_exponential() {
        // L = Bernoulli(φ) · Exp(β(1-φ)): E L^2 = 2 φ / (β(1-φ))^2
        let m = exp_model(2.0, 0.5, 0.5);
        let l = m.maximal_loss_moments(2).unwrap();
        assert_abs_diff_eq!(l[1], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(l[2], 1.0, epsilon = 1e-14);
    }
}
