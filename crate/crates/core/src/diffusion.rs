//! The classical model perturbed by a Brownian term `σ W(t)`, `D = σ²/2`.
//!
//! Ruin by a jump or by oscillation is described through the ladder law
//! `A = H₁ ∗ F_e`, `H₁ = Exp(c/D)`. Its compound geometric tail `K̄` solves a
//! defective renewal equation, and `ψ_t` is the tail of `K ∗ H₁`.

use rayon::prelude::*;

use crate::classical::{lundberg_root, GridSpec, RiskModel};
use crate::distributions::{poisson_cdf, ClaimDistribution};
use crate::error::{Error, Result};
use crate::expo::ExpPoly;
use crate::grid::{Envelope, GridFunction};
use crate::quadrature::{integrate, QuadratureSettings};
use crate::renewal::{envelope_u_max, grid_len, IterationTrace, RenewalProblem};

/// Operator and closed-form iterate paths must agree to this.
const ITERATE_PATH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedModel {
    base: RiskModel,
    diffusion: f64,
    ladder: Option<ExpPoly>,
}

impl PerturbedModel {
    pub fn new(base: RiskModel, diffusion: f64) -> Result<Self> {
        if !(diffusion > 0.0 && diffusion.is_finite()) {
            return Err(Error::InvalidParameter(format!("diffusion coefficient must be positive, got {diffusion}")));
        }
        let b0 = base.premium() / diffusion;
        let ladder = base
            .equilibrium()?
            .density_poly()
            .map(|p| p.convolve_exponential(b0));
        Ok(Self { base, diffusion, ladder })
    }

    pub fn base(&self) -> &RiskModel {
        &self.base
    }

    /// `D = σ²/2`.
    pub fn diffusion(&self) -> f64 {
        self.diffusion
    }

    pub fn sigma(&self) -> f64 {
        (2.0 * self.diffusion).sqrt()
    }

    /// Rate `b₀ = c/D` of the oscillation ladder height `H₁`.
    pub fn b0(&self) -> f64 {
        self.base.premium() / self.diffusion
    }

    pub fn modulus(&self) -> f64 {
        self.base.modulus()
    }

    /// Density of `A = H₁ ∗ F_e` as an exponential polynomial, when the claim
    /// law is parametric.
    pub fn ladder_poly(&self) -> Option<&ExpPoly> {
        self.ladder.as_ref()
    }

    /// `a(t) = ∫_0^t b₀ e^{-b₀(t-z)} f_e(z) dz`.
    pub fn ladder_density(&self, t: f64, q: &QuadratureSettings) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        if let Some(p) = &self.ladder {
            return Ok(p.eval(t));
        }
        let (b, eq) = (self.b0(), self.base.equilibrium()?);
        integrate(|z| b * (-b * (t - z)).exp() * eq.density(z), 0.0, t, q)
    }

    /// `Ā(t) = F̄_e(t) + ∫_0^t e^{-b₀(t-z)} f_e(z) dz`.
    pub fn ladder_tail(&self, t: f64, q: &QuadratureSettings) -> Result<f64> {
        if t <= 0.0 {
            return Ok(1.0);
        }
        if let Some(p) = &self.ladder {
            return Ok(p.integral_from(t).clamp(0.0, 1.0));
        }
        let (b, eq) = (self.b0(), self.base.equilibrium()?);
        Ok(eq.tail(t) + integrate(|z| (-b * (t - z)).exp() * eq.density(z), 0.0, t, q)?)
    }

    /// Lundberg exponent of `K̄`: root of `φ E e^{rA} = 1`.
    pub fn adjustment_coefficient(&self) -> Option<f64> {
        let p = self.ladder.as_ref()?;
        let phi = self.modulus();
        let upper = p.slowest_rate();
        let f = |r: f64| if r < upper { phi * p.mgf(r) - 1.0 } else { f64::INFINITY };
        Some(lundberg_root(&f, upper))
    }

    pub fn u_max(&self, grid: &GridSpec) -> Result<f64> {
        if let Some(u) = grid.u_max {
            return Ok(u);
        }
        match self.adjustment_coefficient() {
            Some(r) => Ok(envelope_u_max(self.modulus(), r)),
            None => Err(Error::InvalidParameter("tabulated claims need an explicit u_max".into())),
        }
    }

    /// Renewal problem for `K̄`: modulus `φ`, kernel `a`, forcing `φĀ`.
    /// Parametric laws use exact cell moments of `a`; tabulated ones sample
    /// `a` by quadrature.
    pub fn k_problem(&self, grid: &GridSpec) -> Result<RenewalProblem> {
        let u_max = self.u_max(grid)?;
        let n = grid_len(grid.step, u_max)?;
        let h = grid.step;
        let phi = self.modulus();
        let q = QuadratureSettings::default();
        let tails: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| self.ladder_tail(i as f64 * h, &q))
            .collect::<Result<_>>()?;
        let kernel: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| self.ladder_density(i as f64 * h, &q))
            .collect::<Result<_>>()?;
        let forcing = tails.iter().map(|t| phi * t).collect();
        match &self.ladder {
            Some(p) => {
                let (falling, rising) = cell_moments(p, h, n);
                RenewalProblem::from_cell_moments(phi, h, forcing, kernel, &falling, &rising)
            }
            None => RenewalProblem::new(phi, h, forcing, kernel),
        }
    }

    fn k_envelope(&self) -> Option<Envelope> {
        self.adjustment_coefficient().map(|r| Envelope { scale: 1.0, rate: r })
    }

    /// `K̄` on the grid.
    pub fn k_tail(&self, grid: &GridSpec) -> Result<GridFunction> {
        let k = self.k_problem(grid)?.solve()?.into_tail(1e-9)?;
        Ok(match self.k_envelope() {
            Some(e) => k.with_envelope(e),
            None => k,
        })
    }

    /// Closed form of `K̄` for exponential claims:
    /// `θ(D₁e^{-s₁u} + D₂e^{-s₂u})` with `s₁ < s₂` the roots of
    /// `s² - (b₀+β)s + (θ/(1+θ))b₀β = 0`.
    pub fn k_exact_exponential(&self, u: f64) -> Result<f64> {
        let (s1, s2, d1, d2) = self.exact_exponential_terms()?;
        let theta = self.base.loading();
        Ok(theta * (d1 * (-s1 * u).exp() + d2 * (-s2 * u).exp()))
    }

    /// `(s₁, s₂, D₁, D₂)` of the exponential closed form.
    pub fn exact_exponential_terms(&self) -> Result<(f64, f64, f64, f64)> {
        let beta = match self.base.claims() {
            ClaimDistribution::Exponential { rate } => *rate,
            _ => return Err(Error::WrongVariant { expected: "Exponential claims" }),
        };
        let theta = self.base.loading();
        let b0 = self.b0();
        let sum = b0 + beta;
        let product = theta / (1.0 + theta) * b0 * beta;
        let disc = (b0 - beta).powi(2) + 4.0 * b0 * beta / (1.0 + theta);
        let root = disc.sqrt();
        // larger root first, the smaller one from the product
        let s2 = 0.5 * (sum + root);
        let s1 = product / s2;
        let den = theta * (1.0 + theta) * root;
        Ok((s1, s2, s2 / den, -s1 / den))
    }

    /// Fixed-point iterates `K̄_n = T K̄_{n-1}` from the constant `k0`, with the
    /// operator path cross-checked against the closed form
    /// `K̄_n = φ - (1-k)φⁿA^{*n} - (1-φ)Σ_{i=1}^{n-1} φⁱA^{*i}` built from the
    /// same discrete convolution.
    pub fn k_iterates(&self, k0: f64, n: usize, grid: &GridSpec) -> Result<IterationTrace> {
        check_start(k0)?;
        let problem = self.k_problem(grid)?;
        let trace = problem.iterate(&vec![k0; problem.len()], n)?;
        let powers = convolution_power_iterates(&problem, k0, n, self.modulus())?;
        for (op, closed) in trace.iterates.iter().zip(&powers) {
            let gap = op.values().iter().zip(closed.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if gap > ITERATE_PATH_TOL {
                return Err(Error::Numerical(format!("iterate paths disagree by {gap:e}")));
            }
        }
        Ok(trace)
    }

    /// The closed-form path alone: `K̄_0..K̄_n` from grid convolution powers.
    pub fn k_iterates_closed_form(&self, k0: f64, n: usize, grid: &GridSpec) -> Result<Vec<GridFunction>> {
        check_start(k0)?;
        convolution_power_iterates(&self.k_problem(grid)?, k0, n, self.modulus())
    }

    /// Exact `K̄_n(u)` when claims are `Exp(β)` with `β = b₀`, where `A` is
    /// `Erlang(2, β)` and `A^{*i}(u) = 1 - e^{-βu} S_{2i-1}(βu)`.
    pub fn k_iterate_erlang(&self, k: f64, n: usize, u: f64) -> Result<f64> {
        check_start(k)?;
        let beta = match self.base.claims() {
            ClaimDistribution::Exponential { rate } => *rate,
            _ => return Err(Error::WrongVariant { expected: "Exponential claims" }),
        };
        let b0 = self.b0();
        if (beta - b0).abs() > 1e-12 * beta.max(b0) {
            return Err(Error::Hypothesis {
                name: "beta = c/D".into(),
                detail: format!("claim rate {beta} differs from c/D = {b0}"),
            });
        }
        if n == 0 {
            return Ok(k);
        }
        let phi = self.modulus();
        let power = |i: usize| 1.0 - poisson_cdf(2 * i as i64 - 1, beta * u);
        let mut v = phi - (1.0 - k) * phi.powi(n as i32) * power(n);
        for i in 1..n {
            v -= (1.0 - phi) * phi.powi(i as i32) * power(i);
        }
        Ok(v)
    }

    /// `ψ_t(u) = K̄(u) + (1-φ)H̄₁(u) + ∫_{0+}^u H̄₁(u-t) dK(t)`, the tail of the
    /// maximal loss `L_K + L_o`. `dK` is spread uniformly over each cell, so
    /// the Stieltjes sum is an exact O(n) recursion in `e^{-b₀h}`.
    pub fn psi_total(&self, grid: &GridSpec) -> Result<GridFunction> {
        let k = self.k_tail(grid)?;
        psi_total_from_k(&k, self.b0(), self.modulus(), self.k_envelope())
    }

    /// `(ψ_d, ψ_s)` with `ψ_d = (1+θ)(ψ_t - K̄)/θ` and `ψ_s = ψ_t - ψ_d`.
    pub fn decompose(&self, grid: &GridSpec) -> Result<(GridFunction, GridFunction)> {
        let k = self.k_tail(grid)?;
        let psi_t = psi_total_from_k(&k, self.b0(), self.modulus(), self.k_envelope())?;
        let theta = self.base.loading();
        let d: Vec<f64> = psi_t
            .values()
            .iter()
            .zip(k.values())
            .map(|(t, k)| (1.0 + theta) * (t - k) / theta)
            .collect();
        let s: Vec<f64> = psi_t.values().iter().zip(&d).map(|(t, d)| t - d).collect();
        Ok((GridFunction::new(k.step(), d)?, GridFunction::new(k.step(), s)?))
    }

    /// Truncated `Σ_{n=1}^N (1-φ)φⁿ Ā^{*n}` and the remainder bound `φ^{N+1}`.
    pub fn k_series(&self, terms: usize, grid: &GridSpec) -> Result<(GridFunction, f64)> {
        let problem = self.k_problem(grid)?;
        let phi = self.modulus();
        let first: Vec<f64> = problem.forcing().iter().map(|f| 1.0 - f / phi).collect();
        let sum = crate::classical::compound_geometric_tail(first, |g| problem.convolve(g), phi, terms)?;
        Ok((GridFunction::new(problem.step(), sum)?, phi.powi(terms as i32 + 1)))
    }
}

fn check_start(k0: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&k0) {
        return Err(Error::InvalidParameter(format!("initial constant must lie in [0, 1], got {k0}")));
    }
    Ok(())
}

/// `∫_{t_j}^{t_{j+1}} p(t)(t_{j+1}-t)/h dt` and `∫ p(t)(t-t_j)/h dt` per cell.
fn cell_moments(p: &ExpPoly, h: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let tp = p.times_t();
    let mass: Vec<f64> = (0..n).map(|i| p.integral_from(i as f64 * h)).collect();
    let first: Vec<f64> = (0..n).map(|i| tp.integral_from(i as f64 * h)).collect();
    let mut falling = Vec::with_capacity(n - 1);
    let mut rising = Vec::with_capacity(n - 1);
    for j in 0..n - 1 {
        let m0 = (mass[j] - mass[j + 1]).max(0.0);
        let m1 = first[j] - first[j + 1];
        let r = ((m1 - j as f64 * h * m0) / h).clamp(0.0, m0);
        rising.push(r);
        falling.push(m0 - r);
    }
    (falling, rising)
}

fn convolution_power_iterates(problem: &RenewalProblem, k0: f64, n: usize, phi: f64) -> Result<Vec<GridFunction>> {
    let h = problem.step();
    let len = problem.len();
    // A^{*1} = A; the discrete convolution of the constant 1 reproduces it.
    let mut power = problem.convolve(&vec![1.0; len])?;
    let mut out = vec![GridFunction::new(h, vec![k0; len])?];
    let mut partial = vec![0.0; len];
    for m in 1..=n {
        let head = phi.powi(m as i32);
        let values = (0..len).map(|i| phi - (1.0 - k0) * head * power[i] - partial[i]).collect();
        out.push(GridFunction::new(h, values)?);
        if m < n {
            for (s, p) in partial.iter_mut().zip(&power) {
                *s += (1.0 - phi) * head * p;
            }
            power = problem.convolve(&power)?;
        }
    }
    Ok(out)
}

pub(crate) fn psi_total_from_k(k: &GridFunction, b0: f64, phi: f64, envelope: Option<Envelope>) -> Result<GridFunction> {
    let h = k.step();
    let kv = k.values();
    let decay = (-b0 * h).exp();
    // mean of e^{-b₀ s} over a cell, with a series for tiny b₀h
    let bh = b0 * h;
    let cell_mean = if bh < 1e-8 { 1.0 - 0.5 * bh } else { -(-bh).exp_m1() / bh };
    let mut out = Vec::with_capacity(kv.len());
    let mut s = 0.0;
    let mut atom = 1.0 - phi;
    for i in 0..kv.len() {
        if i > 0 {
            s = decay * s + (kv[i - 1] - kv[i]) * cell_mean;
            atom *= decay;
        }
        out.push((kv[i] + atom + s).min(1.0));
    }
    let g = GridFunction::new(h, out)?.into_tail(1e-9)?;
    Ok(match envelope {
        // P(L_K + L_o > u) <= E e^{-R(u - L_o)} = b₀/(b₀-R) e^{-Ru}
        Some(e) if e.rate < b0 => g.with_envelope(Envelope { scale: b0 / (b0 - e.rate), rate: e.rate }),
        _ => g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn table4() -> PerturbedModel {
        let base = RiskModel::new(0.5, 0.5, ClaimDistribution::exponential(2.0).unwrap()).unwrap();
        PerturbedModel::new(base, 0.25).unwrap()
    }

    fn table5() -> PerturbedModel {
        let base = RiskModel::new(0.75, 2.0 / 3.0, ClaimDistribution::exponential(1.5).unwrap()).unwrap();
        PerturbedModel::new(base, 4.0 / 9.0).unwrap()
    }

    #[test]
    fn ladder_density_closed_forms() {
        let q = QuadratureSettings::default();
        let m = table4();
        for t in [0.1, 1.0, 3.0] {
            assert_abs_diff_eq!(m.ladder_density(t, &q).unwrap(), 4.0 * t * (-2.0 * t).exp(), epsilon = 1e-12);
        }
        let base = RiskModel::new(0.5, 2.0, ClaimDistribution::exponential(2.0).unwrap()).unwrap();
        let m = PerturbedModel::new(base, 2.0).unwrap();
        for t in [0.1, 1.0, 3.0] {
            assert_abs_diff_eq!(m.ladder_density(t, &q).unwrap(), 2.0 * ((-t).exp() - (-2.0 * t).exp()), epsilon = 1e-12);
        }
        let mass = integrate(|t| m.ladder_density(t, &q).unwrap(), 0.0, 60.0, &q).unwrap();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn exact_values() {
        let m = table4();
        let (s1, s2, _, _) = m.exact_exponential_terms().unwrap();
        assert_abs_diff_eq!(s1, 2.0 - 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(s2, 2.0 + 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(m.k_exact_exponential(0.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.k_exact_exponential(1.0).unwrap(), 0.3325717, epsilon = 1e-7);
        let m = table5();
        assert_abs_diff_eq!(m.k_exact_exponential(0.0).unwrap(), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(m.k_exact_exponential(1.0).unwrap(), 0.6573777, epsilon = 1e-7);
    }

    #[test]
    fn k_tail_matches_exact() {
        for m in [table4(), table5()] {
            let k = m.k_tail(&GridSpec::default()).unwrap();
            assert_eq!(k.values()[0], m.modulus());
            let err = k
                .points()
                .map(|(u, v)| (v - m.k_exact_exponential(u).unwrap()).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-6, "{err}");
        }
    }

    #[test]
    fn erlang_iterates_table_cells() {
        let m = table4();
        assert_abs_diff_eq!(m.k_iterate_erlang(0.0, 1, 1.0).unwrap(), 0.2030029, epsilon = 5e-8);
        assert_abs_diff_eq!(m.k_iterate_erlang(0.2, 2, 1.0).unwrap(), 0.3229262, epsilon = 5e-8);
        assert_abs_diff_eq!(m.k_iterate_erlang(1.0, 5, 1.0).unwrap(), 0.3325724, epsilon = 5e-8);
        let m = table5();
        assert_abs_diff_eq!(m.k_iterate_erlang(0.8, 2, 1.0).unwrap(), 0.6597075, epsilon = 5e-8);
        assert_abs_diff_eq!(m.k_iterate_erlang(0.6, 4, 1.0).unwrap(), 0.6573699, epsilon = 5e-8);
        let base = RiskModel::new(0.5, 2.0, ClaimDistribution::exponential(2.0).unwrap()).unwrap();
        let off = PerturbedModel::new(base, 2.0).unwrap();
        assert!(matches!(off.k_iterate_erlang(0.5, 2, 1.0), Err(Error::Hypothesis { .. })));
    }

    #[test]
    fn operator_iterates_agree_with_erlang_form() {
        let m = table4();
        let grid = GridSpec::new(1.0 / 1024.0, Some(8.0));
        let trace = m.k_iterates(0.4, 5, &grid).unwrap();
        let i = 1024;
        for n in 0..=5 {
            let exact = m.k_iterate_erlang(0.4, n, 1.0).unwrap();
            assert_abs_diff_eq!(trace.iterates[n].values()[i], exact, epsilon = 5e-7);
        }
    }

    #[test]
    fn psi_total_and_decomposition() {
        let m = table4();
        let grid = GridSpec::with_step(1.0 / 512.0);
        let k = m.k_tail(&grid).unwrap();
        let t = m.psi_total(&grid).unwrap();
        assert_eq!(t.values()[0], 1.0);
        assert!(t.values().iter().zip(k.values()).all(|(a, b)| a >= b));
        let (d, s) = m.decompose(&grid).unwrap();
        assert_abs_diff_eq!(d.values()[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.values()[0], 0.0, epsilon = 1e-12);
        for i in 0..t.len() {
            assert_eq!(d.values()[i] + s.values()[i], t.values()[i]);
            assert!((-1e-9..=1.0 + 1e-9).contains(&d.values()[i]));
            assert!((-1e-9..=1.0 + 1e-9).contains(&s.values()[i]));
        }
    }

    #[test]
    fn psi_total_exponential_closed_form() {
        // Exp(β) claims: ψ_t has rational transform; check against the
        // convolution of the exact K̄ with H₁ done by quadrature
        let m = table5();
        let q = QuadratureSettings::default();
        let grid = GridSpec::with_step(1.0 / 1024.0);
        let t = m.psi_total(&grid).unwrap();
        let b = m.b0();
        let (s1, s2, d1, d2) = m.exact_exponential_terms().unwrap();
        let theta = m.base().loading();
        let dk = |x: f64| theta * (d1 * s1 * (-s1 * x).exp() + d2 * s2 * (-s2 * x).exp());
        for u in [0.5, 1.0, 2.0] {
            let conv = integrate(|x| (-b * (u - x)).exp() * dk(x), 0.0, u, &q).unwrap();
            let exact = m.k_exact_exponential(u).unwrap() + (1.0 - m.modulus()) * (-b * u).exp() + conv;
            assert_abs_diff_eq!(t.at(u), exact, epsilon = 2e-6);
        }
    }

    #[test]
    fn small_diffusion_recovers_classical() {
        let base = RiskModel::new(5.0 / 6.0, 3.0, ClaimDistribution::exponential(1.0).unwrap()).unwrap();
        let m = PerturbedModel::new(base.clone(), 1e-4).unwrap();
        let grid = GridSpec::new(1.0 / 256.0, Some(30.0));
        let t = m.psi_total(&grid).unwrap();
        let psi = base.ruin_probability(&grid).unwrap();
        let gap = t.values()[1..]
            .iter()
            .zip(&psi.values()[1..])
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(gap <= 5e-3, "{gap}");
    }

    #[test]
    fn series_matches_solver() {
        let m = table5();
        let grid = GridSpec::with_step(1.0 / 256.0);
        let k = m.k_tail(&grid).unwrap();
        let (series, rem) = m.k_series(30, &grid).unwrap();
        let gap = k.values().iter().zip(series.values()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(gap <= rem + 1e-12, "{gap} vs {rem}");
    }
}
