//! Claim-size laws with exact tails, densities, moments and equilibrium
//! transforms.

use crate::error::{Error, Result};
use crate::expo::{factorial, ExpPoly, ExpTerm};
use crate::quadrature::{integrate_breaks, QuadratureSettings};

/// Claim-size distribution.
///
/// Parametric variants are light-tailed mixtures of Erlang laws, so their
/// densities are exponential polynomials (see [`ExpPoly`]). `Tabulated`
/// carries tail values on a uniform grid and interpolates linearly.
#[derive(Debug, Clone, PartialEq)]
pub enum ClaimDistribution {
    Exponential { rate: f64 },
    HyperExponential { weights: Vec<f64>, rates: Vec<f64> },
    Erlang { shape: u32, rate: f64 },
    /// `Σ_j weights[j] · Erlang(j + 1, rate)`.
    ErlangMixture { weights: Vec<f64>, rate: f64 },
    Tabulated { step: f64, tails: Vec<f64>, tail_epsilon: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidParameter(format!("weights must be nonnegative: {weights:?}")));
    }
    let s: f64 = weights.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("weights sum to {s}, expected 1")));
    }
    Ok(())
}

impl ClaimDistribution {
    pub fn exponential(rate: f64) -> Result<Self> {
        positive("rate", rate)?;
        Ok(Self::Exponential { rate })
    }

    /// Mixture of exponentials; components with equal rates are merged.
    pub fn hyper_exponential(weights: &[f64], rates: &[f64]) -> Result<Self> {
        if weights.len() != rates.len() {
            return Err(Error::InvalidParameter("weights and rates differ in length".into()));
        }
        check_weights(weights)?;
        let mut w: Vec<f64> = Vec::new();
        let mut r: Vec<f64> = Vec::new();
        for (&wi, &ri) in weights.iter().zip(rates) {
            positive("rate", ri)?;
            match r.iter().position(|&x| x == ri) {
                Some(j) => w[j] += wi,
                None => {
                    w.push(wi);
                    r.push(ri);
                }
            }
        }
        if r.len() == 1 {
            return Ok(Self::Exponential { rate: r[0] });
        }
        Ok(Self::HyperExponential { weights: w, rates: r })
    }

    pub fn erlang(shape: u32, rate: f64) -> Result<Self> {
        positive("rate", rate)?;
        if shape == 0 {
            return Err(Error::InvalidParameter("Erlang shape must be >= 1".into()));
        }
        Ok(Self::Erlang { shape, rate })
    }

    pub fn erlang_mixture(weights: &[f64], rate: f64) -> Result<Self> {
        positive("rate", rate)?;
        check_weights(weights)?;
        Ok(Self::ErlangMixture { weights: weights.to_vec(), rate })
    }

    /// Tail values `tails[i] = F̄(i · step)`; must start at 1, stay in
    /// `[0, 1]` and be nonincreasing.
    pub fn tabulated(step: f64, tails: Vec<f64>, tail_epsilon: f64) -> Result<Self> {
        positive("step", step)?;
        positive("tail_epsilon", tail_epsilon)?;
        if tails.len() < 2 || (tails[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("tabulated tail must start at 1".into()));
        }
        if tails.iter().any(|v| !(0.0..=1.0).contains(v)) || tails.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter("tabulated tail must be nonincreasing in [0,1]".into()));
        }
        Ok(Self::Tabulated { step, tails, tail_epsilon })
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self, Self::Tabulated { .. })
    }

    /// Density as an exponential polynomial; `None` for tabulated laws.
    pub fn density_poly(&self) -> Option<ExpPoly> {
        let term = |coef: f64, power: u32, rate: f64| ExpTerm { coef, power, rate };
        match self {
            Self::Exponential { rate } => Some(ExpPoly::new(vec![term(*rate, 0, *rate)])),
            Self::HyperExponential { weights, rates } => Some(ExpPoly::new(
                weights.iter().zip(rates).map(|(w, r)| term(w * r, 0, *r)).collect(),
            )),
            Self::Erlang { shape, rate } => Some(ExpPoly::new(vec![term(
                rate.powi(*shape as i32) / factorial(shape - 1),
                shape - 1,
                *rate,
            )])),
            Self::ErlangMixture { weights, rate } => Some(ExpPoly::new(
                weights
                    .iter()
                    .enumerate()
                    .map(|(j, w)| term(w * rate.powi(j as i32 + 1) / factorial(j as u32), j as u32, *rate))
                    .collect(),
            )),
            Self::Tabulated { .. } => None,
        }
    }

    /// `F̄(t) = 1 - F(t)`.
    pub fn tail(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        match self {
            Self::Exponential { rate } => (-rate * t).exp(),
            Self::HyperExponential { weights, rates } => {
                weights.iter().zip(rates).map(|(w, r)| w * (-r * t).exp()).sum()
            }
            Self::Erlang { shape, rate } => poisson_cdf(*shape as i64 - 1, rate * t),
            Self::ErlangMixture { weights, rate } => weights
                .iter()
                .enumerate()
                .map(|(j, w)| w * poisson_cdf(j as i64, rate * t))
                .sum(),
            Self::Tabulated { step, tails, tail_epsilon } => {
                let x = t / step;
                let i = x.floor() as usize;
                if i + 1 >= tails.len() {
                    let last = *tails.last().unwrap();
                    // no extrapolation: past the grid the tail is 0 once decayed
                    return if last < *tail_epsilon { 0.0 } else { last };
                }
                let frac = x - i as f64;
                tails[i] * (1.0 - frac) + tails[i + 1] * frac
            }
        }
    }

    /// Density `f(t)`; tabulated laws use the slope of the interpolant.
    pub fn density(&self, t: f64) -> f64 {
        match self {
            Self::Tabulated { step, tails, .. } => {
                let i = (t / step).floor().max(0.0) as usize;
                if i + 1 >= tails.len() {
                    0.0
                } else {
                    (tails[i] - tails[i + 1]) / step
                }
            }
            _ => self.density_poly().expect("parametric").eval(t.max(0.0)),
        }
    }

    /// True when a tabulated tail has decayed below its epsilon at the grid end.
    pub fn is_decayed(&self) -> bool {
        match self {
            Self::Tabulated { tails, tail_epsilon, .. } => *tails.last().unwrap() < *tail_epsilon,
            _ => true,
        }
    }

    fn require_decayed(&self) -> Result<()> {
        if self.is_decayed() {
            Ok(())
        } else {
            Err(Error::Truncation("tabulated tail has not decayed at the grid end".into()))
        }
    }

    /// Support end of a tabulated law.
    fn grid_end(&self) -> Option<f64> {
        match self {
            Self::Tabulated { step, tails, .. } => Some(step * (tails.len() - 1) as f64),
            _ => None,
        }
    }

    /// Mean claim size `μ`.
    pub fn mean(&self) -> Result<f64> {
        match self {
            Self::Exponential { rate } => Ok(1.0 / rate),
            Self::Erlang { shape, rate } => Ok(*shape as f64 / rate),
            Self::Tabulated { step, tails, .. } => {
                self.require_decayed()?;
                Ok(trapezoid(tails, *step))
            }
            _ => Ok(self.density_poly().unwrap().moment(1)),
        }
    }

    /// Raw moment `E X^p`.
    pub fn raw_moment(&self, p: u32) -> Result<f64> {
        if p == 0 {
            return Ok(1.0);
        }
        match self {
            Self::Tabulated { step, tails, .. } => {
                self.require_decayed()?;
                // E X^p = p ∫ t^{p-1} F̄(t) dt
                let g: Vec<f64> = tails
                    .iter()
                    .enumerate()
                    .map(|(i, v)| p as f64 * (i as f64 * step).powi(p as i32 - 1) * v)
                    .collect();
                Ok(trapezoid(&g, *step))
            }
            _ => Ok(self.density_poly().unwrap().moment(p)),
        }
    }

    /// `∫_t^∞ F̄(s) ds`.
    pub fn integrated_tail(&self, t: f64) -> f64 {
        match self {
            Self::Exponential { rate } => (-rate * t.max(0.0)).exp() / rate,
            Self::Tabulated { step, tails, .. } => {
                let end = step * (tails.len() - 1) as f64;
                if t >= end {
                    return 0.0;
                }
                let i = (t / step).floor() as usize;
                let rest: Vec<f64> = tails[i + 1..].to_vec();
                let head = 0.5 * (self.tail(t) + tails[i + 1]) * ((i + 1) as f64 * step - t);
                head + trapezoid(&rest, *step)
            }
            _ => {
                let t = t.max(0.0);
                // ∫_t^∞ F̄ = ∫ (s - t)^+ f(s) ds = E[X; X>t] - t F̄(t); use the
                // closed form of the first moment on (t, ∞) instead.
                let p = self.density_poly().unwrap();
                p.terms()
                    .iter()
                    .map(|e| {
                        let m = e.power;
                        let r = e.rate;
                        // ∫_t^∞ s^{m+1} e^{-rs} ds - t ∫_t^∞ s^m e^{-rs} ds
                        let a = factorial(m + 1) / r.powi(m as i32 + 2) * poisson_cdf(m as i64 + 1, r * t);
                        let b = factorial(m) / r.powi(m as i32 + 1) * poisson_cdf(m as i64, r * t);
                        e.coef * (a - t * b)
                    })
                    .sum()
            }
        }
    }

    /// Slowest exponential decay rate of the tail, `None` for tabulated laws.
    pub fn slowest_rate(&self) -> Option<f64> {
        self.density_poly().map(|p| p.slowest_rate())
    }

    /// Highest polynomial degree in the tail (for truncation envelopes).
    pub(crate) fn envelope_degree(&self) -> u32 {
        self.density_poly().map(|p| p.max_power()).unwrap_or(0)
    }

    /// Point past which `g(t) = (1+t)^γ F̄(t)` (or any function with the same
    /// exponential-polynomial envelope) has remaining mass below `eps`.
    pub(crate) fn truncation_point(&self, gamma: f64, eps: f64) -> Result<f64> {
        match self {
            Self::Tabulated { .. } => {
                self.require_decayed()?;
                Ok(self.grid_end().unwrap())
            }
            _ => {
                let r = self.slowest_rate().unwrap();
                let degree = self.envelope_degree() as f64 + gamma;
                // beyond t0 each term's log-derivative is at most -r/2
                let mut t = (2.0 * degree / r).max(1.0 / r);
                for _ in 0..200 {
                    let g = (1.0 + t).powf(gamma) * self.tail(t);
                    if g * 2.0 / r < eps {
                        return Ok(t);
                    }
                    t *= 1.25;
                }
                Err(Error::Truncation(format!("tail does not decay below {eps}")))
            }
        }
    }

    /// Quadrature breakpoints covering the support up to the truncation point.
    pub(crate) fn breakpoints(&self, gamma: f64, eps: f64) -> Result<Vec<f64>> {
        let end = self.truncation_point(gamma, eps)?;
        let scale = match self.slowest_rate() {
            Some(r) => 1.0 / r,
            None => end / 64.0,
        };
        let mut pts = vec![0.0];
        let mut t = 0.0;
        while t < end {
            t = (t + 4.0 * scale).min(end);
            pts.push(t);
        }
        Ok(pts)
    }

    /// `M_γ = ∫_0^∞ (1+t)^γ F̄(t) dt`.
    pub fn weighted_tail_moment(&self, gamma: f64, q: &QuadratureSettings) -> Result<f64> {
        if !(gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
        }
        if gamma == 0.0 {
            return self.mean();
        }
        let pts = self.breakpoints(gamma, q.tail_epsilon)?;
        integrate_breaks(&|t: f64| (1.0 + t).powf(gamma) * self.tail(t), &pts, q)
    }

    /// `E (X+1)^{γ+1}` by quadrature of the density.
    pub fn shifted_power_moment(&self, gamma: f64, q: &QuadratureSettings) -> Result<f64> {
        let pts = self.breakpoints(gamma + 1.0, q.tail_epsilon)?;
        integrate_breaks(&|t: f64| (1.0 + t).powf(gamma + 1.0) * self.density(t), &pts, q)
    }

    /// Equilibrium law with tail `∫_t^∞ F̄ / μ`.
    pub fn equilibrium(&self) -> Result<Self> {
        match self {
            Self::Exponential { rate } => Ok(Self::Exponential { rate: *rate }),
            Self::HyperExponential { weights, rates } => {
                let raw: Vec<f64> = weights.iter().zip(rates).map(|(w, r)| w / r).collect();
                let s: f64 = raw.iter().sum();
                Ok(Self::HyperExponential {
                    weights: raw.iter().map(|w| w / s).collect(),
                    rates: rates.clone(),
                })
            }
            Self::Erlang { shape, rate } => {
                if *shape == 1 {
                    return Ok(Self::Exponential { rate: *rate });
                }
                Ok(Self::ErlangMixture {
                    weights: vec![1.0 / *shape as f64; *shape as usize],
                    rate: *rate,
                })
            }
            Self::ErlangMixture { weights, rate } => {
                // stage i+1 receives Σ_{j >= i} w_j
                let mut acc = 0.0;
                let mut raw = vec![0.0; weights.len()];
                for i in (0..weights.len()).rev() {
                    acc += weights[i];
                    raw[i] = acc;
                }
                let s: f64 = raw.iter().sum();
                Ok(Self::ErlangMixture { weights: raw.iter().map(|w| w / s).collect(), rate: *rate })
            }
            Self::Tabulated { step, tails, tail_epsilon } => {
                let mu = self.mean()?;
                let n = tails.len();
                let mut out = vec![0.0; n];
                for i in (0..n - 1).rev() {
                    out[i] = out[i + 1] + 0.5 * (tails[i] + tails[i + 1]) * step;
                }
                let out = out.iter().map(|v| (v / mu).min(1.0)).collect();
                Ok(Self::Tabulated { step: *step, tails: out, tail_epsilon: *tail_epsilon })
            }
        }
    }

    /// `E e^{s X}`, finite for `s` below the slowest rate.
    pub fn mgf(&self, s: f64) -> Result<f64> {
        match self.density_poly() {
            Some(p) if s < p.slowest_rate() => Ok(p.mgf(s)),
            Some(_) => Ok(f64::INFINITY),
            None => Err(Error::WrongVariant { expected: "a parametric claim law" }),
        }
    }
}

fn trapezoid(v: &[f64], h: f64) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[v.len() - 1]))
}

/// `S_m(z) = Σ_{r=0}^m z^r / r!`, with `S_{-1} = 0`.
pub fn partial_exp_sum(m: i64, z: f64) -> f64 {
    if m < 0 {
        return 0.0;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut comp = 0.0;
    for r in 1..=m {
        term *= z / r as f64;
        // Kahan summation
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// `e^{-z} S_m(z)`, the Poisson(z) distribution function at `m`; evaluated
/// term by term in log space so large `z` neither overflows nor underflows
/// prematurely.
pub fn poisson_cdf(m: i64, z: f64) -> f64 {
    if m < 0 {
        return 0.0;
    }
    if z <= 0.0 {
        return 1.0;
    }
    if z < 500.0 {
        // e^{-z} underflows only past ~745
        return (-z).exp() * partial_exp_sum(m, z);
    }
    let lz = z.ln();
    let mut log_fact = 0.0;
    let mut sum = 0.0;
    for r in 0..=m {
        if r > 0 {
            log_fact += (r as f64).ln();
        }
        sum += (r as f64 * lz - z - log_fact).exp();
    }
    sum.min(1.0)
}
