//! Exponential polynomials `Σ c · t^m · e^{-r t}`.
//!
//! Every parametric claim law in the crate (exponential, hyperexponential,
//! Erlang and Erlang mixtures) has a density of this shape, and the class is
//! closed under convolution with an exponential density. That gives closed
//! forms for equilibrium laws and for the ladder law of the perturbed model.

use crate::distributions::poisson_cdf;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub coef: f64,
    pub power: u32,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpPoly {
    terms: Vec<ExpTerm>,
}

/// Rates closer than this (relatively) are merged when convolving.
const RATE_MERGE_REL: f64 = 1e-7;

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

impl ExpPoly {
    pub fn new(terms: Vec<ExpTerm>) -> Self {
        let mut p = Self { terms: Vec::new() };
        for t in terms {
            p.push(t);
        }
        p
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    fn push(&mut self, t: ExpTerm) {
        if t.coef == 0.0 {
            return;
        }
        if let Some(e) = self
            .terms
            .iter_mut()
            .find(|e| e.power == t.power && e.rate == t.rate)
        {
            e.coef += t.coef;
        } else {
            self.terms.push(t);
        }
    }

    /// `c · t^m e^{-rt}` summed.
    pub fn eval(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|e| e.coef * t.powi(e.power as i32) * (-e.rate * t).exp())
            .sum()
    }

    /// `∫_t^∞ p(s) ds`.
    pub fn integral_from(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|e| {
                e.coef * factorial(e.power) / e.rate.powi(e.power as i32 + 1)
                    * poisson_cdf(e.power as i64, e.rate * t)
            })
            .sum()
    }

    /// `∫_0^∞ s^p · p(s) ds`.
    pub fn moment(&self, p: u32) -> f64 {
        self.terms
            .iter()
            .map(|e| e.coef * factorial(e.power + p) / e.rate.powi((e.power + p) as i32 + 1))
            .sum()
    }

    /// Laplace-type transform `∫ e^{st} p(t) dt`, valid for `s` below the slowest rate.
    pub fn mgf(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|e| e.coef * factorial(e.power) / (e.rate - s).powi(e.power as i32 + 1))
            .sum()
    }

    pub fn slowest_rate(&self) -> f64 {
        self.terms.iter().map(|e| e.rate).fold(f64::INFINITY, f64::min)
    }

    pub fn max_power(&self) -> u32 {
        self.terms.iter().map(|e| e.power).max().unwrap_or(0)
    }

    /// `t · p(t)`.
    pub fn times_t(&self) -> Self {
        Self::new(self.terms.iter().map(|e| ExpTerm { power: e.power + 1, ..*e }).collect())
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(
            self.terms
                .iter()
                .map(|e| ExpTerm { coef: e.coef * k, ..*e })
                .collect(),
        )
    }

    /// Convolution with the exponential density `b · e^{-b t}`.
    pub fn convolve_exponential(&self, b: f64) -> Self {
        let mut out = ExpPoly::default();
        for e in &self.terms {
            let m = e.power;
            let d = e.rate - b;
            if d.abs() <= RATE_MERGE_REL * e.rate.max(b) {
                // ∫_0^t b e^{-b(t-z)} z^m e^{-bz} dz = b t^{m+1}/(m+1) e^{-bt}
                out.push(ExpTerm {
                    coef: e.coef * b / (m as f64 + 1.0),
                    power: m + 1,
                    rate: e.rate,
                });
            } else {
                // ∫_0^t z^m e^{-dz} dz = m!/d^{m+1} (1 - e^{-dt} S_m(dt))
                let mf = factorial(m);
                out.push(ExpTerm {
                    coef: e.coef * b * mf / d.powi(m as i32 + 1),
                    power: 0,
                    rate: b,
                });
                for k in 0..=m {
                    out.push(ExpTerm {
                        coef: -e.coef * b * mf / (factorial(k) * d.powi((m + 1 - k) as i32)),
                        power: k,
                        rate: e.rate,
                    });
                }
            }
        }
        out
    }
}
