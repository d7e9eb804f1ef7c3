//! Functions sampled on a uniform grid `0, h, 2h, ...`.

use crate::error::{Error, Result};

/// Exponential bound `|f(t)| <= scale · e^{-rate · t}` valid past the grid end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub scale: f64,
    pub rate: f64,
}

impl Envelope {
    /// `∫_a^∞ (1+t)^γ scale e^{-rate t} dt`, bounded via `(1+t)^γ <= (1+a)^γ e^{γ(t-a)/(1+a)}`.
    pub fn weighted_mass_from(&self, a: f64, gamma: f64) -> f64 {
        let slow = self.rate - gamma / (1.0 + a);
        if slow <= 0.0 {
            return f64::INFINITY;
        }
        self.scale * (1.0 + a).powf(gamma) * (-self.rate * a).exp() / slow
    }

    pub fn at(&self, t: f64) -> f64 {
        self.scale * (-self.rate * t).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    step: f64,
    values: Vec<f64>,
    /// Values are a (possibly defective) tail: in `[0, 1]` and nonincreasing.
    is_tail: bool,
    envelope: Option<Envelope>,
}

impl GridFunction {
    pub fn new(step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidParameter(format!("grid step must be positive, got {step}")));
        }
        if values.is_empty() {
            return Err(Error::InvalidParameter("grid function has no values".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite grid value {v}")));
        }
        Ok(Self { step, values, is_tail: false, envelope: None })
    }

    /// Samples `f` at `0, h, ..., (n-1)h`.
    pub fn from_fn(step: f64, len: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(step, (0..len).map(|i| f(i as f64 * step)).collect())
    }

    /// Marks the function as a tail; checks range and monotonicity up to `slack`.
    pub fn into_tail(mut self, slack: f64) -> Result<Self> {
        let bad_range = self.values.iter().any(|v| *v < -slack || *v > 1.0 + slack);
        let bad_mono = self.values.windows(2).any(|w| w[1] > w[0] + slack);
        if bad_range || bad_mono {
            return Err(Error::Numerical("values are not a nonincreasing tail in [0,1]".into()));
        }
        self.is_tail = true;
        Ok(self)
    }

    pub fn with_envelope(mut self, envelope: Envelope) -> Self {
        self.envelope = Some(envelope);
        self
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_tail(&self) -> bool {
        self.is_tail
    }

    pub fn envelope(&self) -> Option<Envelope> {
        self.envelope
    }

    pub fn end(&self) -> f64 {
        self.step * (self.values.len() - 1) as f64
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(move |(i, v)| (i as f64 * self.step, *v))
    }

    /// Linear interpolation; past the end the envelope (or 0) is used.
    pub fn at(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return self.values[0];
        }
        let x = u / self.step;
        let i = x.floor() as usize;
        if i + 1 >= self.values.len() {
            if i + 1 == self.values.len() && (x - i as f64) < 1e-9 {
                return self.values[i];
            }
            return self.envelope.map(|e| e.at(u).min(self.values[self.values.len() - 1].abs())).unwrap_or(0.0);
        }
        let frac = x - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Value at the grid node nearest to `u`.
    pub fn node(&self, u: f64) -> f64 {
        let i = (u / self.step).round() as usize;
        self.values[i.min(self.values.len() - 1)]
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = self.points().map(|(t, v)| f(t, v)).collect();
        Self::new(self.step, values)
    }

    /// Trapezoid integral over the grid.
    pub fn integral(&self) -> f64 {
        let v = &self.values;
        if v.len() < 2 {
            return 0.0;
        }
        self.step * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[v.len() - 1]))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Checks that two grids share a step (to relative 1e-12).
    pub fn check_compatible(&self, other: &GridFunction) -> Result<()> {
        if (self.step - other.step).abs() > 1e-12 * self.step.max(other.step) {
            return Err(Error::IncompatibleGrids(self.step, other.step));
        }
        Ok(())
    }

    pub fn truncated(&self, len: usize) -> Self {
        Self { values: self.values[..len.min(self.values.len())].to_vec(), ..self.clone() }
    }
}
