//! Model configuration files.
//!
//! ```text
//! # comment
//! [model]
//! lambda = 0.5
//! c = 0.5
//! claims = exp          # exp | hyperexp | erlang
//! rate = 2
//! [model2]              # optional second model for pair commands
//! ...
//! [diffusion]
//! D = 0.25              # diffusion coefficient of the first model
//! D2 = 0.1              # ... and of the second
//! [numeric]
//! h = 0.0009765625
//! umax = 30
//! seed = 42
//! abs_tol = 1e-10       # quadrature tolerances
//! rel_tol = 1e-9
//! max_subdivisions = 1048576
//! ```
//!
//! One `key = value` per line; lists are comma-separated. Errors carry the
//! 1-based line and column of the offending token.

use std::fmt::{self, Write as _};

use ruin_core::{ClaimDistribution, PerturbedModel, QuadratureSettings, RiskModel};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("config line {line}, column {column}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

fn err<T>(line: usize, column: usize, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { line, column, message: message.into() })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClaimSpec {
    Exp { rate: f64 },
    HyperExp { weights: Vec<f64>, rates: Vec<f64> },
    Erlang { shape: u32, rate: f64 },
}

impl ClaimSpec {
    pub fn distribution(&self) -> ruin_core::Result<ClaimDistribution> {
        match self {
            Self::Exp { rate } => ClaimDistribution::exponential(*rate),
            Self::HyperExp { weights, rates } => ClaimDistribution::hyper_exponential(weights, rates),
            Self::Erlang { shape, rate } => ClaimDistribution::erlang(*shape, *rate),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub lambda: f64,
    pub c: f64,
    pub claims: ClaimSpec,
}

impl ModelSpec {
    pub fn risk_model(&self) -> ruin_core::Result<RiskModel> {
        RiskModel::new(self.lambda, self.c, self.claims.distribution()?)
    }

    pub fn with_premium(&self, c: f64) -> Self {
        Self { c, ..self.clone() }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NumericSpec {
    pub h: Option<f64>,
    pub umax: Option<f64>,
    pub seed: Option<u64>,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_subdivisions: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub model: ModelSpec,
    pub model2: Option<ModelSpec>,
    pub diffusion: Option<f64>,
    pub diffusion2: Option<f64>,
    pub numeric: NumericSpec,
    /// Non-fatal notes from parsing (renormalized weights).
    pub warnings: Vec<String>,
}

impl ModelConfig {
    pub fn risk_model(&self) -> ruin_core::Result<RiskModel> {
        self.model.risk_model()
    }

    pub fn second_model(&self) -> ruin_core::Result<RiskModel> {
        match &self.model2 {
            Some(m) => m.risk_model(),
            None => Err(ruin_core::Error::InvalidParameter("config has no [model2] section".into())),
        }
    }

    pub fn perturbed(&self) -> ruin_core::Result<PerturbedModel> {
        let d = self
            .diffusion
            .ok_or_else(|| ruin_core::Error::InvalidParameter("config has no [diffusion] D".into()))?;
        PerturbedModel::new(self.risk_model()?, d)
    }

    pub fn second_perturbed(&self) -> ruin_core::Result<PerturbedModel> {
        let d = self
            .diffusion2
            .ok_or_else(|| ruin_core::Error::InvalidParameter("config has no [diffusion] D2".into()))?;
        PerturbedModel::new(self.second_model()?, d)
    }

    pub fn quadrature(&self) -> ruin_core::Result<QuadratureSettings> {
        let d = QuadratureSettings::default();
        QuadratureSettings::new(
            self.numeric.abs_tol.unwrap_or(d.abs_tol),
            self.numeric.rel_tol.unwrap_or(d.rel_tol),
            d.tail_epsilon,
            self.numeric.max_subdivisions.unwrap_or(d.max_subdivisions),
        )
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Parser::default().run(text)
    }

    /// Canonical text form; `parse(to_text())` reproduces `self` exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        write_model(&mut s, "model", &self.model);
        if let Some(m) = &self.model2 {
            write_model(&mut s, "model2", m);
        }
        if self.diffusion.is_some() || self.diffusion2.is_some() {
            s.push_str("[diffusion]\n");
            if let Some(d) = self.diffusion {
                let _ = writeln!(s, "D = {d}");
            }
            if let Some(d) = self.diffusion2 {
                let _ = writeln!(s, "D2 = {d}");
            }
        }
        let n = &self.numeric;
        if *n != NumericSpec::default() {
            s.push_str("[numeric]\n");
            let opt = |s: &mut String, k: &str, v: Option<f64>| {
                if let Some(v) = v {
                    let _ = writeln!(s, "{k} = {v}");
                }
            };
            opt(&mut s, "h", n.h);
            opt(&mut s, "umax", n.umax);
            if let Some(seed) = n.seed {
                let _ = writeln!(s, "seed = {seed}");
            }
            opt(&mut s, "abs_tol", n.abs_tol);
            opt(&mut s, "rel_tol", n.rel_tol);
            if let Some(m) = n.max_subdivisions {
                let _ = writeln!(s, "max_subdivisions = {m}");
            }
        }
        s
    }
}

impl fmt::Display for ModelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn write_model(s: &mut String, section: &str, m: &ModelSpec) {
    let _ = writeln!(s, "[{section}]\nlambda = {}\nc = {}", m.lambda, m.c);
    match &m.claims {
        ClaimSpec::Exp { rate } => {
            let _ = writeln!(s, "claims = exp\nrate = {rate}");
        }
        ClaimSpec::HyperExp { weights, rates } => {
            let _ = writeln!(s, "claims = hyperexp\nweights = {}\nrates = {}", list(weights), list(rates));
        }
        ClaimSpec::Erlang { shape, rate } => {
            let _ = writeln!(s, "claims = erlang\nshape = {shape}\nrate = {rate}");
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Model,
    Model2,
    Diffusion,
    Numeric,
}

/// A raw value with its position.
#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    column: usize,
    value: String,
}

/// Section, header line, entries keyed by name.
type RawSection = (Section, usize, Vec<(String, Entry)>);

#[derive(Debug, Default)]
struct Parser {
    sections: Vec<RawSection>,
}

impl Parser {
    fn run(mut self, text: &str) -> Result<ModelConfig, ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let trimmed = content.trim();
            if trimmed.is_empty() {
                continue;
            }
            let indent = content.len() - content.trim_start().len();
            if let Some(rest) = trimmed.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return err(line, indent + 1, "section header must end with ']'");
                };
                let section = match name.trim() {
                    "model" => Section::Model,
                    "model2" => Section::Model2,
                    "diffusion" => Section::Diffusion,
                    "numeric" => Section::Numeric,
                    other => return err(line, indent + 2, format!("unknown section [{other}]")),
                };
                if self.sections.iter().any(|(s, _, _)| *s == section) {
                    return err(line, indent + 1, format!("duplicate section [{}]", name.trim()));
                }
                self.sections.push((section, line, Vec::new()));
                continue;
            }
            let Some(eq) = content.find('=') else {
                return err(line, indent + 1, "expected `key = value`");
            };
            let key = content[..eq].trim();
            let value_raw = &content[eq + 1..];
            let value_col = eq + 2 + (value_raw.len() - value_raw.trim_start().len());
            let value = value_raw.trim();
            if key.is_empty() {
                return err(line, indent + 1, "missing key before '='");
            }
            if value.is_empty() {
                return err(line, eq + 1, format!("missing value for `{key}`"));
            }
            let Some((section, _, entries)) = self.sections.last_mut() else {
                return err(line, indent + 1, "key outside of any section");
            };
            let allowed: &[&str] = match section {
                Section::Model | Section::Model2 => &["lambda", "c", "claims", "rate", "rates", "weights", "shape"],
                Section::Diffusion => &["D", "D2"],
                Section::Numeric => &["h", "umax", "seed", "abs_tol", "rel_tol", "max_subdivisions"],
            };
            if !allowed.contains(&key) {
                return err(line, indent + 1, format!("unknown key `{key}`"));
            }
            if entries.iter().any(|(k, _)| k == key) {
                return err(line, indent + 1, format!("duplicate key `{key}`"));
            }
            entries.push((key.to_string(), Entry { line, column: value_col, value: value.to_string() }));
        }
        self.build()
    }

    fn build(self) -> Result<ModelConfig, ConfigError> {
        let mut warnings = Vec::new();
        let find = |s: Section| self.sections.iter().find(|(x, _, _)| *x == s);
        let Some(model) = find(Section::Model) else {
            return err(1, 1, "missing [model] section");
        };
        let model_spec = model_from(model.1, &model.2, &mut warnings)?;
        let model2 = match find(Section::Model2) {
            Some(m) => Some(model_from(m.1, &m.2, &mut warnings)?),
            None => None,
        };
        let (mut diffusion, mut diffusion2) = (None, None);
        if let Some((_, _, entries)) = find(Section::Diffusion) {
            for (k, e) in entries {
                let v = positive(e)?;
                if k == "D" {
                    diffusion = Some(v);
                } else {
                    diffusion2 = Some(v);
                }
            }
        }
        let mut numeric = NumericSpec::default();
        if let Some((_, _, entries)) = find(Section::Numeric) {
            for (k, e) in entries {
                match k.as_str() {
                    "h" => numeric.h = Some(positive(e)?),
                    "umax" => numeric.umax = Some(positive(e)?),
                    "abs_tol" => numeric.abs_tol = Some(positive(e)?),
                    "rel_tol" => numeric.rel_tol = Some(positive(e)?),
                    "max_subdivisions" => {
                        numeric.max_subdivisions = Some(match e.value.parse::<usize>() {
                            Ok(m) if m >= 1 => m,
                            _ => return err(e.line, e.column, format!("expected a positive integer, got `{}`", e.value)),
                        })
                    }
                    _ => {
                        numeric.seed = Some(e.value.parse().map_err(|_| ConfigError {
                            line: e.line,
                            column: e.column,
                            message: format!("seed must be a nonnegative integer, got `{}`", e.value),
                        })?)
                    }
                }
            }
        }
        Ok(ModelConfig { model: model_spec, model2, diffusion, diffusion2, numeric, warnings })
    }
}

fn number(e: &Entry) -> Result<f64, ConfigError> {
    match e.value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => err(e.line, e.column, format!("expected a number, got `{}`", e.value)),
    }
}

fn positive(e: &Entry) -> Result<f64, ConfigError> {
    let v = number(e)?;
    if v > 0.0 {
        Ok(v)
    } else {
        err(e.line, e.column, format!("expected a positive number, got `{}`", e.value))
    }
}

fn numbers(e: &Entry) -> Result<Vec<f64>, ConfigError> {
    let mut out = Vec::new();
    let mut offset = 0;
    for part in e.value.split(',') {
        let lead = part.len() - part.trim_start().len();
        let item = Entry { line: e.line, column: e.column + offset + lead, value: part.trim().to_string() };
        out.push(number(&item)?);
        offset += part.len() + 1;
    }
    Ok(out)
}

fn model_from(header: usize, entries: &[(String, Entry)], warnings: &mut Vec<String>) -> Result<ModelSpec, ConfigError> {
    let get = |k: &str| entries.iter().find(|(n, _)| n == k).map(|(_, e)| e);
    let need = |k: &str| get(k).ok_or_else(|| ConfigError { line: header, column: 1, message: format!("missing key `{k}`") });
    let lambda = positive(need("lambda")?)?;
    let c = positive(need("c")?)?;
    let family = need("claims")?;
    let reject_extra = |keys: &[&str]| -> Result<(), ConfigError> {
        for k in keys {
            if let Some(e) = get(k) {
                return err(e.line, 1, format!("key `{k}` does not apply to claims = {}", family.value));
            }
        }
        Ok(())
    };
    let claims = match family.value.as_str() {
        "exp" => {
            reject_extra(&["rates", "weights", "shape"])?;
            ClaimSpec::Exp { rate: positive(need("rate")?)? }
        }
        "erlang" => {
            reject_extra(&["rates", "weights"])?;
            let e = need("shape")?;
            let shape = match e.value.parse::<u32>() {
                Ok(s) if s >= 1 => s,
                _ => return err(e.line, e.column, format!("shape must be a positive integer, got `{}`", e.value)),
            };
            ClaimSpec::Erlang { shape, rate: positive(need("rate")?)? }
        }
        "hyperexp" => {
            reject_extra(&["rate", "shape"])?;
            let we = need("weights")?;
            let re = need("rates")?;
            let mut weights = numbers(we)?;
            let rates = numbers(re)?;
            if weights.len() != rates.len() {
                return err(re.line, re.column, format!("{} rates for {} weights", rates.len(), weights.len()));
            }
            if let Some(i) = rates.iter().position(|r| *r <= 0.0) {
                return err(re.line, re.column, format!("rate #{} must be positive", i + 1));
            }
            if let Some(i) = weights.iter().position(|w| *w <= 0.0) {
                return err(we.line, we.column, format!("weight #{} must be positive", i + 1));
            }
            let sum: f64 = weights.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                warnings.push(format!("line {}: weights sum to {sum}; renormalized", we.line));
                weights.iter_mut().for_each(|w| *w /= sum);
            }
            ClaimSpec::HyperExp { weights, rates }
        }
        other => return err(family.line, family.column, format!("unknown claim family `{other}` (exp, hyperexp, erlang)")),
    };
    Ok(ModelSpec { lambda, c, claims })
}
