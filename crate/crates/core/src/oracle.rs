//! Monte Carlo estimates from the ladder-height representation of the maximal
//! aggregate loss. Shares no numerical integration with the solvers.
//!
//! Streams: ChaCha8 seeded with the user seed, one stream per block of
//! [`BLOCK`] samples (`set_stream(block)`). Results are bit-identical for a
//! given seed regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::classical::RiskModel;
use crate::diffusion::PerturbedModel;
use crate::distributions::ClaimDistribution;
use crate::error::{Error, Result};

/// Samples per RNG stream.
pub const BLOCK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantity {
    /// `ψ(u) = P(L > u)`.
    Psi,
    /// `ψ_t(u) = P(L_K + L_o > u)`.
    PsiTotal,
    /// `K̄(u) = P(L_K > u)`.
    KTail,
    /// `Ḡ(u, y)`: ruin with deficit above `y`.
    Deficit { y: f64 },
}

impl Quantity {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Psi => "psi",
            Self::PsiTotal => "psi_t",
            Self::KTail => "k_tail",
            Self::Deficit { .. } => "deficit",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Model<'a> {
    Classical(&'a RiskModel),
    Perturbed(&'a PerturbedModel),
}

impl<'a> From<&'a RiskModel> for Model<'a> {
    fn from(m: &'a RiskModel) -> Self {
        Self::Classical(m)
    }
}

impl<'a> From<&'a PerturbedModel> for Model<'a> {
    fn from(m: &'a PerturbedModel) -> Self {
        Self::Perturbed(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub estimate: f64,
    /// `√(p̂(1-p̂)/n)`.
    pub standard_error: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub quantity: Quantity,
}

/// Exact sampler for an equilibrium law.
#[derive(Debug, Clone)]
enum Sampler {
    Exponential(f64),
    /// Component probabilities and rates.
    Hyper(Vec<f64>, Vec<f64>),
    /// Stage probabilities (`Erlang(j+1)` with weight `w_j`) and common rate.
    Stages(Vec<f64>, f64),
    /// Inversion of a tabulated tail.
    Table(f64, Vec<f64>),
}

impl Sampler {
    fn new(d: &ClaimDistribution) -> Self {
        match d {
            ClaimDistribution::Exponential { rate } => Self::Exponential(*rate),
            ClaimDistribution::HyperExponential { weights, rates } => Self::Hyper(weights.clone(), rates.clone()),
            ClaimDistribution::Erlang { shape, rate } => {
                let mut w = vec![0.0; *shape as usize];
                w[*shape as usize - 1] = 1.0;
                Self::Stages(w, *rate)
            }
            ClaimDistribution::ErlangMixture { weights, rate } => Self::Stages(weights.clone(), *rate),
            ClaimDistribution::Tabulated { step, tails, .. } => Self::Table(*step, tails.clone()),
        }
    }

    fn pick(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
        let mut v = rng.gen::<f64>();
        for (i, w) in weights.iter().enumerate() {
            if v < *w {
                return i;
            }
            v -= w;
        }
        weights.len() - 1
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Self::Exponential(r) => exponential(*r, rng),
            Self::Hyper(w, r) => exponential(r[Self::pick(w, rng)], rng),
            Self::Stages(w, r) => {
                let k = Self::pick(w, rng) + 1;
                (0..k).map(|_| exponential(*r, rng)).sum()
            }
            Self::Table(h, tails) => {
                // invert the piecewise linear tail
                let u = rng.gen::<f64>();
                let i = tails.partition_point(|t| *t > u);
                if i == 0 {
                    return 0.0;
                }
                if i >= tails.len() {
                    return h * (tails.len() - 1) as f64;
                }
                let (a, b) = (tails[i - 1], tails[i]);
                let frac = if a > b { (a - u) / (a - b) } else { 0.0 };
                h * ((i - 1) as f64 + frac)
            }
        }
    }
}

fn exponential(rate: f64, rng: &mut ChaCha8Rng) -> f64 {
    // 1 - U lies in (0, 1]
    -(1.0 - rng.gen::<f64>()).ln() / rate
}

/// `P(N = n) = (1-φ) φ^n` by inversion.
fn geometric(phi: f64, rng: &mut ChaCha8Rng) -> u64 {
    if phi <= 0.0 {
        return 0;
    }
    let u = 1.0 - rng.gen::<f64>();
    (u.ln() / phi.ln()).floor() as u64
}

struct Setup {
    phi: f64,
    ladder: Sampler,
    b0: Option<f64>,
}

fn one_sample(s: &Setup, quantity: Quantity, u: f64, rng: &mut ChaCha8Rng) -> bool {
    let n = geometric(s.phi, rng);
    match quantity {
        Quantity::Psi => (0..n).map(|_| s.ladder.sample(rng)).sum::<f64>() > u,
        Quantity::KTail | Quantity::PsiTotal => {
            let b0 = s.b0.expect("perturbed model");
            let mut total = 0.0;
            for _ in 0..n {
                total += exponential(b0, rng) + s.ladder.sample(rng);
            }
            // always drawn so both quantities consume the same stream
            let trailing = exponential(b0, rng);
            match quantity {
                Quantity::KTail => total > u,
                _ => total + trailing > u,
            }
        }
        Quantity::Deficit { y } => {
            let mut total = 0.0;
            for _ in 0..n {
                total += s.ladder.sample(rng);
                if total > u {
                    return total - u > y;
                }
            }
            false
        }
    }
}

/// Monte Carlo estimate of `quantity` at `u` from `n` independent samples.
pub fn estimate<'a>(model: impl Into<Model<'a>>, quantity: Quantity, u: f64, n: u64, seed: u64) -> Result<MCEstimate> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    if !(u >= 0.0 && u.is_finite()) {
        return Err(Error::InvalidParameter(format!("u must be >= 0, got {u}")));
    }
    if let Quantity::Deficit { y } = quantity {
        if !(y >= 0.0) {
            return Err(Error::InvalidParameter(format!("y must be >= 0, got {y}")));
        }
    }
    let (base, b0) = match model.into() {
        Model::Classical(m) => (m, None),
        Model::Perturbed(pm) => (pm.base(), Some(pm.b0())),
    };
    if matches!(quantity, Quantity::KTail | Quantity::PsiTotal) && b0.is_none() {
        return Err(Error::WrongVariant { expected: "a perturbed model" });
    }
    let setup = Setup { phi: base.modulus(), ladder: Sampler::new(&base.equilibrium()?), b0 };
    let blocks = n.div_ceil(BLOCK);
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = BLOCK.min(n - b * BLOCK);
            (0..count).filter(|_| one_sample(&setup, quantity, u, &mut rng)).count() as u64
        })
        .sum();
    let p = hits as f64 / n as f64;
    Ok(MCEstimate {
        estimate: p,
        standard_error: (p * (1.0 - p) / n as f64).sqrt(),
        n_samples: n,
        seed,
        quantity,
    })
}
