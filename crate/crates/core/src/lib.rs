//! Numerical toolkit for the classical (Cramér–Lundberg) risk model and its
//! diffusion-perturbed extension.
//!
//! The crate computes ruin probabilities, deficit-at-ruin tails and the
//! compound-geometric tail `K̄` of the perturbed model by solving defective
//! renewal equations on a uniform grid, evaluates continuity bounds between
//! two models (`dk1`, `dk2`, `dk3`), runs fixed-point iterations with error
//! certificates, and provides an independent Monte Carlo oracle based on
//! exact ladder-height sampling.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod classical;
pub mod diffusion;
pub mod distributions;
pub mod error;
pub mod expo;
pub mod grid;
pub mod metrics;
pub mod oracle;
pub mod quadrature;
pub mod renewal;

pub use bounds::{dk1, dk2, dk3, BoundReport};
pub use classical::{GridSpec, RiskModel};
pub use diffusion::PerturbedModel;
pub use distributions::{partial_exp_sum, poisson_cdf, ClaimDistribution};
pub use error::{Error, Result};
pub use grid::GridFunction;
pub use oracle::{MCEstimate, Quantity};
pub use quadrature::QuadratureSettings;
pub use renewal::{IterationTrace, RenewalProblem};
