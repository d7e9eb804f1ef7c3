//! Command-line front end for `ruin-core`: configuration files, table
//! reproduction and CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod published;
pub mod tables;

pub use config::{ConfigError, ModelConfig};
pub use error::{CliError, CliResult};
pub use tables::{builtin_config, run_table, Flag, TableReport, TABLE_IDS};

/// Reads and parses a config file, echoing parse warnings to stderr.
pub fn load_config(path: &std::path::Path) -> CliResult<ModelConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let cfg = ModelConfig::parse(&text)?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    validate(&cfg)?;
    Ok(cfg)
}

/// Model-level checks (net profit, admissible parameters) for every section
/// present in the config.
pub fn validate(cfg: &ModelConfig) -> CliResult<()> {
    cfg.risk_model()?;
    if cfg.model2.is_some() {
        cfg.second_model()?;
    }
    if cfg.diffusion.is_some() {
        cfg.perturbed()?;
    }
    if cfg.diffusion2.is_some() && cfg.model2.is_some() {
        cfg.second_perturbed()?;
    }
    Ok(())
}
