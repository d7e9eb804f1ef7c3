use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ruin_cli::commands::{self, BoundKind, EvalArgs, EvalKind};
use ruin_cli::{builtin_config, load_config, run_table, CliError, CliResult};

/// Ruin probabilities, deficit tails and continuity bounds for compound
/// Poisson risk models.
#[derive(Debug, Parser)]
#[command(name = "ruin", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reproduce a reference table as CSV (ids 1a-1d, 2a-2d, 3, 4, 5).
    Table {
        id: String,
        /// Use this config instead of the built-in one.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Grid step override.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Evaluate a continuity bound for the two models of a config.
    Bound {
        #[arg(value_enum)]
        kind: Bound,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        y: Option<f64>,
    },
    /// Evaluate a quantity at the points given by --u.
    Eval {
        #[arg(value_enum)]
        what: Eval,
        #[arg(long)]
        config: PathBuf,
        /// `0,0.5,1` or `start:end:step`.
        #[arg(long)]
        u: String,
        #[arg(long)]
        y: Option<f64>,
        #[arg(long)]
        k0: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        /// Monte Carlo target: psi, psit, ktail or deficit.
        #[arg(long)]
        quantity: Option<String>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Print the built-in config of a table.
    Config { id: String },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Bound {
    Dk1,
    Dk2,
    Dk3,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Eval {
    Ruin,
    Deficit,
    Ktail,
    Psit,
    Iterate,
    Mc,
}

fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Table { id, config, step } => {
            let cfg = match config {
                Some(p) => load_config(&p)?,
                None => builtin_config(&id)?,
            };
            let report = run_table(&id, &cfg, step)?;
            print!("{}", report.to_csv()?);
            let bad = report.mismatches();
            if bad > 0 {
                eprintln!("{bad} cell(s) outside tolerance");
                return Ok(1);
            }
        }
        Command::Bound { kind, config, gamma, y } => {
            let cfg = load_config(&config)?;
            let kind = match kind {
                Bound::Dk1 => BoundKind::Dk1,
                Bound::Dk2 => BoundKind::Dk2,
                Bound::Dk3 => BoundKind::Dk3,
            };
            let r = commands::bound(kind, &cfg, gamma, y)?;
            for n in &r.notes {
                eprintln!("# {n}");
            }
            print!("{}", commands::bound_csv(&r)?);
        }
        Command::Eval { what, config, u, y, k0, n, quantity, samples, seed, step } => {
            let cfg = load_config(&config)?;
            let kind = match what {
                Eval::Ruin => EvalKind::Ruin,
                Eval::Deficit => EvalKind::Deficit,
                Eval::Ktail => EvalKind::KTail,
                Eval::Psit => EvalKind::PsiTotal,
                Eval::Iterate => EvalKind::Iterate,
                Eval::Mc => EvalKind::MonteCarlo,
            };
            let args = EvalArgs { u: commands::parse_points(&u)?, y, k0, n, quantity, samples, seed, step };
            print!("{}", commands::eval(kind, &cfg, &args)?);
        }
        Command::Config { id } => print!("{}", builtin_config(&id)?.to_text()),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

fn exit_code(e: &CliError) -> i32 {
    e.exit_code()
}
