//! `postselect`: command-line front end for the postselect library.
//!
//! Exit status: 0 on success, 1 for usage and validation errors, 2 for
//! computation errors (no finite answer, failed verification). Errors are
//! reported on stderr as one JSON object per line.

mod commands;
mod input;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Lib(#[from] postselect::Error),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    VerificationFailed(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Input(_) => "InvalidInput",
            CliError::Lib(e) => e.kind(),
            CliError::Io(_) => "Io",
            CliError::VerificationFailed(_) => "VerificationFailed",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 1,
            CliError::Lib(e) if e.is_validation() => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "postselect",
    version,
    about = "Hypothesis testing between quantum states, channels and cone models with postselection"
)]
struct Cli {
    /// Machine-readable JSON output at full precision.
    #[arg(long, global = true)]
    json: bool,
    /// Support tolerance for eigenvalue thresholds.
    #[arg(long, global = true, default_value_t = postselect::linalg::DEFAULT_TOL)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct PairArgs {
    /// Input document.
    file: PathBuf,
    #[arg(long, default_value = "rho")]
    rho: String,
    #[arg(long, default_value = "sigma")]
    sigma: String,
}

#[derive(Debug, Args)]
struct ConeArgs {
    file: PathBuf,
    /// Cone vector or matrix name.
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Max-divergences in both directions.
    Dmax(PairArgs),
    /// Hilbert projective divergence and Ω.
    Omega(PairArgs),
    /// Thompson divergence and Ξ.
    Xi(PairArgs),
    /// Optimal conditional type II error under a type I budget.
    Asym {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        eps: f64,
        /// Write the optimal measurement to this file.
        #[arg(long)]
        povm_out: Option<PathBuf>,
    },
    /// Optimal conditional error probability under a prior.
    Sym {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        p: f64,
    },
    /// Null state against a convex set of alternatives.
    Composite {
        file: PathBuf,
        #[arg(long, default_value = "rho")]
        rho: String,
        #[arg(long)]
        set: String,
        #[arg(long)]
        eps: f64,
    },
    /// Channel discrimination.
    Channel {
        file: PathBuf,
        #[arg(long)]
        m: String,
        #[arg(long)]
        n: String,
        #[arg(long, conflicts_with = "p", required_unless_present = "p")]
        eps: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 1)]
        copies: usize,
    },
    /// Monte Carlo run of the optimal product strategy, as CSV.
    Simulate {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        copies: usize,
        /// Probability that a trial prepares rho.
        #[arg(long, default_value_t = 0.5)]
        prior: f64,
    },
    /// Exact per-copy rates for n = 1..n_max with sandwich bounds, as CSV.
    Scan {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        n_max: usize,
    },
    /// Checks the closed forms against the attaining measurement and a
    /// random search over measurements.
    Verify {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        /// Also check the symmetric setting with this prior.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Computations on general cone models.
    #[command(subcommand)]
    Gpt(GptCommand),
}

#[derive(Debug, Subcommand)]
enum GptCommand {
    Dmax(ConeArgs),
    Omega(ConeArgs),
    Xi(ConeArgs),
    Asym {
        #[command(flatten)]
        cone: ConeArgs,
        #[arg(long)]
        eps: f64,
    },
    Sym {
        #[command(flatten)]
        cone: ConeArgs,
        #[arg(long)]
        p: f64,
    },
    /// Compares `D_max(x⊗ⁿ‖y⊗ⁿ)` with `n·D_max(x‖y)`.
    Additivity {
        #[command(flatten)]
        cone: ConeArgs,
        #[arg(long)]
        n: usize,
    },
}

fn report_error(e: &CliError) {
    let line = serde_json::json!({"error": e.kind(), "message": e.to_string()});
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            report_error(&CliError::Usage(e.render().to_string().trim().to_string()));
            return ExitCode::from(1);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(&e);
            ExitCode::from(e.exit_code())
        }
    }
}
