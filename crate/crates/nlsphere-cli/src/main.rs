//! `nlsphere` command-line front end.

mod apply;
mod convergence;
mod eigs;
mod io;
mod stokes;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nlsphere::kernels::KernelParams;

#[derive(Parser)]
#[command(name = "nlsphere", version, about = "Nonlocal vector calculus on the unit sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalue tables Λ, Θ, μ, μ_t, T_G for ℓ ≤ lmax.
    Eigs(eigs::EigsArgs),
    /// Operator, oracle and Stokes residual suites.
    Verify(verify::VerifyArgs),
    /// δ-sweep of limiting values and operator distances.
    Convergence(convergence::ConvergenceArgs),
    /// Stokes residuals over cap angles and horizons.
    Stokes(stokes::StokesArgs),
    /// Apply an operator to a spectrum file.
    Apply(apply::ApplyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Output destination shared by all commands.
#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Failure with its exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, parameters or input files (exit 2).
    Config(String),
    /// A residual exceeded the tolerance (exit 1).
    Verification(String),
    /// A quadrature refinement did not settle (exit 3).
    NonConvergence(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Config(_) => 2,
            Failure::NonConvergence(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
            Failure::NonConvergence(m) => write!(f, "quadrature did not converge: {m}"),
        }
    }
}

impl From<nlsphere::Error> for Failure {
    fn from(e: nlsphere::Error) -> Self {
        match e {
            nlsphere::Error::NonConvergence { .. } => Failure::NonConvergence(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

pub type CliResult<T> = Result<T, Failure>;

pub fn kernel_params(a: f64, delta: f64) -> CliResult<KernelParams> {
    Ok(KernelParams::new(a, delta)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eigs(a) => eigs::run(&a),
        Command::Verify(a) => verify::run(&a),
        Command::Convergence(a) => convergence::run(&a),
        Command::Stokes(a) => stokes::run(&a),
        Command::Apply(a) => apply::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("nlsphere: {f}");
            ExitCode::from(f.code())
        }
    }
}
