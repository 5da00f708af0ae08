//! `normlab`: norms, inequality checks, sharp constants and Monte Carlo
//! experiments from the command line.
//!
//! Exit codes: 0 pass, 1 usage, 2 infinite norm, 3 fail, 4 inconclusive.

mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Format;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INFINITE: u8 = 2;
pub const EXIT_FAIL: u8 = 3;
pub const EXIT_INCONCLUSIVE: u8 = 4;

pub const DEFAULT_SEED: u64 = 20;

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<normlab::Error> for Failure {
    fn from(e: normlab::Error) -> Failure {
        use normlab::Error as E;
        let code = match &e {
            E::NormInfinite(_) | E::NonIntegrable(_) => EXIT_INFINITE,
            E::Invalid(_) | E::Domain(_) | E::Parse { .. } | E::PreconditionUnmet(_) => EXIT_USAGE,
            // the computation itself could not decide
            _ => EXIT_INCONCLUSIVE,
        };
        let message = match &e {
            E::NonIntegrable(_) => format!("norm infinite: {e}"),
            _ => e.to_string(),
        };
        Failure { code, message }
    }
}

#[derive(Parser, Debug)]
#[command(name = "normlab", version, about = "Lorentz-Zygmund, Grand Lebesgue and Grand Zygmund norms on (0, 1)")]
#[command(after_help = "\
FUNCTIONS:
  An expression in t, e.g. \"abs(ln(t))\" or \"t^(-0.25)\"; operators + - * / ^,
  functions abs ln exp sqrt sin cos min max pow, constants pi and e.
  csv:PATH reads one value per row (an optional `value` header is skipped) as equal cells on (0, 1).
  tail:{\"p\":2,\"alpha\":0,\"scale\":1} is a variable whose tail is min(1, 1/N(t/scale)).

EXIT CODES:
  0 pass, 1 usage, 2 infinite norm, 3 fail, 4 inconclusive")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Report format.
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,
    /// Write the report here and print a one-line summary instead.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Omit the generation time so identical runs give identical bytes.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// Worker threads for sweeps (default: number of processors).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed for Monte Carlo runs; overrides NORMLAB_SEED and config seeds.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute one norm of one function.
    Norm(NormArgs),
    /// Check an inequality or identity from a JSON config.
    Verify(VerifyArgs),
    /// Ratio scan over |ln t|^κ against Θ(r, p, γ).
    Sharpness(SharpnessArgs),
    /// Tabulate Θ, ζ or J over a grid.
    Constants(ConstantsArgs),
    /// Monte Carlo experiments.
    Mc(McArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Space {
    Lp,
    LorentzZygmund,
    Gls,
    Gzs,
    Weighted,
}

#[derive(Args, Debug)]
pub struct NormArgs {
    #[arg(long, value_enum)]
    pub space: Space,
    /// Function spec (see FUNCTIONS below).
    #[arg(long = "fn", allow_hyphen_values = true)]
    pub function: String,
    /// Exponent; `inf` is accepted for lp.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Generating function: JSON file or inline JSON.
    #[arg(long)]
    pub psi: Option<String>,
    /// Grand Zygmund domain: JSON file or inline JSON.
    #[arg(long)]
    pub q: Option<String>,
    /// Weight function spec for the weighted norm.
    #[arg(long = "S")]
    pub weight: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Inequality {
    Tail,
    Coincidence,
    Holder,
    GlsWeighted,
    GzsTail,
    Embedding,
    Dilation,
    Monotonicity,
    Lower,
    Inverse,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub inequality: Inequality,
    /// JSON config file (or inline JSON).
    #[arg(long)]
    pub config: String,
}

#[derive(Args, Debug)]
pub struct SharpnessArgs {
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Constant {
    Theta,
    Zeta,
    J,
}

#[derive(Args, Debug)]
pub struct ConstantsArgs {
    #[arg(long, value_enum)]
    pub what: Constant,
    /// Inline `key=v1,v2;key=v3`, or a JSON file: an object of arrays for
    /// theta (r, p, gamma) and j (alpha, p, s), a list of {psi, nu} for zeta.
    #[arg(long)]
    pub grid: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Experiment {
    Extremal,
    Domination,
    Blowup,
}

#[derive(Args, Debug)]
pub struct McArgs {
    #[arg(long, value_enum)]
    pub experiment: Experiment,
    /// JSON config file (or inline JSON).
    #[arg(long)]
    pub config: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("normlab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
