//! `quadgen`: node generation, quadrature weights, convergence studies and
//! asymptotic comparisons from the command line.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 invalid configuration,
//! 3 nodes outside the admissibility budget, 4 a study verdict failed.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "quadgen",
    version,
    about = "Convergent interpolatory quadrature for the Chebyshev measure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Nodes of the phase equation (or a closed form) with their phase deviations.
    Nodes {
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Quadrature weights on generated nodes.
    Weights {
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Method::Interpolatory)]
        method: Method,
        /// Stieltjes discretization tolerance (varying method).
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Convergence study over a range of n on exp, Runge and |x|.
    Study {
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        range: RangeArgs,
        /// Use equally spaced nodes judged against the measure.
        #[arg(long, conflicts_with = "closed_form")]
        equally_spaced: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Orthogonal-polynomial zeros and envelopes against the phase nodes.
    Asym {
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Density and tail tables of the balayage and the equilibrium measure.
    Balayage {
        #[command(flatten)]
        measure: MeasureArgs,
        /// Number of interior grid points.
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug, Clone)]
pub struct MeasureArgs {
    /// Rational weight of the arcsine part, as p/q.
    #[arg(long)]
    pub a: Option<String>,
    /// Single real mass of sigma.
    #[arg(long, conflicts_with = "masses")]
    pub zeta: Option<f64>,
    /// JSON file {"masses": [[re, im], ...], "a": "p/q"}.
    #[arg(long)]
    pub masses: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SchemeArgs {
    /// Use the closed-form generator (a in {0, 1/2, 1}, one real mass).
    #[arg(long)]
    pub closed_form: bool,
    /// Perturbation amplitude A in the budget A e^{-l n}.
    #[arg(long = "A", default_value_t = 0.0)]
    pub amplitude: f64,
    /// Perturbation rate l.
    #[arg(long, default_value_t = 1.0)]
    pub ell: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct RangeArgs {
    #[arg(long, conflicts_with = "n_range")]
    pub n: Option<usize>,
    /// Inclusive range start:stop:step.
    #[arg(long)]
    pub n_range: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Interpolatory,
    Varying,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Nodes {
            measure,
            scheme,
            n,
            output,
        } => commands::nodes(&measure, &scheme, n, &output),
        Command::Weights {
            measure,
            scheme,
            n,
            method,
            tol,
            output,
        } => commands::weights(&measure, &scheme, n, method, tol, &output),
        Command::Study {
            measure,
            scheme,
            range,
            equally_spaced,
            output,
        } => commands::study(&measure, &scheme, &range, equally_spaced, &output),
        Command::Asym {
            measure,
            range,
            tol,
            output,
        } => commands::asym(&measure, &range, tol, &output),
        Command::Balayage {
            measure,
            points,
            output,
        } => commands::balayage(&measure, points, &output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("quadgen: {failure}");
            ExitCode::from(failure.code())
        }
    }
}
