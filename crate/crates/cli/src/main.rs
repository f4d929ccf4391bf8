//! `eel`: empirical likelihood evaluation, regions, contour grids and
//! coverage studies from the command line.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "eel", version, about = "Original, Bartlett-corrected and extended empirical likelihood")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate every likelihood ratio at one parameter value.
    Eval(EvalArgs),
    /// Test whether a parameter value lies in a confidence region (exit 0 = yes, 1 = no).
    Region(RegionArgs),
    /// Export statistics over a two-dimensional parameter grid.
    Contour(ContourArgs),
    /// Monte Carlo coverage of confidence regions for the regression designs.
    Coverage(CoverageArgs),
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// Tolerance on the Lagrange-multiplier equation residual.
    #[arg(long, default_value = "1e-8")]
    tol: f64,
    /// Newton iteration limit for the multiplier.
    #[arg(long = "max-iter", default_value_t = 100)]
    max_iter: usize,
}

#[derive(Args, Debug, Clone)]
struct DataArgs {
    /// Comma-delimited observations, one per line.
    #[arg(long)]
    data: std::path::PathBuf,
    /// Estimating model: mean, linear-regression, mean-variance.
    #[arg(long, default_value = "mean")]
    model: String,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Parameter value, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    theta: String,
    /// Emit key=value lines at full precision.
    #[arg(long)]
    machine: bool,
}

#[derive(Args, Debug)]
struct RegionArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, allow_hyphen_values = true)]
    theta: String,
    /// oel, eel1, eel2 or bel.
    #[arg(long, default_value = "eel1")]
    method: String,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long)]
    machine: bool,
}

#[derive(Args, Debug)]
struct ContourArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Statistics to tabulate.
    #[arg(long, default_value = "oel,eel1")]
    methods: String,
    /// Two parameter indices spanning the grid.
    #[arg(long, default_value = "0,1")]
    axes: String,
    /// Lower bounds along the two axes.
    #[arg(long, allow_hyphen_values = true)]
    lower: String,
    /// Upper bounds along the two axes.
    #[arg(long, allow_hyphen_values = true)]
    upper: String,
    /// Nodes per axis, one value or two.
    #[arg(long, default_value = "50")]
    resolution: String,
    /// Values for coordinates off the grid axes (defaults to the MELE).
    #[arg(long, allow_hyphen_values = true)]
    fixed: Option<String>,
    /// Write the table to this file instead of stdout
    #[arg(long)]
    output: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
struct CoverageArgs {
    /// model1 or model2.
    #[arg(long, default_value = "model1")]
    model: String,
    /// Sample sizes, comma separated.
    #[arg(long, default_value = "20")]
    n: String,
    #[arg(long, default_value = "0.9,0.95,0.99")]
    levels: String,
    #[arg(long, default_value = "oel,eel1,bel")]
    methods: String,
    #[arg(long, default_value_t = 10000)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Seed of the covariate streams (defaults to the error seed + 1).
    #[arg(long = "design-seed")]
    design_seed: Option<u64>,
    /// Draw the covariates once and reuse them in every replicate.
    #[arg(long = "fixed-design")]
    fixed_design: bool,
    /// Worker threads; the report does not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    /// Write the report to this file instead of stdout
    #[arg(long)]
    output: Option<std::path::PathBuf>,
    /// Emit the delimited report instead of the formatted table.
    #[arg(long)]
    machine: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(a) => commands::eval(&a),
        Command::Region(a) => commands::region(&a),
        Command::Contour(a) => commands::contour(&a),
        Command::Coverage(a) => commands::coverage(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}: {}", e.code(), e);
            ExitCode::from(2)
        }
    }
}
