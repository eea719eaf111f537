//! `qrank`: tensor completion under the adaptive Q-rank model.

mod commands;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "qrank", version, about = "Low tensor Q-rank completion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Complete a partially observed tensor.
    Complete(CompleteArgs),
    /// Generate a synthetic low-Q-rank tensor and a Bernoulli observation mask.
    Synth(SynthArgs),
    /// Run a (p, r0) phase-transition grid and write it as CSV.
    Grid(GridArgs),
    /// Print the PSNR of a tensor against a reference.
    Psnr(PsnrArgs),
    /// Print the sorted Q-singular values of a tensor.
    Spectrum(SpectrumArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum QModeArg {
    /// Re-estimate Q by PCA of the current iterate.
    Adaptive,
    Identity,
    Dct,
    /// Seeded random orthonormal columns.
    Random,
    /// Read Q from --q-file.
    File,
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// Penalty growth factor.
    #[arg(long, default_value = "1.1")]
    rho: f64,
    /// Initial penalty.
    #[arg(long, default_value = "1e-4")]
    mu0: f64,
    /// Penalty cap.
    #[arg(long = "mu-max", default_value = "1e10")]
    mu_max: f64,
    /// Stopping tolerance on the three ∞-norm residuals.
    #[arg(long, default_value = "1e-8")]
    eps: f64,
    /// Iterations between PCA refreshes of Q.
    #[arg(long = "K", default_value = "1")]
    k: usize,
    /// Iteration cap.
    #[arg(long = "max-iters", default_value = "500")]
    max_iters: usize,
}

#[derive(Args, Debug)]
struct CompleteArgs {
    /// Observed tensor (T3v1), zero off the mask.
    #[arg(long)]
    input: PathBuf,
    /// Observation mask (M3v1).
    #[arg(long)]
    mask: PathBuf,
    /// Where to write the completed tensor (T3v1).
    #[arg(long)]
    output: PathBuf,
    #[arg(long = "q-mode", value_enum, default_value = "adaptive")]
    q_mode: QModeArg,
    /// Transform (Q1v1) for --q-mode file.
    #[arg(long = "q-file")]
    q_file: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Number of transform columns [default: min(n1·n2, n3)].
    #[arg(long)]
    r: Option<usize>,
    /// Seed for --q-mode random.
    #[arg(long, default_value = "0")]
    seed: u64,
    /// Per-iteration residual CSV.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Print one residual line per iteration to stderr.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    n2: usize,
    #[arg(long)]
    n3: usize,
    /// Rank of the mode-3 subspace.
    #[arg(long)]
    r0: usize,
    /// Sampling rate in (0, 1].
    #[arg(long)]
    p: f64,
    #[arg(long, default_value = "0")]
    seed: u64,
    #[arg(long = "out-true")]
    out_true: PathBuf,
    #[arg(long = "out-observed")]
    out_observed: PathBuf,
    #[arg(long = "out-mask")]
    out_mask: PathBuf,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Side length of the cubic synthetic tensors.
    #[arg(long)]
    n: usize,
    /// Comma-separated sampling rates, e.g. 0.1,0.5,0.9.
    #[arg(long = "p-list")]
    p_list: String,
    /// Comma-separated ranks, e.g. 1,3,6.
    #[arg(long = "r-list")]
    r_list: String,
    #[arg(long, default_value = "10")]
    trials: usize,
    #[arg(long, default_value = "0")]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct PsnrArgs {
    /// Estimate (T3v1).
    #[arg(long)]
    x: PathBuf,
    /// Reference (T3v1).
    #[arg(long = "ref")]
    reference: PathBuf,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long = "q-mode", value_enum, default_value = "adaptive")]
    q_mode: QModeArg,
    #[arg(long = "q-file")]
    q_file: Option<PathBuf>,
    /// Number of transform columns [default: min(n1·n2, n3)].
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, default_value = "0")]
    seed: u64,
    /// Print only the N largest values.
    #[arg(long)]
    top: Option<usize>,
    /// Also write the values, one per line, to this file.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", one_line(first));
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Complete(a) => commands::complete(a),
        Command::Synth(a) => commands::synth(a),
        Command::Grid(a) => commands::grid(a),
        Command::Psnr(a) => commands::psnr(a),
        Command::Spectrum(a) => commands::spectrum(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&format!("{e:#}")));
            ExitCode::from(2)
        }
    }
}
