//! `nashavg`: rate agents from match logs, win-rate tables or score tables.
//!
//! Exit codes: 0 success, 1 input or parse error, 2 solver failure (a partial
//! report is still written), 3 invalid flags.

mod pipeline;
mod plots;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pipeline::{Failure, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "nashavg", version, about = "Elo, mElo, Hodge and Nash-average evaluation of agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Batch Elo fit on pairwise win rates.
    Elo(RunArgs),
    /// Multidimensional Elo with 2k cyclic features.
    Melo(RunArgs),
    /// Transitive/cyclic decomposition of AvA logits or AvT scores.
    Hodge(RunArgs),
    /// Maxent Nash equilibrium and Nash averages of an AvA game.
    NashAva(RunArgs),
    /// Maxent Nash equilibrium of the agent-vs-task game.
    NashAvt(RunArgs),
    /// Real Schur factorisation of the antisymmetric data matrix.
    Schur(RunArgs),
}

#[derive(Debug, Clone, Args)]
struct RunArgs {
    /// Input CSV: matches, win probabilities or scores.
    #[arg(long)]
    input: PathBuf,
    /// Report path; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    clamp_eps: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Number of 2-dimensional cyclic blocks for mElo.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// mElo rating step in display units.
    #[arg(long, default_value_t = 16.0)]
    lr_r: f64,
    /// mElo cyclic-feature step.
    #[arg(long, default_value_t = 1.0)]
    lr_c: f64,
    #[arg(long, default_value_t = 2000)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rescale every task column to [0, 1] (AvT input).
    #[arg(long)]
    standardize: bool,
    /// Subtract the grand mean of the scores (AvT Hodge analyses).
    #[arg(long)]
    center: bool,
    /// Also write nash_distribution.csv and averages_comparison.csv.
    #[arg(long)]
    emit_plots: bool,
}

fn config(command: Command) -> RunConfig {
    let (subcommand, a) = match command {
        Command::Elo(a) => ("elo", a),
        Command::Melo(a) => ("melo", a),
        Command::Hodge(a) => ("hodge", a),
        Command::NashAva(a) => ("nash-ava", a),
        Command::NashAvt(a) => ("nash-avt", a),
        Command::Schur(a) => ("schur", a),
    };
    RunConfig {
        subcommand: subcommand.into(),
        input: a.input,
        output: a.output,
        clamp_eps: a.clamp_eps,
        tol: a.tol,
        max_iter: a.max_iter,
        k: a.k,
        lr_r: a.lr_r,
        lr_c: a.lr_c,
        epochs: a.epochs,
        seed: a.seed,
        standardize: a.standardize,
        center: a.center,
        emit_plots: a.emit_plots,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match pipeline::run(&config(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("nashavg: {failure}");
            ExitCode::from(match failure {
                Failure::Input(_) => 1,
                Failure::Solver(_) => 2,
                Failure::Flags(_) => 3,
            })
        }
    }
}
