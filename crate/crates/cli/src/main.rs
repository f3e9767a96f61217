//! `hrcn`: data generation, learning, evaluation, sweeps and the SQ lab.
//!
//! Every value flag can also be set through an `HRCN_*` environment
//! variable; flags win over the environment, which wins over defaults.

mod commands;
mod manifest;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::{eval, gen, learn, sq, sweep};

#[derive(Debug, Parser)]
#[command(name = "hrcn", version, about = "Noisy Gaussian halfspace learner and SQ laboratory")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, global = true, env = "HRCN_THREADS", default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a labeled dataset from a random target halfspace.
    Gen(gen::GenArgs),
    /// Learn a halfspace from a dataset file or a generated stream.
    Learn(learn::LearnArgs),
    /// Report the disagreement rate of a model on a dataset.
    Eval(eval::EvalArgs),
    /// Run the learner over a grid of settings and write one CSV row per trial.
    Sweep(sweep::SweepArgs),
    /// Correlation, Mehler, packing and distinguisher experiments.
    Sq {
        #[command(subcommand)]
        command: sq::SqCommand,
    },
}

/// Exit status for an error: 2 usage, 3 budget, 4 numeric.
pub(crate) fn exit_code(err: &hrcn_core::Error) -> u8 {
    use hrcn_core::Error as E;
    match err {
        E::Domain(_) | E::Shape { .. } | E::Parse { .. } | E::Io(_) => 2,
        E::InsufficientData { .. } | E::Budget(_) | E::PackingBudget { .. } => 3,
        E::Numeric(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.global.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.threads)
            .build_global()
        {
            eprintln!("error: could not configure thread pool: {e}");
            return ExitCode::from(3);
        }
    }
    let result = match cli.command {
        Command::Gen(a) => gen::run(&a),
        Command::Learn(a) => learn::run(&a),
        Command::Eval(a) => eval::run(&a),
        Command::Sweep(a) => sweep::run(&a),
        Command::Sq { command } => sq::run(&command),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
