//! `verse`: train similarity-preserving node embeddings and evaluate them.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod common;
mod error;
mod evaluate;
mod gen;
mod oracle;
mod output;
mod sweep;
mod train;

use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "verse", version, about = "Similarity-preserving node embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train an embedding from an edge list.
    Train(train::TrainArgs),
    /// Score an embedding on one evaluation task.
    #[command(subcommand)]
    Eval(evaluate::EvalCommand),
    /// Train one model per similarity cell and keep the best on a task.
    Sweep(sweep::SweepArgs),
    /// Dump exact similarity rows as `node target prob` lines.
    Oracle(oracle::OracleArgs),
    /// Generate graphs and link-prediction splits.
    #[command(subcommand)]
    Gen(gen::GenCommand),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train(args) => train::run(args),
        Command::Eval(cmd) => evaluate::run(cmd),
        Command::Sweep(args) => sweep::run(args),
        Command::Oracle(args) => oracle::run(args),
        Command::Gen(cmd) => gen::run(cmd),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
