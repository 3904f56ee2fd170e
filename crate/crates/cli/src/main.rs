//! `slackfm`: QUBO solving, regression grids and surrogate optimization from
//! the command line.

mod args;
mod config;
mod error;
mod optimize;
mod output;
mod scenario;
mod solve;
mod synthetic;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::SolveQubo(a) => solve::run(&a),
        Command::RunScenario(a) => scenario::run(&a),
        Command::RunOptimize(a) => optimize::run(&a),
        Command::GenSynthetic(a) => synthetic::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
