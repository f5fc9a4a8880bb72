//! Command-line experiment runner. Exit codes: 0 success, 1 usage,
//! 2 runtime failure or divergence, 3 I/O or malformed input.

mod cli;
mod commands;
mod error;
mod manifest;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use cli::{Cli, Command};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            return ExitCode::from(if ok { 0 } else { 1 });
        }
    };
    let result = match &cli.command {
        Command::GenData(args) => commands::gen_data(args),
        Command::Run(args) => commands::run(args),
        Command::SweepBeta(args) => commands::sweep_beta(args),
        Command::Report(args) => commands::report(args),
        Command::Oracle(args) => commands::oracle(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
