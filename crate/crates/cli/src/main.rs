//! `rabi`: regular spectrum of the quantum Rabi model from the command line.
//!
//! Every subcommand echoes its resolved settings into the output. Exit codes
//! are 0 on success, 1 for usage or IO errors and 2 for numerical failures
//! or missed tolerances.

mod args;
mod commands;
mod error;
mod manifest;
mod output;

use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use args::{Cli, Command};
use error::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum(a) => commands::spectrum(&a.resolve()?, a.common.verbose),
        Command::Evaluate(a) => commands::evaluate(&a.resolve()?, a.common.verbose),
        Command::Oracle(a) => commands::oracle(&a.resolve()?, a.common.verbose),
        Command::Compare(a) => commands::compare(&a.resolve()?, a.common.verbose),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let sub = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                let mut cmd = Cli::command();
                cmd.build();
                if let Some(sc) = cmd.find_subcommand_mut(sub) {
                    eprintln!("\n{}", sc.render_usage());
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}
