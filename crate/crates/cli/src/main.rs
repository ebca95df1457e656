//! `maxstab`: likelihood evaluation, fitting, simulation, information,
//! Monte Carlo studies and regularity audits for max-stable models.

mod commands;
mod io;

use std::process::ExitCode;

use clap::Parser;

use commands::{CliError, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            report(&CliError::usage("UsageError", e.kind().to_string()));
            return ExitCode::from(2);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(e.exit_code())
        }
    }
}

fn report(e: &CliError) {
    let line = serde_json::json!({
        "error": e.kind,
        "message": e.message,
        "exit_code": e.exit_code(),
    });
    eprintln!("{line}");
}
