mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use ere_core::Error;

use crate::args::Cli;

/// Exit status for each failure class.
fn exit_code(err: &Error) -> u8 {
    match err.root() {
        Error::Convergence { .. } => 3,
        Error::NoSignal(_) | Error::Indeterminate(_) => 4,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let argv = match config::expand(std::env::args_os().collect()) {
        Ok(argv) => argv,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
