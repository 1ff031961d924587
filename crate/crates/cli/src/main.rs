mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use ihtlab::experiments::ExperimentKind;
use ihtlab::Error;

use args::{Cli, Command};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_USAGE: u8 = 64;

fn exit_code(e: &Error) -> u8 {
    if e.is_config() || matches!(e, Error::StabilityUndefined(_)) {
        EXIT_CONFIG
    } else {
        EXIT_NUMERICAL
    }
}

/// Sizes the global pool from `IHTLAB_THREADS` when set.
fn init_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("IHTLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::Config(format!("IHTLAB_THREADS={raw} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Internal(e.to_string()))
}

fn dispatch(command: &Command) -> Result<(String, Option<String>), Error> {
    let plain = |r: Result<String, Error>| r.map(|s| (s, None));
    match command {
        Command::Solve(a) => plain(commands::solve_cmd(a)),
        Command::Rip(a) => plain(commands::rip_cmd(a)),
        Command::Tailbound(a) => plain(commands::tailbound_cmd(a)),
        Command::PhaseBound(a) => commands::phase_bound_cmd(a),
        Command::Stability(a) => commands::stability_cmd(a),
        Command::McTransition(a) => plain(commands::experiment_cmd(a, ExperimentKind::McTransition)),
        Command::McDist(a) => plain(commands::experiment_cmd(a, ExperimentKind::McDistribution)),
        Command::McError(a) => plain(commands::experiment_cmd(a, ExperimentKind::McErrorVsXi)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_USAGE,
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    match dispatch(&cli.command) {
        Ok((summary, stdout)) => {
            match stdout {
                Some(data) => {
                    print!("{data}");
                    eprintln!("{summary}");
                }
                None => println!("{summary}"),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
