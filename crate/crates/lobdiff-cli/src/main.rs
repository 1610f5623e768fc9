mod args;
mod commands;
mod config;

use clap::Parser;

/// CLI failure classes, mapped onto exit codes: data/validation errors
/// exit 1, I/O errors exit 2.
#[derive(Debug)]
pub enum CliError {
    Data(String),
    Io(String),
}

impl From<lobdiff::Error> for CliError {
    fn from(e: lobdiff::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Data(m) | CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

fn main() {
    let cli = args::Cli::parse();
    let result = match cli.command {
        args::Command::Estimate(a) => commands::cmd_estimate(a),
        args::Command::Events(a) => commands::cmd_events(a),
        args::Command::Simulate(a) => commands::cmd_simulate(a),
        args::Command::Report(a) => commands::cmd_report(a),
        args::Command::Probup(a) => commands::cmd_probup(a),
    };
    match result {
        Ok(()) => {}
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    }
}
