use std::process::ExitCode;

use clap::Parser;
use tracing_subscriber::EnvFilter;

use phishlens_cli::args::{Cli, Command};
use phishlens_cli::commands;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.verbose, matches!(cli.command, Command::Serve(_))) {
        (0, false) => "warn",
        (0, true) | (1, _) => "info",
        _ => "debug",
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| level.into()))
        .init();

    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
