use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod common;
mod families;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Bound(args) => commands::cmd_bound(args),
        Command::Optimize(args) => commands::cmd_optimize(args),
        Command::Certify(args) => commands::cmd_certify(args),
        Command::Verify(args) => commands::cmd_verify(args),
        Command::Report(args) => commands::cmd_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
