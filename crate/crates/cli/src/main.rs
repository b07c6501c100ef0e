use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    spinwire_cli::main_with(spinwire_cli::Cli::parse())
}
