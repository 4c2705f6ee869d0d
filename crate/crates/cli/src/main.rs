use std::process::ExitCode;

use clap::Parser;
use switchsafe_cli::{execute, Cli};

fn main() -> ExitCode {
    ExitCode::from(execute(&Cli::parse()))
}
