use std::process::ExitCode;

use clap::Parser;
use tdoa_cli::{run, Cli};

fn main() -> ExitCode {
    run(&Cli::parse())
}
