use std::process::ExitCode;

use clap::Parser;
use fmm2d_cli::{run, Cli};

fn main() -> ExitCode {
    // clap exits with status 2 on malformed arguments
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fmm2d: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
