use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = scc::cli::Cli::parse();
    match cli.run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
