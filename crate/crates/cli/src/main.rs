use std::io;
use std::process::ExitCode;

use clap::Parser;
use minima_forge_cli::args::Cli;
use minima_forge_cli::{configure_threads, run};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("minima-forge: {e}");
        return ExitCode::from(e.exit_code());
    }
    let code = run(&cli, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code)
}
