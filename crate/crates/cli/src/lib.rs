//! Command-line surface of `minima-forge`: template documents, experiment
//! configs, CSV/JSON output and the subcommand runners.

pub mod args;
pub mod commands;
pub mod config;
pub mod document;
pub mod error;
pub mod table;

use std::io::Write;

use args::{Cli, Command};
use commands::{BuildRequest, FlowRequest};
use error::CliError;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "MINIMA_FORGE_THREADS";

/// Installs the global thread pool from `MINIMA_FORGE_THREADS`, if set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = match value.trim().parse() {
        Ok(t) if t > 0 => t,
        _ => return Err(CliError::Parse(format!("{THREADS_ENV} must be a positive integer, got `{value}`"))),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Domain(format!("thread pool: {e}")))
}

/// Runs one command and returns the process exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    let result = match &cli.command {
        Command::Validate { file } => commands::validate(file, stdout),
        Command::Rate { file, at, bounds, raw, output } => {
            commands::rate(file, at, bounds.as_deref(), *raw, output, stdout)
        }
        Command::Build { kind, m, n, r, scale, periods, tau1, tau2, k_max, input, name, out } => commands::build(
            &BuildRequest {
                kind: *kind,
                m: *m,
                n: *n,
                r: *r,
                scale,
                periods: *periods,
                tau1,
                tau2,
                k_max: *k_max,
                input: input.as_deref(),
                name: name.as_deref(),
                out: out.as_deref(),
            },
            stdout,
        ),
        Command::Flow { m, n, a, u_grid, orders, norm, threshold, dual, cross_check, output } => commands::flow(
            &FlowRequest {
                m: *m,
                n: *n,
                a,
                u_grid,
                orders,
                norm,
                threshold,
                dual: *dual,
                cross_check: *cross_check,
                output,
            },
            stdout,
        ),
        Command::Scan { m, n, a, r, q_max, out } => commands::scan(*m, *n, a, *r, *q_max, out.as_deref(), stdout),
        Command::DualCheck { lattice } => commands::dual_check(lattice, stdout),
        Command::MinkCheck { lattice, norm } => commands::mink_check(lattice, norm, stdout),
        Command::Selftest { inject, only, no_time_limits } => {
            commands::selftest(inject.as_deref(), only.as_deref(), *no_time_limits, stdout, stderr)
        }
    };
    let _ = stdout.flush();
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(stderr, "minima-forge: {e}");
            e.exit_code()
        }
    }
}
