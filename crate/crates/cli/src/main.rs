//! `c2mm`: command-line front end for the chiral two-matrix model library.

mod args;
mod commands;
mod config;
mod error;
mod output;

use clap::Parser;

use args::{Cli, Command};
use error::{CliError, CliResult};

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("C2MM_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Validation(format!(
            "C2MM_THREADS must be a positive integer (got {v:?})"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Io(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads()?;
    match cli.command {
        Command::Biortho(a) => commands::biortho(a),
        Command::Kernel(a) => commands::kernel(a),
        Command::Scaling(a) => commands::scaling(a),
        Command::OdeCheck(a) => commands::ode_check(a),
        Command::Density(a) => commands::density(a),
        Command::Phase(a) => commands::phase(a),
        Command::PhaseMap(a) => commands::phase_map(a),
        Command::Gamma(a) => commands::gamma(a),
        Command::Triple(a) => commands::triple(a),
        Command::Sample(a) => commands::sample(a),
        Command::Compare(a) => commands::compare(a),
        Command::Gap(a) => commands::gap(a),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("c2mm: {}", e.message());
        std::process::exit(e.code());
    }
}
