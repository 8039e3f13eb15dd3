use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod fit;
mod grid;
mod invariant;
mod params;
mod series;
mod simulate;
mod verify;

/// Constants of motion of the damped harmonic oscillator.
#[derive(Parser)]
#[command(name = "oscinv", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    Simulate(simulate::Opts),
    Fit(fit::Opts),
    Invariant(invariant::Opts),
    Verify(verify::Opts),
    Grid(grid::Opts),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(opts) => simulate::run(opts),
        Command::Fit(opts) => fit::run(opts),
        Command::Invariant(opts) => invariant::run(opts),
        Command::Verify(opts) => verify::run(opts),
        Command::Grid(opts) => grid::run(opts),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // `{:#}` keeps the whole context chain on one line
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
