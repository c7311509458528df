//! Command-line front end for empirical Christoffel functions.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Flags, RunConfig};

#[derive(Parser)]
#[command(name = "christoffel", version, about = "Empirical Christoffel functions of point clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model and write it as JSON
    Fit(Flags),
    /// Evaluate Lambda at points or on a grid
    Eval(Flags),
    /// Outlyingness scores (christoffel or kde)
    Score(Flags),
    /// Density ratio against the uniform measure on a box
    Density(Flags),
    /// Thresholded support estimate
    Support(Flags),
    /// Match two affinely related, shuffled point clouds
    Match(Flags),
    /// Degree and threshold schedule for decreasing distances
    Schedule(Flags),
    /// Area under the precision-recall curve of score files
    Aupr(Flags),
    /// Synthetic datasets
    Generate(Flags),
}

impl Command {
    fn split(self) -> (&'static str, Flags) {
        match self {
            Command::Fit(f) => ("fit", f),
            Command::Eval(f) => ("eval", f),
            Command::Score(f) => ("score", f),
            Command::Density(f) => ("density", f),
            Command::Support(f) => ("support", f),
            Command::Match(f) => ("match", f),
            Command::Schedule(f) => ("schedule", f),
            Command::Aupr(f) => ("aupr", f),
            Command::Generate(f) => ("generate", f),
        }
    }
}

fn main() -> ExitCode {
    let (name, flags) = Cli::parse().command.split();
    let result = RunConfig::resolve(name, &flags).and_then(|cfg| commands::dispatch(&cfg));
    match result {
        Ok(()) => ExitCode::from(error::exit::OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
