//! Command-line front end: mesh generation, cohomology computation,
//! oracle verification and the scaling benchmark.

mod bench;
mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Exit codes: 0 success, 1 input error, 2 verification failure.
pub const EXIT_INPUT_ERROR: u8 = 1;
pub const EXIT_VERIFICATION_FAILURE: u8 = 2;

#[derive(Parser)]
#[command(name = "dsforge", version, about = "Lazy first-cohomology generators of insulating regions of labeled tetrahedral meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a canonical labeled test mesh.
    Genmesh(commands::GenmeshArgs),
    /// Compute lazy cohomology generators of the insulating region.
    Compute(commands::ComputeArgs),
    /// Verify a generator file against the exact homology oracle.
    Oracle(commands::OracleArgs),
    /// Scaling benchmark across refinements of a canonical shape.
    Bench(bench::BenchArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Genmesh(args) => commands::cmd_genmesh(&args),
        Command::Compute(args) => commands::cmd_compute(&args),
        Command::Oracle(args) => commands::cmd_oracle(&args),
        Command::Bench(args) => bench::cmd_bench(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_INPUT_ERROR)
        }
    }
}
