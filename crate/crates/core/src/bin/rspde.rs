use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use reflected_spde::harness::{self, run::EXIT_CONFIG};
use reflected_spde::Error;

#[derive(Parser)]
#[command(version, about = "Reflected SPDE lattice experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config; writes results.csv and manifest.json.
    Run { config: PathBuf },
    /// Diff the results of two run directories.
    Compare { dir1: PathBuf, dir2: PathBuf },
    /// List built-in presets.
    ListPresets,
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config } => match harness::run(&config) {
            Ok(outcome) => {
                for v in &outcome.violations {
                    eprintln!("{v}");
                }
                println!("{}", outcome.output_dir.display());
                code(outcome.exit_code)
            }
            Err(e) => {
                eprintln!("error: {e}");
                // Numeric failures are reported like config errors, with their context.
                match e {
                    Error::Numeric { .. } | Error::Io(_) => ExitCode::FAILURE,
                    _ => code(EXIT_CONFIG),
                }
            }
        },
        Command::Compare { dir1, dir2 } => match harness::compare_runs(&dir1, &dir2) {
            Ok(report) => {
                print!("{report}");
                code(report.exit_code())
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Command::ListPresets => {
            for (name, description) in harness::list_presets() {
                println!("{name:<22}{description}");
            }
            ExitCode::SUCCESS
        }
    }
}
