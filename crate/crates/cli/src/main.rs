use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use erasetest_cli::commands::{self, CliError, StepSelector, Truth, EXIT_CHECK_FAILED};
use erasetest_cli::paper_check::{self, Fixture};
use erasetest_cli::render::Format;

/// Sequential measurement chains under the separate and functional models.
#[derive(Parser)]
#[command(name = "erasetest", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact outcome distribution of a scenario file.
    Analytic {
        file: PathBuf,
        /// Marginalize onto one labeled step (0-based, skip steps not counted) or `last`.
        #[arg(long)]
        marginal: Option<StepSelector>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Seeded Monte Carlo counts beside the analytic prediction.
    Sample {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long)]
        marginal: Option<StepSelector>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Simulated likelihood-ratio test between two rival scenario files.
    Discriminate {
        file_a: PathBuf,
        file_b: PathBuf,
        /// Which file's model generates the samples.
        #[arg(long, value_enum)]
        truth: Truth,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Run the built-in reproduction checks.
    PaperCheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Analytic { file, marginal, format } => {
            let loaded = commands::load(&file)?;
            commands::analytic(&loaded.scenario, marginal, format)
        }
        Command::Sample {
            file,
            seed,
            n,
            marginal,
            format,
        } => {
            let loaded = commands::load(&file)?;
            commands::sample(&loaded.scenario, seed, n, marginal, format)
        }
        Command::Discriminate {
            file_a,
            file_b,
            truth,
            alpha,
            seed,
            format,
        } => {
            let a = commands::load(&file_a)?;
            let b = commands::load(&file_b)?;
            commands::discriminate(&a.scenario, &b.scenario, truth, alpha, seed, format)
        }
        Command::PaperCheck { seed } => {
            let results = paper_check::run(&Fixture {
                seed,
                ..Fixture::default()
            });
            let report = paper_check::render(&results);
            if results.iter().all(|r| r.pass) {
                Ok(report)
            } else {
                print!("{report}");
                Err(CliError {
                    code: EXIT_CHECK_FAILED,
                    message: "paper-check failed".into(),
                })
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
