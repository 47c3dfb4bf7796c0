//! Command-line runner for sawtooth-map experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qsaw_core::config::parse_config;
use qsaw_core::presets::describe_catalog;
use qsaw_core::runner::{run_config, run_preset};

#[derive(Parser)]
#[command(name = "qsaw", version, about = "Dissipative quantum sawtooth map simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single experiment from a `key = value` configuration file.
    Run {
        /// Path to the configuration file.
        config: PathBuf,
    },
    /// Run a built-in preset (see `list-presets`).
    Preset {
        /// Preset name, e.g. `fig1`.
        name: String,
        /// Output directory override.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker thread count override.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the preset catalog with full parameter sets.
    ListPresets,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> qsaw_core::Result<()> {
    match cli.command {
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg = parse_config(&text)?;
            let outputs = run_config(&cfg)?;
            println!("{}", outputs.summary);
            for file in &outputs.files {
                println!("wrote {}", file.display());
            }
            Ok(())
        }
        Command::Preset { name, out, seed, threads } => {
            let outputs = run_preset(&name, out.as_deref(), seed, threads)?;
            println!("{}", outputs.summary);
            for file in &outputs.files {
                println!("wrote {}", file.display());
            }
            Ok(())
        }
        Command::ListPresets => {
            print!("{}", describe_catalog());
            Ok(())
        }
    }
}
