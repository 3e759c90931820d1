use std::path::PathBuf;
use std::process::ExitCode;

use bohm_rotor_cli::{config_with_preset, list_presets, parse_config, run_scenario, CliError};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bohm-rotor", about = "Bohm trajectories of the quantum kicked rotor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its CSV files and summary.
    Run {
        /// Scenario document (TOML).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Built-in preset to start from; the config document, if any, is merged over it.
        #[arg(long)]
        preset: Option<String>,
        /// Output directory, replacing `run.out_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed, replacing `run.seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the built-in presets.
    Presets,
    /// Print the version.
    Version,
}

fn run(config: Option<PathBuf>, preset: Option<String>, out: Option<PathBuf>, seed: Option<u64>) -> Result<(), CliError> {
    let text = match &config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?),
        None => None,
    };
    let mut cfg = match (&preset, &text) {
        (Some(name), _) => config_with_preset(name, text.as_deref())?,
        (None, Some(t)) => parse_config(t)?,
        (None, None) => {
            return Err(CliError::Validation {
                field: "--config".into(),
                message: "give --config, --preset or both".into(),
            })
        }
    };
    if let Some(out) = out {
        cfg.run.out_dir = out;
    }
    if let Some(seed) = seed {
        cfg.run.seed = seed;
    }
    let artifacts = run_scenario(&cfg)?;
    for f in &artifacts.files {
        println!("{}", f.display());
    }
    for d in &artifacts.summary.results.divergence {
        println!(
            "pair {:?}: {} (rate {:.4} per period, growth {:.3e})",
            d.pair, d.verdict, d.rate_per_period, d.growth
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Presets => {
            for p in list_presets() {
                println!("{:<18} {}", p.name, p.description);
            }
            ExitCode::SUCCESS
        }
        Command::Version => {
            println!("bohm-rotor {}", env!("CARGO_PKG_VERSION"));
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            preset,
            out,
            seed,
        } => match run(config, preset, out, seed) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
    }
}
