//! `lorentz-compare`: runs one configured experiment and writes its reports.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lorentz_comparison::experiment::{emit, run, ExperimentConfig, ExperimentKind, Overlay};
use lorentz_comparison::Error;

#[derive(Parser)]
#[command(name = "lorentz-compare", version, about = "Comparison-geometry experiments in model spacetimes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the sampling and plane seeds.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (overrides output.path).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Margin tolerance (overrides tolerances.margin).
        #[arg(long, allow_negative_numbers = true)]
        tol: Option<f64>,
    },
    /// List the available experiments.
    List,
}

fn execute(config: PathBuf, overlay: Overlay) -> Result<i32, Error> {
    let mut cfg = ExperimentConfig::load(&config)?;
    cfg.apply(&overlay);
    let outcome = run(&cfg)?;
    let written = emit(&outcome, &cfg.output)?;
    print!("{}", outcome.summary());
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for k in ExperimentKind::ALL {
                println!("{:<20} {}", k.name(), k.summary());
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, seed, out, tol } => {
            let code = execute(config, Overlay { seed, out, tol }).unwrap_or_else(|e| {
                eprintln!("error: {e}");
                e.exit_code()
            });
            ExitCode::from(code as u8)
        }
    }
}
