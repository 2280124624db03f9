use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use metapersuasion::harness::{self, ExperimentConfig, Family};
use metapersuasion::Error;

#[derive(Parser)]
#[command(version, about = "Meta-persuasion experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write raw.csv, summary.csv and ledger.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
        /// Output directory (overrides the config's, relative to the working directory).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        family: Option<String>,
    },
    /// Write plots.json next to a ledger.
    EmitPlots {
        #[arg(long)]
        ledger: PathBuf,
    },
    /// Check a configuration and its environment file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            config,
            seed,
            reps,
            out,
            family,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = reps {
                cfg.replications = r;
            }
            if let Some(f) = family {
                cfg.family = f.parse::<Family>()?;
            }
            if let Some(o) = out {
                cfg.output = std::env::current_dir()?.join(o);
            }
            let result = harness::run(&cfg)?;
            let dir = cfg.output_dir();
            harness::write_outputs(&dir, &result)?;
            for arm in &result.ledger.arms {
                let last = cfg.tasks - 1;
                match &arm.violation {
                    Some(v) => println!(
                        "{} {:>8}: task-averaged regret {:.6} ± {:.6}, violation {:.6} ± {:.6}",
                        cfg.family, arm.arm, arm.regret.mean[last], arm.regret.std[last], v.mean[last], v.std[last]
                    ),
                    None => println!(
                        "{} {:>8}: task-averaged regret {:.6} ± {:.6}",
                        cfg.family, arm.arm, arm.regret.mean[last], arm.regret.std[last]
                    ),
                }
            }
            println!("wrote {}", dir.display());
        }
        Command::EmitPlots { ledger } => {
            let path = harness::emit_plots(&ledger)?;
            println!("wrote {}", path.display());
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            cfg.validate()?;
            println!("{}: ok ({}, {} tasks × {} rounds, {} replications)", config.display(), cfg.family, cfg.tasks, cfg.rounds, cfg.replications);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
