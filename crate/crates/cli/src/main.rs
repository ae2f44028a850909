use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ipec::{Mode, Strategy};
use ipec_cli::commands::{self, RunArgs};
use ipec_cli::config::{ConfigError, Overrides};

#[derive(Parser)]
#[command(name = "ipec", version, about = "Few-shot inference with incrementally enhanced prototypes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment(s) described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        strategy: Option<Strategy>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long = "tau-prime")]
        tau_prime: Option<f64>,
        #[arg(long)]
        warmup: Option<u64>,
        #[arg(long)]
        batches: Option<u64>,
        /// Parallel runs within a sweep.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Tabulate finished runs and write comparison.csv.
    Compare {
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        #[arg(long, default_value = "comparison.csv")]
        out: PathBuf,
    },
    /// Run the acceptance suite.
    Accept {
        /// Only run these criterion ids.
        #[arg(long = "criterion")]
        only: Vec<u8>,
    },
}

fn exit_for(err: anyhow::Error) -> ExitCode {
    eprintln!("error: {err:#}");
    if err.downcast_ref::<ConfigError>().is_some() {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            mode,
            strategy,
            tau,
            tau_prime,
            warmup,
            batches,
            jobs,
        } => {
            let args = RunArgs {
                config,
                out,
                overrides: Overrides {
                    seed,
                    mode,
                    strategy,
                    tau,
                    tau_prime,
                    warmup,
                    batches,
                },
                jobs,
            };
            match commands::run(&args) {
                Ok(_) => ExitCode::SUCCESS,
                Err(e) => exit_for(e),
            }
        }
        Command::Compare { runs, out } => match commands::compare(&runs, &out) {
            Ok(_) => ExitCode::SUCCESS,
            Err(e) => exit_for(e),
        },
        Command::Accept { only } => {
            if commands::accept(&only) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
