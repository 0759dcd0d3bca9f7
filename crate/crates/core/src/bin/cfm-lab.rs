use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cfm_lab::cli::{cmd_simulate, cmd_sweep, cmd_verify, RunArgs};
use cfm_lab::verify::VerifyOptions;

#[derive(Parser)]
#[command(name = "cfm-lab", version, about = "Constant function market fee-income simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one path and write per-step telemetry to steps.csv.
    Simulate(Run),
    /// Run every (gamma, sigma, lambda) cell and write sweep.csv.
    Sweep(Run),
    /// Run the property suites.
    Verify {
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Smaller sample sizes.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Args)]
struct Run {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    /// KEY=VALUE, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl From<Run> for RunArgs {
    fn from(run: Run) -> Self {
        RunArgs {
            config: run.config,
            out: run.out,
            seed: run.seed,
            paths: run.paths,
            set: run.set,
        }
    }
}

fn main() -> ExitCode {
    let code = match Cli::parse().command {
        Command::Simulate(run) => cmd_simulate(&run.into()),
        Command::Sweep(run) => cmd_sweep(&run.into()),
        Command::Verify { out, quick } => {
            let opts = if quick { VerifyOptions::quick() } else { VerifyOptions::default() };
            cmd_verify(&out, &opts)
        }
    };
    ExitCode::from(code as u8)
}
