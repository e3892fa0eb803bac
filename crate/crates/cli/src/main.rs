#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dynstc_cli::{cmd_bench, cmd_certify, cmd_simulate, CommandArgs};

#[derive(Parser)]
#[command(
    name = "dynstc",
    version,
    about = "Dynamic self-triggered control toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize and verify a certificate bank
    Certify(Flags),
    /// Simulate one experiment and check the flow bounds
    Simulate(Flags),
    /// Run a set of experiments and print a comparison table
    Bench(Flags),
}

#[derive(Args)]
struct Flags {
    /// Experiment (certify, simulate) or bench configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Certificate bank file to write (certify) or read
    #[arg(long)]
    bank: Option<PathBuf>,
    /// Seed of the Monte-Carlo certificate verification
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Integration step override
    #[arg(long)]
    dt: Option<f64>,
}

impl From<Flags> for CommandArgs {
    fn from(f: Flags) -> Self {
        Self {
            config: f.config,
            out: f.out,
            bank: f.bank,
            seed: f.seed,
            dt: f.dt,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Certify(flags) => cmd_certify(&flags.into()).map(|out| {
            print!("{}", out.table);
            println!("bank written to {}", out.bank_path.display());
        }),
        Command::Simulate(flags) => cmd_simulate(&flags.into()).map(|run| {
            println!(
                "{}: {} events, intervals [{:.5}, {:.5}], final V {:.4e}, flow bounds ok",
                run.name,
                run.summary.num_events,
                run.summary.min_interval,
                run.summary.max_interval,
                run.summary.final_v
            );
        }),
        Command::Bench(flags) => cmd_bench(&flags.into()).map(|out| print!("{}", out.table)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
