use clap::{Parser, Subcommand};

use polfid::cli::{cmd_avg, cmd_check, cmd_mc, cmd_protocol};
use polfid::states::DEFAULT_TOL;

/// Average fidelity of n-qubit channels against a target unitary.
#[derive(Parser)]
#[command(name = "polfid", version)]
struct Cli {
    /// Validation tolerance for unitarity, trace preservation and states.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form average fidelity.
    Avg { spec: String },
    /// Monte-Carlo estimate over Haar-random input states.
    Mc {
        spec: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Drawn at random and reported when absent.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write the pure-state measurement protocol.
    Protocol {
        spec: String,
        #[arg(long)]
        out: String,
    },
    /// Report unitarity, trace-preservation and output-state checks.
    Check { spec: String },
}

fn main() {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Avg { spec } => cmd_avg(spec, cli.tol),
        Command::Mc {
            spec,
            samples,
            seed,
        } => cmd_mc(spec, *samples, *seed, cli.tol),
        Command::Protocol { spec, out } => cmd_protocol(spec, out, cli.tol),
        Command::Check { spec } => cmd_check(spec, cli.tol),
    };
    if !outcome.stdout.is_empty() {
        println!("{}", outcome.stdout);
    }
    if !outcome.stderr.is_empty() {
        eprintln!("{}", outcome.stderr);
    }
    std::process::exit(outcome.code);
}
