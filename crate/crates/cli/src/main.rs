use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shiftknn_cli::commands::{
    cmd_check, cmd_compare, cmd_rates, cmd_simulate, parse_family, RunOptions,
};
use shiftknn_cli::Failure;

/// Local k-NN regression under covariate shift: rates, simulations and
/// assumption diagnostics.
#[derive(Parser)]
#[command(name = "shiftknn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config output path.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads, 0 for one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    test_count: Option<usize>,
}

impl RunArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            seed: self.seed,
            output: self.output.clone(),
            threads: self.threads,
            replicates: self.replicates,
            test_count: self.test_count,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Theoretical exponents of the standard and local estimators.
    #[command(allow_negative_numbers = true)]
    Rates {
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        /// Source design, e.g. `pareto:1`; with --target fills in γ and ρ.
        #[arg(long, requires = "target")]
        source: Option<String>,
        #[arg(long, requires = "source")]
        target: Option<String>,
    },
    /// Monte Carlo risk curve and fitted exponent for a config.
    Simulate(RunArgs),
    /// Several estimators on identical data.
    Compare(RunArgs),
    /// Density-ratio, pseudo-moment and mass-property diagnostics.
    #[command(allow_negative_numbers = true)]
    Check {
        /// e.g. `exponential:1`, `pareto:1`, `gaussian:0:1`, `uniform:0:1`.
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
    },
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Rates {
            beta,
            d,
            gamma,
            rho,
            source,
            target,
        } => {
            let pair = match (source, target) {
                (Some(s), Some(t)) => Some((
                    parse_family(&s).map_err(Failure::usage)?,
                    parse_family(&t).map_err(Failure::usage)?,
                )),
                _ => None,
            };
            cmd_rates(beta, d, gamma, rho, pair, &mut out)
        }
        Command::Simulate(args) => cmd_simulate(&args.config, &args.options(), &mut out),
        Command::Compare(args) => cmd_compare(&args.config, &args.options(), &mut out),
        Command::Check {
            source,
            target,
            gamma,
            rho,
        } => {
            let s = parse_family(&source).map_err(Failure::usage)?;
            let t = parse_family(&target).map_err(Failure::usage)?;
            cmd_check(&s, &t, gamma, rho, &mut out)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
