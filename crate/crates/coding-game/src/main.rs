use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coding_game::commands::{self, Outcome};
use coding_game::config::{Format, Overrides, RunConfig};
use coding_game::output::write_all;
use coding_game::CliResult;

#[derive(Parser, Debug)]
#[command(author, version, about = "Equilibria, simulation and learning for the coding game")]
struct Args {
    /// JSON run config. Without one, defaults are used.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (default `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// `start:stop:step`, a comma list, or a single value.
    #[arg(long, global = true)]
    eta_grid: Option<String>,

    #[arg(long, global = true)]
    rounds: Option<u64>,

    /// Comma-separated clone counts for `sybil`.
    #[arg(long, global = true, value_delimiter = ',')]
    clones: Option<Vec<u32>>,

    /// Learner gap parameter.
    #[arg(long, global = true)]
    lambda: Option<f64>,

    /// Learner failure probability.
    #[arg(long, global = true)]
    delta: Option<f64>,

    #[arg(long, global = true)]
    k_override: Option<u64>,

    #[arg(long, global = true)]
    n_override: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Tabulate h, its envelope and c over the eta grid.
    Curve,
    /// Solve the pessimistic Stackelberg game over the eta grid.
    Equilibrium,
    /// Construct the optimal noise distribution.
    Noise,
    /// Monte Carlo estimate of PA and MSE.
    Simulate,
    /// Check that cloned adversaries change nothing.
    Sybil,
    /// Learn eta against a myopic adversary.
    Learn,
    /// Check the utility pair for monotonicity.
    ValidateUtility,
}

fn run(args: Args) -> CliResult<Outcome> {
    let mut cfg = match args.config {
        Some(ref p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply(&Overrides {
        seed: args.seed,
        out: args.out,
        format: args.format,
        eta_grid: args.eta_grid,
        rounds: args.rounds,
        clones: args.clones,
        lambda: args.lambda,
        delta: args.delta,
        k_override: args.k_override,
        n_override: args.n_override,
    })?;
    let outcome = match args.command {
        Command::Curve => commands::curve(&cfg)?,
        Command::Equilibrium => commands::equilibrium(&cfg)?,
        Command::Noise => commands::noise(&cfg)?,
        Command::Simulate => commands::simulate(&cfg)?,
        Command::Sybil => commands::sybil(&cfg)?,
        Command::Learn => commands::learn(&cfg)?,
        Command::ValidateUtility => commands::validate_utility(&cfg)?,
    };
    let written = write_all(&cfg.out_dir(), &outcome.artifacts, cfg.format())?;
    for p in &written {
        eprintln!("wrote {}", p.display());
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
