//! Thin command-line surface over the experiment runner: a JSON scenario config
//! in, a deterministic CSV document out (stdout or `--out`).
//!
//! Exit codes: 0 on success, 2 when the configuration is unreadable or invalid
//! (including a config whose `mode` disagrees with the subcommand), 3 when a
//! solver or simulation fails outright.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use dps_games::experiment::{self, config_digest, Mode, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "dps-games",
    version,
    about = "Priority-pricing games on a shared-capacity queue: equilibria, \
             economics, and simulation cross-checks",
    after_help = "The scenario file is a JSON document whose `mode` field must \
                  match the subcommand; see README.md for the schema. A fixed \
                  (config, seed) pair always produces byte-identical output."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to the JSON scenario config (required).
    #[arg(long, global = true, value_name = "path")]
    config: Option<PathBuf>,

    /// Write the CSV here instead of stdout.
    #[arg(long, global = true, value_name = "path")]
    out: Option<PathBuf>,

    /// Override the config's rng_seed.
    #[arg(long, global = true, value_name = "u64")]
    seed: Option<u64>,

    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true, value_name = "n")]
    threads: Option<usize>,
}

/// One subcommand per run mode; the config's `mode` field must agree.
#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Sampled sweep: heavy-traffic equilibria vs exact ones, with boxplot rows.
    Compare,
    /// System cost, revenue, optimal cost, and price-of-anarchy bounds.
    Metrics,
    /// Analytic values vs simulation estimates under a chosen policy.
    Simulate,
    /// Job-level heavy-traffic equilibrium weights of one instance.
    Hte,
    /// Job-level exact equilibrium by best-response dynamics.
    ExactNe,
    /// Class-level exact equilibrium by best-response dynamics.
    ClassNe,
    /// Class-level equilibrium under the heavy-traffic approximation.
    ClassHte,
    /// Limiting strategy function and finite-game concentration gaps.
    Limiting,
    /// Multi-resource bidding equilibrium with certificates and bound.
    Network,
    /// Widening-ratio sequence showing the approximation error growing.
    DivergenceProbe,
}

impl Command {
    fn mode(self) -> Mode {
        match self {
            Command::Compare => Mode::Compare,
            Command::Metrics => Mode::Metrics,
            Command::Simulate => Mode::Simulate,
            Command::Hte => Mode::Hte,
            Command::ExactNe => Mode::ExactNe,
            Command::ClassNe => Mode::ClassNe,
            Command::ClassHte => Mode::ClassHte,
            Command::Limiting => Mode::Limiting,
            Command::Network => Mode::Network,
            Command::DivergenceProbe => Mode::DivergenceProbe,
        }
    }
}

fn main() {
    std::process::exit(execute(Cli::parse()));
}

fn execute(cli: Cli) -> i32 {
    if let Some(n) = cli.threads {
        // A second initialization (tests, embedding) is harmless: the pool from
        // the first call keeps serving.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    let Some(config_path) = cli.config else {
        eprintln!("error: --config <path> is required");
        return 2;
    };
    let bytes = match std::fs::read(&config_path) {
        Ok(bytes) => bytes,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return 2;
        }
    };
    let digest = config_digest(&bytes);
    let prepared = match ScenarioConfig::from_json(&bytes)
        .and_then(|config| experiment::prepare(config, cli.command.mode(), cli.seed))
    {
        Ok(prepared) => prepared,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let output = match experiment::run(&prepared, &digest) {
        Ok(output) => output,
        Err(e) => {
            eprintln!("error: {e}");
            return 3;
        }
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, output) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 3;
            }
        }
        None => print!("{output}"),
    }
    0
}
