use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vlab_cli::{ladder, ladder_json, ladder_table, list_table, parse_seed_override, run, CliError, Config, RunOptions};

#[derive(Parser)]
#[command(name = "vlab", version, about = "Run virtual-level scenarios and emit reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every scenario in a configuration.
    Run {
        config: PathBuf,
        /// Also write an SVG per scenario that has one.
        #[arg(long)]
        plots: bool,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value = "vlab-out")]
        out: PathBuf,
    },
    /// Print the scenarios of a configuration without running them.
    List { config: PathBuf },
    /// Print the separation constant ladder for a mass system.
    Ladder {
        /// Particle masses, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        masses: Vec<f64>,
        /// Spatial dimension.
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        lmax: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        kappa1: f64,
        #[arg(long, default_value_t = 0.5)]
        kappa1_prime: f64,
        #[arg(long)]
        json: bool,
    },
}

fn load(path: &PathBuf) -> Result<Config, CliError> {
    let mut config = Config::load(path)?;
    if let Ok(v) = std::env::var(vlab_cli::SEED_OVERRIDE_VAR) {
        config.override_seeds(parse_seed_override(&v)?);
    }
    Ok(config)
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { config, plots, jobs, out } => {
            let config = load(&config)?;
            let reports = run(&config, &RunOptions { out, jobs, plots })?;
            Ok(vlab_cli::runner::exit_code(&reports))
        }
        Command::List { config } => {
            print!("{}", list_table(&load(&config)?));
            Ok(0)
        }
        Command::Ladder {
            masses,
            n,
            lmax,
            kappa1,
            kappa1_prime,
            json,
        } => {
            let l_max = lmax.unwrap_or(masses.len().saturating_sub(1));
            let ladder = ladder(n, masses, l_max, kappa1, kappa1_prime)?;
            print!("{}", if json { ladder_json(&ladder) } else { ladder_table(&ladder) });
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("vlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
