//! `tribody`: simulation, identity checks, syzygy analysis and orbit search
//! for the planar three-body problem with homogeneous pair potentials.
//!
//! Exit status is 0 when every check passes, 1 when a check fails and 2 when
//! the configuration or the command line is rejected.

mod commands;
mod config;
mod report;

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::verify::Mode;
use config::{ConfigError, Initial, RunConfig};

#[derive(Parser)]
#[command(name = "tribody", version, about = "Planar three-body toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured initial state and write trajectory.csv.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check geometric identities; `--scaled` and `--constants` select the
    /// scaled-variable and conserved-quantity suites.
    Verify {
        #[arg(long, conflicts_with = "constants")]
        scaled: bool,
        #[arg(long)]
        constants: bool,
        #[arg(long)]
        config: PathBuf,
    },
    /// List collinear instants and certify the gaps between them.
    Syzygy {
        #[arg(long)]
        config: PathBuf,
    },
    /// Refine figure-eight guesses and append certified orbits to a library.
    FindOrbit {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long)]
        guess: PathBuf,
        #[arg(long)]
        library: PathBuf,
    },
    /// Sample and verify algebraic similarity instances.
    #[command(name = "theorem5-fuzz")]
    Theorem5Fuzz {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
    },
}

enum Failure {
    Config(ConfigError),
    Numeric(tribody::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<tribody::Error> for Failure {
    fn from(e: tribody::Error) -> Self {
        Failure::Numeric(e)
    }
}

fn load(path: &Path, needs_trajectory: bool, name: &str) -> Result<RunConfig, ConfigError> {
    let cfg = config::load(path)?;
    let has_span = cfg.t_end.is_some() || !matches!(cfg.initial, Initial::State(_));
    if needs_trajectory && !has_span {
        return Err(ConfigError {
            path: path.to_path_buf(),
            line: None,
            message: format!("{name} needs a [span] section or a library record"),
        });
    }
    Ok(cfg)
}

fn dispatch(cmd: Command, out: &mut impl Write) -> Result<bool, Failure> {
    Ok(match cmd {
        Command::Simulate { config, out: dir } => {
            let cfg = load(&config, true, "simulate")?;
            if matches!(cfg.initial, Initial::Trajectory(_)) {
                return Err(ConfigError {
                    path: config,
                    line: None,
                    message: "simulate needs an initial state, not a trajectory".into(),
                }
                .into());
            }
            commands::simulate::run(&cfg, &dir, out)?
        }
        Command::Verify {
            scaled,
            constants,
            config,
        } => {
            let mode = match (scaled, constants) {
                (true, _) => Mode::Scaled,
                (_, true) => Mode::Constants,
                _ => Mode::Plain,
            };
            let cfg = load(&config, mode == Mode::Constants, "verify --constants")?;
            commands::verify::run(&cfg, mode, out)?
        }
        Command::Syzygy { config } => {
            let cfg = load(&config, true, "syzygy")?;
            commands::syzygy::run(&cfg, out)?
        }
        Command::FindOrbit { alpha, guess, library } => commands::find_orbit::run(alpha, &guess, &library, out)?,
        Command::Theorem5Fuzz { n, seed } => commands::fuzz::run(n, seed, out)?,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = match dispatch(cli.command, &mut out) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Numeric(e)) => {
            let _ = writeln!(out, "theorem=run pair=- error=\"{e}\" status=FAIL");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    };
    let _ = out.flush();
    code
}
