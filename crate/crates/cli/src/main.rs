//! `sepdist`: runs the experiments and writes JSON or CSV traces.
//!
//! Exit status is 0 on success, 1 when an internal consistency check fails
//! and 2 on a usage error.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{
    BounceConfig, ContinuousConfig, NogoConfig, Outcome, SampledConfig, SweepConfig, TMax,
    TrotterConfig,
};
use output::{emit, Format};
use sepdist::contmodel::EvolutionMode;
use sepdist::Error;

#[derive(Parser, Debug)]
#[command(
    name = "sepdist",
    version,
    about = "Entanglement distribution with a separable ancilla"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Three-qubit protocol: CNOT steps, measurement and extraction.
    Discrete {
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Time trace of the continuous model.
    Continuous {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        alpha: f64,
        /// Final time, or `auto` for 2π/ε².
        #[arg(long, default_value = "auto", value_parser = TMax::parse)]
        t_max: TMax,
        #[arg(long, default_value_t = 500, value_parser = positive)]
        steps: usize,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
        /// Trotter steps for `--mode trotter`.
        #[arg(long, default_value_t = 256, value_parser = positive)]
        n_trotter: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Feasibility over an (ε, α) grid; ranges are `start:stop:count`.
    Sweep {
        #[arg(long, default_value = "0.02:0.2:10")]
        epsilon: String,
        #[arg(long, default_value = "0:20:40")]
        alpha: String,
        /// t_max = factor/ε²; defaults to 2π.
        #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
        t_max_factor: f64,
        #[arg(long, default_value_t = 500, value_parser = positive)]
        steps: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Trotter error against exact evolution, or with `--bounce` the
    /// step-by-step ancilla negativity.
    Trotter {
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Evolution time; defaults to 10, or 2π/ε² with `--bounce`.
        #[arg(long, value_parser = TMax::parse)]
        t_max: Option<TMax>,
        /// Comma-separated step counts; `--bounce` uses the largest.
        #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
        n_trotter: Vec<usize>,
        #[arg(long)]
        bounce: bool,
        /// Mixing parameter for `--bounce`.
        #[arg(long, default_value_t = 1.02564102564103)]
        alpha: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Kraus-map composition, randomized audits and the |+++⟩ demo.
    Channels {
        #[arg(long, default_value_t = 1000, value_parser = positive)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// First-order amplitude check for pure product states.
    Nogo {
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 1000, value_parser = positive)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Effective,
    Trotter,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("expected a positive integer, got '{s}'")),
    }
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BadEpsilon(_)
            | Error::BadAlpha(_)
            | Error::BadMode(_)
            | Error::InvalidArgument(_)
            | Error::BadPartition(_) => Failure::Usage(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("SEPDIST_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Usage(format!(
            "SEPDIST_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Internal(format!("could not size the thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(Outcome, OutputArgs), Failure> {
    configure_threads()?;
    let outcome = match cli.command {
        Command::Discrete { output } => (commands::discrete()?, output),
        Command::Continuous {
            epsilon,
            alpha,
            t_max,
            steps,
            mode,
            n_trotter,
            output,
        } => {
            let mode = match mode {
                ModeArg::Exact => EvolutionMode::Exact,
                ModeArg::Effective => EvolutionMode::Effective,
                ModeArg::Trotter => EvolutionMode::Trotter(n_trotter),
            };
            let cfg = ContinuousConfig {
                command: "continuous",
                epsilon,
                alpha,
                t_max: t_max.resolve(epsilon)?,
                steps,
                mode,
            };
            (commands::continuous(cfg)?, output)
        }
        Command::Sweep {
            epsilon,
            alpha,
            t_max_factor,
            steps,
            output,
        } => {
            let cfg = SweepConfig {
                command: "sweep",
                epsilon,
                alpha,
                t_max_factor,
                steps,
            };
            (commands::run_sweep(cfg)?, output)
        }
        Command::Trotter {
            epsilon,
            t_max,
            n_trotter,
            bounce,
            alpha,
            output,
        } => {
            if n_trotter.is_empty() || n_trotter.contains(&0) {
                return Err(Failure::Usage(
                    "--n-trotter needs positive step counts".into(),
                ));
            }
            if bounce {
                let cfg = BounceConfig {
                    command: "trotter",
                    bounce: true,
                    epsilon,
                    alpha,
                    t_max: t_max.unwrap_or(TMax::Auto).resolve(epsilon)?,
                    n_trotter: *n_trotter.iter().max().expect("non-empty"),
                };
                (commands::bounce(cfg)?, output)
            } else {
                let cfg = TrotterConfig {
                    command: "trotter",
                    epsilon,
                    t_max: t_max.unwrap_or(TMax::Value(10.0)).resolve(epsilon)?,
                    n_trotter,
                };
                (commands::trotter(cfg)?, output)
            }
        }
        Command::Channels {
            samples,
            seed,
            output,
        } => (
            commands::channels(SampledConfig {
                command: "channels",
                samples,
                seed,
            })?,
            output,
        ),
        Command::Nogo {
            epsilon,
            samples,
            seed,
            output,
        } => (
            commands::nogo(NogoConfig {
                command: "nogo",
                epsilon,
                samples,
                seed,
            })?,
            output,
        ),
    };
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((outcome, output)) => {
            let text = match outcome.report.render(output.format) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: could not render output: {e}");
                    return ExitCode::from(1);
                }
            };
            if let Err(e) = emit(&text, output.out.as_deref()) {
                eprintln!("error: could not write output: {e}");
                return ExitCode::from(1);
            }
            eprintln!("{}", outcome.summary);
            if outcome.consistent {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: consistency check failed");
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
