use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use adhoc_cloud::cli;

#[derive(Parser)]
#[command(name = "adhoc-cloud", about = "Ad hoc cloud control-plane simulator")]
struct Args {
    #[command(subcommand)]
    command: CommandLine,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Subcommand)]
enum CommandLine {
    /// Run one experiment from a config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override snapshot replication (off = restart-only baseline).
        #[arg(long)]
        replication: Option<Switch>,
        /// Directory for config.toml, events.log and metrics files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seed range crossed with config-override grid axes.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Inclusive seed range, e.g. 0..19.
        #[arg(long)]
        seeds: String,
        /// Config override axis, e.g. placement.threshold=0.05,0.1
        /// (repeatable).
        #[arg(long)]
        grid: Vec<String>,
        /// Directory for per-run metrics and the sweep manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic host-churn trace.
    GenTrace {
        #[arg(long)]
        hosts: usize,
        /// Trace length, seconds.
        #[arg(long)]
        horizon: f64,
        /// Mean up-time, seconds.
        #[arg(long)]
        mtbf: f64,
        /// Mean down-time, seconds.
        #[arg(long)]
        mttr: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(args: Args) -> anyhow::Result<()> {
    match args.command {
        CommandLine::Simulate {
            config,
            seed,
            replication,
            out,
        } => {
            let replication = replication.map(|s| matches!(s, Switch::On));
            cli::run_simulate(&config, seed, replication, out.as_deref())?;
        }
        CommandLine::Sweep {
            config,
            seeds,
            grid,
            out,
        } => {
            let seeds = cli::parse_seed_range(&seeds)?;
            let grid: Vec<cli::GridAxis> = grid
                .iter()
                .map(|g| cli::parse_grid_axis(g))
                .collect::<anyhow::Result<_>>()?;
            cli::run_sweep(&config, seeds, &grid, out.as_deref())?;
        }
        CommandLine::GenTrace {
            hosts,
            horizon,
            mtbf,
            mttr,
            seed,
            out,
        } => {
            cli::run_gen_trace(hosts, horizon, mtbf, mttr, seed, &out)?;
        }
    }
    Ok(())
}

/// Exit codes: 0 success, 1 validation error (arguments or config), 2
/// runtime error.
fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(err) if err.use_stderr() => {
            let _ = err.print();
            return ExitCode::from(1);
        }
        Err(help_or_version) => {
            let _ = help_or_version.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_validation(&err) {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn is_validation(err: &anyhow::Error) -> bool {
    use adhoc_cloud::config::ConfigError;
    use adhoc_cloud::sim::SimError;
    use adhoc_cloud::trace::TraceError;
    err.chain().any(|cause| {
        cause.is::<ConfigError>()
            || matches!(
                cause.downcast_ref::<SimError>(),
                Some(SimError::Config(_))
            )
            || matches!(
                cause.downcast_ref::<TraceError>(),
                Some(
                    TraceError::BadParameter(_)
                        | TraceError::Parse { .. }
                        | TraceError::NonAlternating(..)
                        | TraceError::WindowTooShort(..)
                )
            )
            || cause.is::<cli::ArgumentError>()
    })
}
