use std::path::PathBuf;
use std::process::ExitCode;

use aoc_cli::commands::{self, RunOptions};
use aoc_cli::{configure_threads, CliError};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aoc", version, about = "Age-of-information bounds and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct Output {
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Overrides the scenario's simulation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Leave out creation timestamps and runtimes so reruns are byte-identical.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Optimized bounds, one row per (w, ε, m).
    Bound(Common),
    /// Simulated AoI and delay samples with quantile summary.
    Simulate(Common),
    /// Bounds against simulated quantiles; exit 1 on a violation.
    Compare(Common),
    /// Writes and runs a built-in scenario (fig3, fig4, fig5, fig6).
    Preset {
        name: String,
        #[command(flatten)]
        output: Output,
    },
    /// Bounds over the w grid plus plot data and minimizers.
    Sweep(Common),
}

fn options(o: Output) -> RunOptions {
    RunOptions { out: o.out, seed: o.seed, deterministic: o.deterministic }
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads(std::env::var("AOC_THREADS").ok().as_deref())?;
    match cli.command {
        Command::Preset { name, output } => commands::preset(&name, &options(output)),
        Command::Bound(c) => with_scenario(c, commands::bound),
        Command::Simulate(c) => with_scenario(c, commands::simulate),
        Command::Compare(c) => with_scenario(c, commands::compare),
        Command::Sweep(c) => with_scenario(c, commands::sweep),
    }
}

fn with_scenario(
    c: Common,
    f: fn(&aoc_cli::scenario::Scenario, &RunOptions) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let sc = commands::load_scenario(&c.scenario)?;
    f(&sc, &options(c.output))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aoc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
