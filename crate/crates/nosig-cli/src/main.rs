//! `nosig` — scenario-driven front-end for ensemble equivalence,
//! purification and no-signaling audits.
//!
//! Exit codes: 0 success, 1 configuration error, 2 precondition
//! violation, 3 signaling detected or consistency failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable, unparsable or incomplete scenario (exit 1).
    Config(String),
    /// A library precondition failed at run time (exit 2).
    Domain(nosig::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(msg) => write!(f, "configuration error: {msg}"),
            Self::Domain(e) => write!(f, "precondition violated: {e}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "nosig",
    about = "Construct equivalent quantum ensembles, purify and evolve them, and audit the dynamics for superluminal signaling",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV tables and summary.json.
    #[arg(long)]
    out: PathBuf,
    /// Override the scenario's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the joint purification of two equivalent ensembles.
    Purify(RunArgs),
    /// Evolve equivalent decompositions and flag any drift apart.
    Audit(RunArgs),
    /// Evolve one ensemble and write its states and densities over time.
    Evolve(RunArgs),
    /// Run the Alice/Bob protocol end to end and measure bit accuracy.
    Demo(RunArgs),
    /// Compare the jump unraveling's average against the master equation.
    UnravelCheck(RunArgs),
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("NOSIG_THREADS") {
        match value.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring NOSIG_THREADS={value}"),
        }
    }
}

type Runner = fn(&commands::Context) -> Result<u8, CliError>;

fn run(cmd: &Command) -> Result<u8, CliError> {
    let (args, runner): (&RunArgs, Runner) = match cmd {
        Command::Purify(a) => (a, commands::cmd_purify),
        Command::Audit(a) => (a, commands::cmd_audit),
        Command::Evolve(a) => (a, commands::cmd_evolve),
        Command::Demo(a) => (a, commands::cmd_demo),
        Command::UnravelCheck(a) => (a, commands::cmd_unravel_check),
    };
    let config = config::load(&args.config)?;
    let seed = args.seed.unwrap_or(config.seed);
    let ctx = commands::Context {
        out: output::OutDir::create(&args.out)?,
        config,
        seed,
    };
    runner(&ctx)
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("nosig: {e}");
            match e {
                CliError::Config(_) => ExitCode::from(1),
                CliError::Domain(_) => ExitCode::from(2),
            }
        }
    }
}
