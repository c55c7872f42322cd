//! Command-line entry point: run benchmark suites, single episodes, and
//! trace validation.
//!
//! Exit codes: 0 success, 1 invalid config, 2 placement failure,
//! 3 validation failure.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use crowdbench::bench::suite::{PolicySpec, SuiteConfig};
use crowdbench::bench::trace::{read_trace_file, TraceHeader};
use crowdbench::bench::validate::validate_trace;
use crowdbench::bench::{run_episode, BenchError};
use crowdbench::sim::SimError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bench", about = "Crowd navigation benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full benchmark suite from a config file.
    Run(RunArgs),
    /// Run a single episode and write its trace.
    Episode(EpisodeArgs),
    /// Re-check the invariants of a trace file.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Suite config file (TOML).
    #[arg(long)]
    suite: PathBuf,
    /// Output directory; overrides the suite file's out_dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EpisodeArgs {
    /// Base policy.
    #[arg(long, value_parser = ["orca", "sf"])]
    policy: String,
    /// Wrap the base policy with tangent group avoidance.
    #[arg(long)]
    taga: bool,
    /// Scenario seed.
    #[arg(long)]
    seed: u64,
    /// Disable termination on group intrusion.
    #[arg(long)]
    no_group_termination: bool,
    /// Optional config file (same format as a suite file) for overrides.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Trace output path (defaults to trace_<policy>_<seed>.jsonl).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Trace file to check.
    #[arg(long)]
    trace: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Placement(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(3)
        }
    }
}

enum CliError {
    Config(String),
    Placement(String),
    Validation(String),
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Sim(SimError::PlacementFailure { .. }) => {
                CliError::Placement(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => run_suite_cmd(args),
        Command::Episode(args) => run_episode_cmd(args),
        Command::Validate(args) => validate_cmd(args),
    }
}

fn run_suite_cmd(args: RunArgs) -> Result<(), CliError> {
    let config = SuiteConfig::load(&args.suite)?;
    let out_dir = args
        .out
        .unwrap_or_else(|| PathBuf::from(&config.suite.out_dir));
    let results = crowdbench::bench::suite::run_suite(&config, &out_dir)?;
    print!("{}", crowdbench::bench::suite::summary_table(&results));
    eprintln!(
        "wrote {} cells x {} episodes to {}",
        results.len(),
        config.suite.episodes,
        out_dir.display()
    );
    Ok(())
}

fn run_episode_cmd(args: EpisodeArgs) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(path) => SuiteConfig::load(path)?,
        None => SuiteConfig::default(),
    };
    if args.no_group_termination {
        config.scenario.terminate_on_group_intrusion = false;
    }
    config.validate()?;

    let cell = if args.taga {
        format!("{}+taga", args.policy)
    } else {
        args.policy.clone()
    };
    let spec = PolicySpec::parse(&cell)?;
    let mut policy = config.build_policy(spec);
    let (report, steps) = run_episode(&config.scenario, policy.as_mut(), args.seed)?;

    let world0 = crowdbench::sim::generate_scenario(&config.scenario, args.seed)
        .map_err(|e| CliError::Placement(e.to_string()))?;
    let header = TraceHeader::new(
        spec.name(),
        config.scenario.clone(),
        spec.taga.then_some(config.taga),
        config.orca,
        config.sf,
        &world0,
        &report,
    );
    let trace_path = args
        .trace
        .unwrap_or_else(|| PathBuf::from(format!("trace_{}_{}.jsonl", spec.name(), args.seed)));
    crowdbench::bench::trace::write_trace_file(&trace_path, &header, &steps)?;

    println!(
        "policy={} seed={} outcome={:?} steps={} nav_time={:.2}s path={:.2}m group_time_fraction={:.4}",
        spec.name(),
        args.seed,
        report.outcome.kind,
        report.outcome.terminal_step,
        report.nav_time,
        report.path_length,
        report.gcr_fraction,
    );
    eprintln!("trace written to {}", trace_path.display());
    Ok(())
}

fn validate_cmd(args: ValidateArgs) -> Result<(), CliError> {
    let (header, steps) =
        read_trace_file(&args.trace).map_err(|e| CliError::Config(e.to_string()))?;
    match validate_trace(&header, &steps) {
        Ok(report) => {
            println!(
                "ok: {} steps, {} group checks, outcome {:?}",
                report.steps, report.group_checks, header.outcome.kind
            );
            Ok(())
        }
        Err(e) => Err(CliError::Validation(e.to_string())),
    }
}
