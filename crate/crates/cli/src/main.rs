//! `osea` command-line tool: inspect, solve, run the scaling ensemble
//! heuristic, and benchmark it against plain branch-and-bound.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use osea::Budget;

#[derive(Debug, Parser)]
#[command(name = "osea", version, about = "MILP toolkit with the objective scaling ensemble heuristic")]
struct Cli {
    /// Log verbosity; overrides the OSEA_LOG environment variable.
    #[arg(long, global = true, value_enum)]
    log_level: Option<LogLevel>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LogLevel {
    Off,
    Error,
    Warn,
    Info,
    Debug,
    Trace,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse an MPS file and print its dimensions and class.
    Check(CheckArgs),
    /// Solve with branch-and-bound.
    Solve(SolveArgs),
    /// Run the objective scaling ensemble heuristic.
    Osea(OseaArgs),
    /// Compare methods on a set of instances.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// MPS file (optionally gzipped), or `-` for standard input.
    path: PathBuf,
    /// Treat marked integer columns without bounds as binary.
    #[arg(long)]
    legacy_integer_bounds: bool,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Budget as seconds (`30`, `2.5`) or nodes (`500nodes`).
    #[arg(long, conflicts_with = "node_limit")]
    time_limit: Option<Budget>,
    /// Maximum number of branch-and-bound nodes.
    #[arg(long)]
    node_limit: Option<u64>,
    /// Relative gap at which nodes are pruned.
    #[arg(long, default_value_t = 1e-6)]
    gap_tol: f64,
    /// Write `name value` lines for the nonzero variables of the solution.
    #[arg(long)]
    write_sol: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OseaArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Overall budget, seconds or `<n>nodes`.
    #[arg(long, default_value = "60")]
    total_budget: Budget,
    /// Budget of the seeding branch-and-bound run.
    #[arg(long, default_value = "1")]
    incumbent_budget: Budget,
    /// Maximum number of scaling LP solves.
    #[arg(long, default_value_t = 50)]
    nmax: usize,
    /// Values above this count as used by the update and fixing rules.
    #[arg(long, default_value_t = 1e-9)]
    support_tol: f64,
    /// Separate cap on the scaling phase in seconds.
    #[arg(long)]
    scaling_budget: Option<f64>,
    /// Rule choosing which scaling iterates join the ensemble.
    #[arg(long, default_value = "best-worst-median")]
    subset_rule: String,
    /// Solve every scaling LP from scratch.
    #[arg(long)]
    no_warm_start: bool,
    /// Write the full result as JSON.
    #[arg(long)]
    report_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Directory of MPS files, or a manifest listing one path per line.
    input: Option<PathBuf>,
    /// Generate instances instead, e.g. `count=20,n=15..25`.
    #[arg(long, conflicts_with = "input")]
    generate: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for the CSV reports.
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
    /// Per-method budget, seconds or `<n>nodes`.
    #[arg(long, default_value = "60")]
    total_budget: Budget,
    #[arg(long, default_value = "1")]
    incumbent_budget: Budget,
    /// Limit for the reference solve that supplies the gap bound.
    #[arg(long)]
    oracle_budget: Option<Budget>,
    #[arg(long, default_value_t = 50)]
    nmax: usize,
    /// Comma-separated method names.
    #[arg(long, default_value = "OSEA,Standard", value_delimiter = ',')]
    methods: Vec<String>,
    /// Instances solved in parallel.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

fn init_logging(level: Option<LogLevel>) {
    let mut builder =
        env_logger::Builder::from_env(env_logger::Env::new().filter_or("OSEA_LOG", "warn"));
    if let Some(level) = level {
        builder.filter_level(match level {
            LogLevel::Off => log::LevelFilter::Off,
            LogLevel::Error => log::LevelFilter::Error,
            LogLevel::Warn => log::LevelFilter::Warn,
            LogLevel::Info => log::LevelFilter::Info,
            LogLevel::Debug => log::LevelFilter::Debug,
            LogLevel::Trace => log::LevelFilter::Trace,
        });
    }
    builder.format_timestamp(None).init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { commands::EXIT_INPUT } else { 0 });
        }
    };
    init_logging(cli.log_level);
    let mut out = String::new();
    let outcome = match cli.command {
        Command::Check(a) => commands::check(&a, &mut out),
        Command::Solve(a) => commands::solve(&a, &mut out),
        Command::Osea(a) => commands::osea(&a, &mut out),
        Command::Bench(a) => commands::bench(&a, &mut out),
    };
    // a closed pipe on the reader side is not an error for us
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
