use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rdcheck::operators::{estimator_summaries, DEFAULT_TOL};
use rdcheck::suite::{run_suite, suites, SuiteConfig};
use rdcheck::words::{GroupSpec, DEFAULT_BALL_CAP};
use rdcheck::ReportFormat;

/// Runs a named verification suite and writes one report per checked
/// inequality. Exit status: 0 all pass, 1 violation, 2 usage error,
/// 3 capacity exceeded.
#[derive(Debug, Parser)]
#[command(name = "rdcheck", version)]
struct Args {
    /// Suite to run (see --list)
    #[arg(long, required_unless_present = "list")]
    suite: Option<String>,

    /// Group: f<n> (free) or z<k> (free abelian)
    #[arg(long, default_value = "f2")]
    group: GroupSpec,

    /// Support radius R of random elements
    #[arg(long, default_value_t = 2)]
    support_radius: u32,

    /// Truncation ball radius L
    #[arg(long, default_value_t = 4)]
    ball: u32,

    #[arg(long, default_value_t = 20)]
    trials: usize,

    /// Root seed; trial t uses stream t
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Pass tolerance: lhs <= rhs + tol
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,

    /// Report file (standard output when absent)
    #[arg(long)]
    out: Option<PathBuf>,

    /// json (one report per line) or csv
    #[arg(long, default_value = "json")]
    format: ReportFormat,

    /// Group algebra element (or, for schur-bound, a symbol) as JSON
    #[arg(long)]
    coeffs: Option<PathBuf>,

    #[arg(long)]
    state_a: Option<PathBuf>,

    #[arg(long)]
    state_b: Option<PathBuf>,

    /// Matrix dimension for the matrix suites
    #[arg(long, default_value_t = 64)]
    dim: usize,

    /// Commutator order k
    #[arg(long)]
    order: Option<u32>,

    /// Norm estimator: power, lanczos or dense
    #[arg(long, default_value = "power")]
    norm: String,

    /// Largest ball size to enumerate
    #[arg(long, default_value_t = DEFAULT_BALL_CAP)]
    ball_cap: usize,

    /// List suites and norm estimators, then exit
    #[arg(long)]
    list: bool,
}

fn list() {
    println!("suites:");
    for s in suites() {
        println!("  {:<20} {}", s.name(), s.summary());
    }
    println!("norm estimators:");
    for (name, summary) in estimator_summaries() {
        println!("  {name:<20} {summary}");
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    if args.list {
        list();
        return ExitCode::SUCCESS;
    }
    let cfg = SuiteConfig {
        suite: args.suite.unwrap_or_default(),
        group: args.group,
        support_radius: args.support_radius,
        ball: args.ball,
        trials: args.trials,
        seed: args.seed,
        tol: args.tol,
        out: args.out,
        format: args.format,
        coeffs: args.coeffs,
        state_a: args.state_a,
        state_b: args.state_b,
        dim: args.dim,
        order: args.order,
        norm: args.norm,
        ball_cap: args.ball_cap,
    };
    match run_suite(&cfg) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("rdcheck: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
