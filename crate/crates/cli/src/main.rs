use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ffmoments_cli::{run, Command, RunOptions};

#[derive(Debug, Parser)]
#[command(
    name = "ffmoments",
    version,
    about = "Verification sweeps for function-field L-functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cache directory for unit groups and L-polynomials.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Rewrite the regression fixtures instead of verifying against them.
    #[arg(long, global = true)]
    record: bool,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Overrides the config's largest allowed phi(Q).
    #[arg(long, global = true)]
    budget: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Prime tables, factorizations and unit groups.
    Enumerate,
    /// L-polynomials and their suites.
    Lfun,
    /// Shifted, character-sum and integral moments.
    Moments,
    /// Prime-sum grids.
    Primesums,
    /// Every section present in the config.
    All,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let Some(config) = cli.config else {
        eprintln!("configuration error: --config is required");
        return ExitCode::from(2);
    };
    let cmd = match cli.command {
        Sub::Enumerate => Command::Enumerate,
        Sub::Lfun => Command::Lfun,
        Sub::Moments => Command::Moments,
        Sub::Primesums => Command::Primesums,
        Sub::All => Command::All,
    };
    let opts = RunOptions {
        config,
        out: cli.out,
        cache: cli.cache,
        record: cli.record,
        jobs: cli.jobs,
        budget: cli.budget,
    };
    match run(cmd, &opts) {
        Ok(summary) => {
            for row in summary
                .checks
                .rows
                .iter()
                .filter(|r| r.status == ffmoments_cli::report::Status::Fail)
            {
                eprintln!(
                    "FAIL [{}] {} ({}): measured {} reference {:?} {}",
                    row.anchor, row.check, row.subject, row.measured, row.reference, row.detail
                );
            }
            ExitCode::from(summary.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
