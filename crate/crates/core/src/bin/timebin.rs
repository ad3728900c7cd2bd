use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use timebin::cli::{self, JobKind};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Job {
    Derive,
    Propagate,
    ScanZ,
    Modes,
    Bell,
    Calibrate,
}

impl From<Job> for JobKind {
    fn from(j: Job) -> Self {
        match j {
            Job::Derive => JobKind::Derive,
            Job::Propagate => JobKind::Propagate,
            Job::ScanZ => JobKind::ScanZ,
            Job::Modes => JobKind::Modes,
            Job::Bell => JobKind::Bell,
            Job::Calibrate => JobKind::Calibrate,
        }
    }
}

/// Time-bin qubit generation in a driven EIT medium: propagation, mode
/// analysis and Bell tests.
///
/// The environment variable TIMEBIN_THREADS caps the number of worker threads.
#[derive(Debug, Parser)]
#[command(name = "timebin", version)]
struct Args {
    /// Job to run.
    #[arg(value_enum)]
    job: Job,
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("TIMEBIN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("TIMEBIN_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("cannot configure thread pool: {e}"))
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let outcome = cli::load_config(&args.config).and_then(|cfg| cli::run(args.job.into(), &cfg, &args.out));
    match outcome {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if outcome.status == cli::Status::FailedCheck {
                eprintln!("error: a numerical check failed; see {}", args.out.join("summary.txt").display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
