use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use satqos_cli::{dispatch, parse_config_in, CliError, Overrides};

/// Statistical QoS bounds for satellite-terrestrial links.
#[derive(Debug, Parser)]
#[command(name = "satqos", version = satqos_cli::BUILD_ID)]
struct Args {
    /// TOML run configuration.
    config: PathBuf,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

fn run(args: &Args) -> Result<(), CliError> {
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(CliError::Config("--workers must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    }
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    let overrides = Overrides {
        seed: args.seed,
        output: args.output.clone(),
    };
    let rc = parse_config_in(&text, base, &overrides)?;
    dispatch(&rc)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
