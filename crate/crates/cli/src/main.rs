//! `meanfield`: runs one experiment config and writes its CSV artifacts.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use meanfield_core::experiment::{load_config, run};

#[derive(Debug, Parser)]
#[command(name = "meanfield", version, about = "Mean-field limit numerical experiments")]
struct Args {
    /// INI-style experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
}

/// Exit status for configuration, I/O and numerical errors, distinct from a
/// failed check (1).
const ERROR_EXIT: u8 = 2;

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match load_config(&args.config, args.seed) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(ERROR_EXIT);
        }
    };
    let Some(out_dir) = args.out.or_else(|| cfg.out_dir.clone()) else {
        eprintln!("error: no output directory; pass --out or set out_dir in the config");
        return ExitCode::from(ERROR_EXIT);
    };
    match run(&cfg, &out_dir) {
        Ok(outcome) => {
            for r in &outcome.results {
                println!("{}", r.summary_line());
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(ERROR_EXIT)
        }
    }
}
