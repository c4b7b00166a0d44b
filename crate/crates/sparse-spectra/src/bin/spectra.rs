//! Command line front end: `spectra run` executes a measurement suite
//! from a TOML config and exits 0 only if every check passes;
//! `spectra replay` regenerates one sample from a run's meta.json.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sparse_spectra::runner::{self, ExperimentConfig, Suite};

#[derive(Parser)]
#[command(name = "spectra", version, about = "Monte Carlo spectral statistics for sparse random matrices")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute the suite described by a TOML config
    Run {
        /// Path to the experiment config
        #[arg(long)]
        config: PathBuf,
        /// Override the config's suite (e.g. "edge-law", "all")
        #[arg(long)]
        suite: Option<String>,
        /// Override the config's master seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's worker count
        #[arg(long)]
        workers: Option<usize>,
        /// Override the config's output directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate one sample from a run's meta.json and dump the matrix
    /// and its spectrum next to it
    Replay {
        /// Path to the meta.json written by a run
        #[arg(long)]
        meta: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> sparse_spectra::Result<ExitCode> {
    match cli.cmd {
        Cmd::Run { config, suite, seed, workers, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(tag) = suite {
                cfg.suite = Suite::parse(&tag)?;
            }
            if let Some(seed) = seed {
                cfg.ensemble.master_seed = seed;
            }
            if let Some(workers) = workers {
                cfg.workers = workers;
            }
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            let report = runner::run(&cfg)?;
            for r in &report.results {
                let verdict = if r.pass { "PASS" } else { "FAIL" };
                let notes = if r.notes.is_empty() { String::new() } else { format!("  [{}]", r.notes) };
                println!("{verdict}  {}  statistic {:.6} vs threshold {:.6}  (M = {}){notes}", r.name, r.statistic, r.threshold, r.m);
            }
            println!("report: {}", cfg.output_dir.join("report.json").display());
            Ok(if report.all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::Replay { meta } => {
            let dump = runner::replay(&meta)?;
            println!("matrix: {}", dump.matrix_path.display());
            println!("eigenvalues: {}", dump.eigenvalues_path.display());
            println!("lambda_1 = {}", dump.lambda_1);
            Ok(ExitCode::SUCCESS)
        }
    }
}
