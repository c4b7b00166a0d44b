//! Deterministic Monte Carlo orchestration: load a config, fan samples
//! over a local thread pool, reduce to named pass/fail results, and write
//! a self-describing output directory.
//!
//! A run's outputs: one CSV per data stream, `meta.json` (enough to replay
//! the first measurement sample), and `report.json` written last, so a
//! report's existence implies the artifacts it lists exist too. Outputs
//! are byte-identical across runs and worker counts except for the wall
//! clock line in the report.

pub mod config;
mod replay;
mod report;
mod suites;

pub use config::{default_thresholds, ExperimentConfig, GridParams, SmoothingKnobs, Suite};
pub use replay::{replay, ReplayDump, ReplayMeta};
pub use report::{SeedMetadata, SuiteReport, REPORT_VERSION};

use crate::{io, Error, Result};

/// Execute the configured suite and materialize its output directory.
pub fn run(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    // the runner owns parallelism; the eigensolver stays sequential
    faer::set_global_parallelism(faer::Par::Seq);
    cfg.validate()?;
    let started = std::time::Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::invalid("workers", format!("thread pool construction failed: {e}")))?;

    // echo the merged thresholds so the report pins what was tested
    let mut echoed = cfg.clone();
    echoed.thresholds = cfg.merged_thresholds();
    let out = suites::run_suite(echoed.suite, &echoed, &pool)?;

    let seed_metadata = SeedMetadata {
        master_seed: cfg.ensemble.master_seed,
        calibration_samples: out.calibration_samples,
        measurement_first_index: if cfg.suite == Suite::EdgeLaw { out.calibration_samples } else { 0 },
        measurement_samples: cfg.m as u64,
    };

    let dir = &cfg.output_dir;
    let mut csv_files = Vec::with_capacity(out.files.len());
    for (name, contents) in &out.files {
        io::atomic_write(&dir.join(name), contents.as_bytes())?;
        csv_files.push(name.clone());
    }
    let meta = ReplayMeta {
        version: REPORT_VERSION,
        ensemble: cfg.ensemble.clone(),
        sample_index: seed_metadata.measurement_first_index,
        n: cfg.ensemble.n,
    };
    io::write_json_atomic(&dir.join("meta.json"), &meta)?;

    let report = SuiteReport::new(echoed, out.results, csv_files, seed_metadata, started.elapsed().as_secs_f64())?;
    io::write_json_atomic(&dir.join("report.json"), &report)?;
    Ok(report)
}
