//! The run report: config echo, test results, artifact manifest, and the
//! seed metadata that makes any sample replayable.

use serde::{Deserialize, Serialize};

use crate::runner::config::ExperimentConfig;
use crate::stat_tests::TestResult;
use crate::{Error, Result};

/// Version stamp shared by report.json and meta.json; replay refuses
/// metadata from a different version.
pub const REPORT_VERSION: u32 = 1;

/// Everything needed to regenerate any sample of a finished run.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SeedMetadata {
    pub master_seed: u64,
    /// Samples consumed by the calibration phase (0 when single-phase).
    pub calibration_samples: u64,
    /// First sample index of the measurement phase.
    pub measurement_first_index: u64,
    pub measurement_samples: u64,
}

/// Output of one `run` call, serialized as report.json with stable key
/// order (struct declaration order; the threshold map is sorted).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub version: u32,
    pub config: ExperimentConfig,
    pub results: Vec<TestResult>,
    /// Data artifacts written next to the report, in emission order.
    pub csv_files: Vec<String>,
    pub seed_metadata: SeedMetadata,
    pub wall_clock_seconds: f64,
    pub all_pass: bool,
}

impl SuiteReport {
    /// Assemble a report, enforcing the unique-name invariant.
    pub fn new(
        config: ExperimentConfig,
        results: Vec<TestResult>,
        csv_files: Vec<String>,
        seed_metadata: SeedMetadata,
        wall_clock_seconds: f64,
    ) -> Result<SuiteReport> {
        for (i, r) in results.iter().enumerate() {
            if results[..i].iter().any(|prev| prev.name == r.name) {
                return Err(Error::invalid("results", format!("duplicate test result name {:?}", r.name)));
            }
        }
        let all_pass = results.iter().all(|r| r.pass);
        Ok(SuiteReport { version: REPORT_VERSION, config, results, csv_files, seed_metadata, wall_clock_seconds, all_pass })
    }
}
