//! Replay: regenerate one sample bit-for-bit from run metadata.
//!
//! Every run writes a meta.json carrying the ensemble spec and the first
//! measurement index. Replaying it rebuilds that sample's shifted matrix
//! from the seed derivation alone and dumps the matrix plus its spectrum
//! next to the metadata, so any reported number can be traced back to a
//! concrete matrix.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ensemble::{self, EnsembleSpec};
use crate::runner::report::REPORT_VERSION;
use crate::{io, spectral, Error, Result};

/// Everything needed to regenerate one sample.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReplayMeta {
    /// Format version; replay refuses other versions instead of silently
    /// regenerating from a different seed derivation.
    pub version: u32,
    pub ensemble: EnsembleSpec,
    pub sample_index: u64,
    /// Redundant dimension stamp; must match ensemble.n, so a hand-edited
    /// config cannot masquerade as the original run.
    pub n: usize,
}

/// Where the replayed sample landed.
#[derive(Clone, Debug)]
pub struct ReplayDump {
    pub matrix_path: PathBuf,
    pub eigenvalues_path: PathBuf,
    pub lambda_1: f64,
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format { path: path.display().to_string(), reason: reason.into() }
}

/// Regenerate the sample described by a meta.json and write
/// replay_matrix.sel1 and replay_eigenvalues.csv into its directory.
pub fn replay(meta_path: &Path) -> Result<ReplayDump> {
    faer::set_global_parallelism(faer::Par::Seq);
    let text = std::fs::read_to_string(meta_path).map_err(|e| format_err(meta_path, format!("cannot read: {e}")))?;
    let meta: ReplayMeta =
        serde_json::from_str(&text).map_err(|e| format_err(meta_path, format!("JSON parse failed: {e}")))?;
    if meta.version != REPORT_VERSION {
        return Err(format_err(
            meta_path,
            format!("version mismatch: metadata version {} vs supported {REPORT_VERSION}", meta.version),
        ));
    }
    if meta.n != meta.ensemble.n {
        return Err(format_err(
            meta_path,
            format!("version mismatch: dimension stamp N = {} vs ensemble N = {}", meta.n, meta.ensemble.n),
        ));
    }
    meta.ensemble.validate()?;

    let tag = |e: Error| match e {
        Error::Eigensolver { detail } => Error::Eigensolver {
            detail: format!(
                "{detail}; replay with master_seed = {}, sample_index = {}",
                meta.ensemble.master_seed, meta.sample_index
            ),
        },
        other => other,
    };
    let (a_mat, _) = ensemble::sample_shifted(&meta.ensemble, meta.sample_index).map_err(tag)?;
    let evals = spectral::eigenvalues_desc(&a_mat).map_err(tag)?;

    let dir = meta_path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let matrix_path = dir.join("replay_matrix.sel1");
    io::write_matrix_sel1(&matrix_path, &a_mat)?;
    let eigenvalues_path = dir.join("replay_eigenvalues.csv");
    let rows = evals.iter().enumerate().map(|(k, &l)| (meta.sample_index, k + 1, l));
    io::atomic_write(&eigenvalues_path, io::csv_eigenvalues(rows).as_bytes())?;
    Ok(ReplayDump { matrix_path, eigenvalues_path, lambda_1: evals[0] })
}
