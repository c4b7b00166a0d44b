//! On-disk formats: the SEL1 binary matrix dump, atomic file writes, and
//! the CSV/JSON emitters shared by the experiment suites.
//!
//! Every writer goes through `atomic_write`: the bytes land in a temporary
//! file in the destination directory and are renamed into place, so a
//! crashed run never leaves a half-written artifact.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::edge_stats::EdgeSampleSet;
use crate::eth::EthSample;
use crate::evec_stats::{OverlapSample, SmoothedOverlap};
use crate::local_laws::LocalLawRecord;
use crate::matrix::SymmetricMatrix;
use crate::{Error, Result};

/// Magic bytes of the binary matrix dump format.
pub const SEL1_MAGIC: [u8; 4] = *b"SEL1";
/// Header: magic, u32 dimension, two reserved words, all little-endian.
pub const SEL1_HEADER_LEN: usize = 16;

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format { path: path.display().to_string(), reason: reason.into() }
}

/// Write bytes to `path` via a temporary file in the same directory plus
/// an atomic rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let file_name = path
        .file_name()
        .ok_or_else(|| format_err(path, "path has no file name"))?
        .to_string_lossy()
        .into_owned();
    let tmp = dir.join(format!(".{file_name}.tmp-{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Serialize a symmetric matrix to the SEL1 byte layout: 16-byte header
/// then n*n little-endian f64 values, row-major.
pub fn matrix_to_sel1(m: &SymmetricMatrix) -> Vec<u8> {
    let n = m.n();
    let mut out = Vec::with_capacity(SEL1_HEADER_LEN + 8 * n * n);
    out.extend_from_slice(&SEL1_MAGIC);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for v in m.entries() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write_matrix_sel1(path: &Path, m: &SymmetricMatrix) -> Result<()> {
    atomic_write(path, &matrix_to_sel1(m))
}

pub fn read_matrix_sel1(path: &Path) -> Result<SymmetricMatrix> {
    let bytes = fs::read(path)?;
    if bytes.len() < SEL1_HEADER_LEN {
        return Err(format_err(path, format!("file too short for a SEL1 header: {} bytes", bytes.len())));
    }
    if bytes[..4] != SEL1_MAGIC {
        return Err(format_err(path, "bad magic, not a SEL1 matrix dump"));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let expected = SEL1_HEADER_LEN + 8 * n * n;
    if bytes.len() != expected {
        return Err(format_err(path, format!("expected {expected} bytes for n = {n}, found {}", bytes.len())));
    }
    let entries: Vec<f64> = bytes[SEL1_HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    SymmetricMatrix::from_rows(n, entries).map_err(|e| format_err(path, format!("payload is not symmetric: {e}")))
}

/// Shortest round-trip decimal form of a float: `{}` on f64 prints the
/// shortest string that parses back to the exact bit pattern written.
fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// CSV with one row per (sample, grid point) local-law record.
pub fn csv_local_law<'a, I>(rows: I) -> String
where
    I: IntoIterator<Item = (u64, &'a LocalLawRecord)>,
{
    let mut out = String::from("sample_index,E,eta,err_iso,err_ee,err_ev,err_entry,bound_iso,bound_entry\n");
    for (idx, r) in rows {
        out.push_str(&format!(
            "{idx},{},{},{},{},{},{},{},{}\n",
            fmt_f64(r.z.e),
            fmt_f64(r.z.eta),
            fmt_f64(r.err_iso),
            fmt_f64(r.err_ee),
            fmt_f64(r.err_ev),
            fmt_f64(r.err_entry),
            fmt_f64(r.bound_iso),
            fmt_f64(r.bound_entry),
        ));
    }
    out
}

/// CSV of rescaled edge statistics, indexed by global sample index so any
/// row can be replayed.
pub fn csv_edge_samples(set: &EdgeSampleSet) -> String {
    let mut out = String::from("sample_index,statistic,ensemble_tag\n");
    for (idx, v) in set.rescaled_edges.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", set.first_index + idx as u64, fmt_f64(*v), set.ensemble_tag));
    }
    out
}

/// CSV of eigenvector overlap statistics; `gap_flag` is 1 when the sample
/// failed a gap precondition and its value is excluded from statistics.
pub fn csv_overlap_samples<'a, I>(rows: I) -> String
where
    I: IntoIterator<Item = (&'a OverlapSample, bool)>,
{
    let mut out = String::from("sample_index,a,vw_inner,value,gap_flag\n");
    for (r, flagged) in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.sample_index,
            r.a,
            fmt_f64(r.vw_inner),
            fmt_f64(r.value),
            u8::from(flagged),
        ));
    }
    out
}

/// CSV of quantum-ergodicity fluctuation statistics.
pub fn csv_eth_samples(rows: &[EthSample]) -> String {
    let mut out = String::from("sample_index,a,obs_tag,stat\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.sample_index, r.a, r.obs_tag, fmt_f64(r.stat)));
    }
    out
}

/// CSV of raw spectra: one row per retained eigenvalue, k 1-based from
/// the top.
pub fn csv_eigenvalues<I>(rows: I) -> String
where
    I: IntoIterator<Item = (u64, usize, f64)>,
{
    let mut out = String::from("sample_index,k,lambda\n");
    for (idx, k, lambda) in rows {
        out.push_str(&format!("{idx},{k},{}\n", fmt_f64(lambda)));
    }
    out
}

/// CSV of bulk overlap values N<v,u_i>^2.
pub fn csv_bulk_samples(rows: &[(u64, usize, f64)]) -> String {
    let mut out = String::from("sample_index,i,value\n");
    for &(idx, i, value) in rows {
        out.push_str(&format!("{idx},{i},{}\n", fmt_f64(value)));
    }
    out
}

/// CSV of smoothing identity outcomes; flagged rows keep their NaN value.
pub fn csv_smoothing(rows: &[(u64, SmoothedOverlap)]) -> String {
    let mut out = String::from("sample_index,value,direct,gap,gap_flag\n");
    for &(idx, so) in rows {
        out.push_str(&format!(
            "{idx},{},{},{},{}\n",
            fmt_f64(so.value),
            fmt_f64(so.direct),
            fmt_f64(so.gap),
            u8::from(so.gap_too_small),
        ));
    }
    out
}

/// Pretty JSON with a trailing newline. Struct fields keep declaration
/// order and maps must be BTreeMaps, so the byte stream is deterministic.
pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Format { path: String::new(), reason: format!("JSON serialization failed: {e}") })?;
    s.push('\n');
    Ok(s)
}

pub fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    atomic_write(path, to_json_pretty(value)?.as_bytes())
}
