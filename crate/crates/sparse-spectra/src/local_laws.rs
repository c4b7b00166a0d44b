//! Green-function error scans over the spectral domain and eigenvector
//! delocalization statistics.
//!
//! For each grid point z the scan compares resolvent quadratic forms with
//! their deterministic limits: <v, G w> against <v,w> m_sc(z) in arbitrary
//! perpendicular directions, G_ee against 1/f, G_ev against 0, and matrix
//! entries against delta_ij m_sc(z). Errors are stored next to the
//! theoretical rates ((N eta)^(-1/3) + q^(-1/3) isotropically,
//! sqrt(1/(N eta)) + 1/(N eta) + 1/q entrywise) so calibration ratios can
//! be pooled across samples.

use num_complex::Complex64;
use rand::Rng;

use crate::ensemble::ProbeSet;
use crate::rng::stream_rng;
use crate::spectral::{self, m_sc, qform_from_overlaps, SpectralData, SpectralDomainPoint};
use crate::{Error, Result};

/// Errors and reference bounds at one grid point.
#[derive(Clone, Debug)]
pub struct LocalLawRecord {
    pub z: SpectralDomainPoint,
    /// max over probe pairs of |G_vw - <v,w> m_sc|
    pub err_iso: f64,
    /// |G_ee - 1/f|, 0 when the scan runs on H (f = 0 sentinel)
    pub err_ee: f64,
    /// max over probes of |G_ev|, 0 when f = 0
    pub err_ev: f64,
    /// max over scanned entries of |G_ij - delta_ij m_sc|
    pub err_entry: f64,
    /// (N eta)^(-1/3) + q^(-1/3)
    pub bound_iso: f64,
    /// sqrt(1/(N eta)) + 1/(N eta) + 1/q
    pub bound_entry: f64,
}

/// Entry-scan coverage: the default samples 200 index pairs plus the
/// diagonal entries of 200 indices (a fixed deterministic subset per N);
/// the full N^2 scan is opt-in because of its cost per grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryScan {
    Subsample,
    Full,
}

pub fn scan_local_law(
    s: &SpectralData,
    probes: &ProbeSet,
    grid: &[SpectralDomainPoint],
    q: f64,
    f: f64,
) -> Result<Vec<LocalLawRecord>> {
    scan_local_law_opts(s, probes, grid, q, f, EntryScan::Subsample)
}

pub fn scan_local_law_opts(
    s: &SpectralData,
    probes: &ProbeSet,
    grid: &[SpectralDomainPoint],
    q: f64,
    f: f64,
    entry_scan: EntryScan,
) -> Result<Vec<LocalLawRecord>> {
    let n = s.n();
    if probes.n != n {
        return Err(Error::invalid("probes", format!("probe dimension {} vs matrix {}", probes.n, n)));
    }
    if !(q > 0.0) {
        return Err(Error::invalid("q", "sparsity scale must be positive"));
    }
    let nf = n as f64;

    // overlaps <u_k, v> reused across the whole grid
    let probe_overlaps: Vec<Vec<f64>> = probes.vectors.iter().map(|v| s.overlaps(v)).collect();
    let e_overlaps = s.overlaps(&probes.e);

    let (pairs, diag) = match entry_scan {
        EntryScan::Subsample => entry_subsample(n),
        EntryScan::Full => {
            let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
            for i in 0..n {
                for j in (i + 1)..n {
                    pairs.push((i, j));
                }
            }
            (pairs, (0..n).collect())
        }
    };

    let evals = s.eigenvalues();
    let mut records = Vec::with_capacity(grid.len());
    let mut coord_i = vec![0.0; n];
    let mut coord_j = vec![0.0; n];
    for pt in grid {
        let z = pt.z();
        let m = m_sc(z)?;

        let mut err_iso = 0.0f64;
        for a in 0..probe_overlaps.len() {
            for b in a..probe_overlaps.len() {
                let inner = spectral::dot(&probes.vectors[a], &probes.vectors[b]);
                let g = qform_from_overlaps(evals, &probe_overlaps[a], &probe_overlaps[b], z);
                err_iso = err_iso.max((g - m * inner).norm());
            }
        }

        let (mut err_ee, mut err_ev) = (0.0f64, 0.0f64);
        if f > 0.0 {
            let g_ee = qform_from_overlaps(evals, &e_overlaps, &e_overlaps, z);
            err_ee = (g_ee - Complex64::new(1.0 / f, 0.0)).norm();
            for ov in &probe_overlaps {
                let g_ev = qform_from_overlaps(evals, &e_overlaps, ov, z);
                err_ev = err_ev.max(g_ev.norm());
            }
        }

        let mut err_entry = 0.0f64;
        for &(i, j) in &pairs {
            gather_coordinate(s, i, &mut coord_i);
            gather_coordinate(s, j, &mut coord_j);
            let g = qform_from_overlaps(evals, &coord_i, &coord_j, z);
            err_entry = err_entry.max(g.norm());
        }
        for &i in &diag {
            gather_coordinate(s, i, &mut coord_i);
            let g = qform_from_overlaps(evals, &coord_i, &coord_i, z);
            err_entry = err_entry.max((g - m).norm());
        }

        let n_eta = nf * pt.eta;
        records.push(LocalLawRecord {
            z: *pt,
            err_iso,
            err_ee,
            err_ev,
            err_entry,
            bound_iso: n_eta.powf(-1.0 / 3.0) + q.powf(-1.0 / 3.0),
            bound_entry: (1.0 / n_eta).sqrt() + 1.0 / n_eta + 1.0 / q,
        });
    }
    Ok(records)
}

/// Deterministic entry subset for dimension n: 200 off-diagonal pairs and
/// 200 diagonal indices (draws with replacement; all diagonals when
/// n <= 200). Fixed per n so every sample scans the same entries.
fn entry_subsample(n: usize) -> (Vec<(usize, usize)>, Vec<usize>) {
    let mut rng = stream_rng(0x5ca9, "entry-subsample", n as u64);
    let mut pairs = Vec::with_capacity(200);
    while pairs.len() < 200 {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i != j {
            pairs.push((i.min(j), i.max(j)));
        }
    }
    let diag = if n <= 200 {
        (0..n).collect()
    } else {
        (0..200).map(|_| rng.random_range(0..n)).collect()
    };
    (pairs, diag)
}

fn gather_coordinate(s: &SpectralData, i: usize, out: &mut [f64]) {
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = s.eigenvector(k)[i];
    }
}

/// Exact eigenvector localization statistics for one sample.
#[derive(Clone, Debug)]
pub struct DelocalizationRecord {
    /// max_i ||u_i||_inf; always within [N^(-1/2), 1]
    pub max_inf_norm: f64,
    /// max_{i >= 2} |<e, u_i>| (top eigenvector excluded)
    pub max_e_overlap_nontop: f64,
    /// max over probes x and i >= 2 of |<x, u_i>|
    pub max_probe_overlap: f64,
    /// sum_{i >= 2} <e, u_i>^2
    pub sum_e_overlap_sq_nontop: f64,
}

pub fn delocalization_stats(s: &SpectralData, probes: &ProbeSet) -> Result<DelocalizationRecord> {
    let n = s.n();
    if probes.n != n {
        return Err(Error::invalid("probes", format!("probe dimension {} vs matrix {}", probes.n, n)));
    }
    let mut max_inf_norm = 0.0f64;
    for k in 0..n {
        for &x in s.eigenvector(k) {
            max_inf_norm = max_inf_norm.max(x.abs());
        }
    }
    let e_overlaps = s.overlaps(&probes.e);
    let mut max_e = 0.0f64;
    let mut sum_e_sq = 0.0f64;
    for &ov in &e_overlaps[1..] {
        max_e = max_e.max(ov.abs());
        sum_e_sq += ov * ov;
    }
    let mut max_probe = 0.0f64;
    for v in &probes.vectors {
        let ovs = s.overlaps(v);
        for &ov in &ovs[1..] {
            max_probe = max_probe.max(ov.abs());
        }
    }
    Ok(DelocalizationRecord {
        max_inf_norm,
        max_e_overlap_nontop: max_e,
        max_probe_overlap: max_probe,
        sum_e_overlap_sq_nontop: sum_e_sq,
    })
}

/// Calibration summary over records at a fixed energy: the worst
/// err_iso/bound_iso ratio, and the log-log slope of err_iso against eta
/// restricted to records where the eta-term dominates the bound (bound_iso
/// within a factor 2 of (N eta)^(-1/3)).
pub fn fit_error_scaling(records: &[LocalLawRecord], n: usize) -> Result<(f64, f64)> {
    if records.len() < 10 {
        return Err(Error::invalid("records", format!("need >= 10 records, got {}", records.len())));
    }
    let e0 = records[0].z.e;
    if records.iter().any(|r| (r.z.e - e0).abs() > 1e-12) {
        return Err(Error::invalid("records", "scaling fit requires records at a single energy"));
    }
    let (eta_min, eta_max) = records.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), r| {
        (lo.min(r.z.eta), hi.max(r.z.eta))
    });
    if eta_max / eta_min < 10.0 {
        return Err(Error::invalid("records", format!("eta range {:.2}x spans less than one decade", eta_max / eta_min)));
    }

    let ratio_max = records
        .iter()
        .map(|r| r.err_iso / r.bound_iso)
        .fold(0.0f64, f64::max);

    let nf = n as f64;
    let fit_points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| {
            let eta_term = (nf * r.z.eta).powf(-1.0 / 3.0);
            r.err_iso > 0.0 && r.bound_iso <= 2.0 * eta_term
        })
        .map(|r| (r.z.eta.ln(), r.err_iso.ln()))
        .collect();
    if fit_points.len() < 2 {
        return Err(Error::invalid("records", "too few eta-dominated records for the slope fit"));
    }
    let m = fit_points.len() as f64;
    let mean_x = fit_points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = fit_points.iter().map(|p| p.1).sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in &fit_points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    Ok((ratio_max, sxy / sxx))
}
