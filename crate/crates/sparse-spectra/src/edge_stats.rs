//! Edge eigenvalue statistics: the sample-dependent spectral edge, its
//! Gaussian fluctuation statistic, rescaled edge samples for universality
//! comparisons, gap statistics with level-repulsion frequencies, and
//! rigidity residuals against classical locations.
//!
//! The random edge is realized as L_det + z, where L_det is the ensemble
//! mean of the top eigenvalue of H over a calibration stream and z is the
//! leading fluctuation statistic (1/N) sum_{i != j} (H_ij^2 - 1/N).
//! Higher-order corrections to the edge are dropped; they sit below
//! Monte Carlo resolution at desk scale.

use serde::Serialize;

use crate::ensemble::{self, EnsembleSpec};
use crate::matrix::SymmetricMatrix;
use crate::spectral::{self, eigenvalues_desc};
use crate::{Error, Result};

/// Calibrated edge model: deterministic part plus per-sample fluctuations.
#[derive(Clone, Debug)]
pub struct EdgeEstimate {
    pub n: usize,
    /// ensemble mean of lambda_1(H) over the calibration stream
    pub l_det: f64,
    /// z statistic of each calibration sample, in sample order
    pub z_stats: Vec<f64>,
    /// empirical estimate of sum_ij E H_ij^4 (all N^2 pairs)
    pub fourth_moment_sum: f64,
}

impl EdgeEstimate {
    /// Edge prediction for a fresh sample with fluctuation statistic z.
    pub fn l_hat(&self, z_stat: f64) -> f64 {
        self.l_det + z_stat
    }

    /// Mean and standard error of the calibration z statistics; the
    /// centering contract asks for a mean within 3 SE of 0.
    pub fn z_mean_se(&self) -> (f64, f64) {
        crate::stat_tests::mean_and_se(&self.z_stats)
    }
}

/// (1/N) sum over ordered distinct pairs of (H_ij^2 - 1/N), the leading
/// fluctuation of the spectral edge.
pub fn z_statistic(h: &SymmetricMatrix) -> f64 {
    let n = h.n();
    let nf = n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let v = h.get(i, j);
                acc += v * v - 1.0 / nf;
            }
        }
    }
    acc / nf
}

/// Everything edge calibration needs from one sample H, in one pass:
/// (lambda_1, z statistic, sum of fourth powers of all entries).
pub fn calibration_triple(h: &SymmetricMatrix) -> Result<(f64, f64, f64)> {
    let evals = eigenvalues_desc(h)?;
    let fourth = h.entries().iter().map(|v| v * v * v * v).sum::<f64>();
    Ok((evals[0], z_statistic(h), fourth))
}

/// Calibrate the edge model from a stream of centered samples H.
/// Consumes each matrix once: top eigenvalue, z statistic, fourth moments.
pub fn estimate_edge<I>(h_samples: I) -> Result<EdgeEstimate>
where
    I: IntoIterator<Item = SymmetricMatrix>,
{
    let mut n = 0usize;
    let mut lambda1_sum = 0.0;
    let mut z_stats = Vec::new();
    let mut fourth_sum = 0.0;
    for h in h_samples {
        if n == 0 {
            n = h.n();
        } else if h.n() != n {
            return Err(Error::invalid("H_samples", "inconsistent dimensions in stream"));
        }
        let (lambda1, z, fourth) = calibration_triple(&h)?;
        lambda1_sum += lambda1;
        z_stats.push(z);
        fourth_sum += fourth;
    }
    let m = z_stats.len();
    if m < 100 {
        return Err(Error::invalid("H_samples", format!("edge calibration needs >= 100 samples, got {m}")));
    }
    Ok(EdgeEstimate {
        n,
        l_det: lambda1_sum / m as f64,
        z_stats,
        fourth_moment_sum: fourth_sum / m as f64,
    })
}

/// KS distance between the standardized z statistics and the standard
/// normal law: each z is multiplied by N / sqrt(2 sum_ij E H_ij^4).
pub fn clt_check_z(z_stats: &[f64], n: usize, fourth_moment_sum: f64) -> Result<f64> {
    if z_stats.len() < 500 {
        return Err(Error::invalid("z_stats", format!("CLT check needs >= 500 samples, got {}", z_stats.len())));
    }
    if !(fourth_moment_sum > 0.0) {
        return Err(Error::invalid("fourth_moment_sum", "must be positive"));
    }
    let scale = n as f64 / (2.0 * fourth_moment_sum).sqrt();
    let standardized: Vec<f64> = z_stats.iter().map(|z| z * scale).collect();
    crate::stat_tests::ks_one_sample(&standardized, crate::stat_tests::phi)
}

/// Which rescaled edge statistic a sample set holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeStatistic {
    /// N^(2/3)(lambda_2(A) - L_hat); the top eigenvalue is the shift outlier
    ALambda2,
    /// N^(2/3)(lambda_1(H) - L_hat)
    HLambda1,
    /// N^(2/3)(mu_1 - 2) for the GOE baseline
    GoeMu1,
}

impl EdgeStatistic {
    pub fn tag(&self) -> &'static str {
        match self {
            EdgeStatistic::ALambda2 => "a-lambda2",
            EdgeStatistic::HLambda1 => "h-lambda1",
            EdgeStatistic::GoeMu1 => "goe-mu1",
        }
    }
}

/// Edge centering: a calibrated estimate or a fixed deterministic value
/// (the GOE baseline uses 2).
#[derive(Clone, Copy, Debug)]
pub enum EdgeRef<'a> {
    Estimate(&'a EdgeEstimate),
    Fixed(f64),
}

/// Rescaled edge samples plus the adjacent gap for each sample.
#[derive(Clone, Debug)]
pub struct EdgeSampleSet {
    pub n: usize,
    pub which: EdgeStatistic,
    /// Global index of the first sample; row k came from sample
    /// first_index + k, so any row can be regenerated.
    pub first_index: u64,
    pub ensemble_tag: String,
    pub rescaled_edges: Vec<f64>,
    /// N^(2/3)(lambda_2 - lambda_3) for the A statistic, else
    /// N^(2/3)(lambda_1 - lambda_2)
    pub gaps: Vec<f64>,
}

/// One sample of the rescaled edge statistic: (statistic, gap).
pub fn edge_sample_one(
    spec: &EnsembleSpec,
    sample_index: u64,
    which: EdgeStatistic,
    edge: EdgeRef<'_>,
) -> Result<(f64, f64)> {
    let n = spec.n;
    if let EdgeRef::Estimate(est) = edge {
        if est.n != n {
            return Err(Error::invalid("edge", format!("edge estimate built for N = {}, spec has N = {}", est.n, n)));
        }
    }
    let n23 = (n as f64).powf(2.0 / 3.0);
    match which {
        EdgeStatistic::ALambda2 => {
            let (a, h) = ensemble::sample_shifted(spec, sample_index)?;
            let center = match edge {
                EdgeRef::Estimate(est) => est.l_hat(z_statistic(&h)),
                EdgeRef::Fixed(v) => v,
            };
            let evals = eigenvalues_desc(&a)?;
            Ok((n23 * (evals[1] - center), n23 * (evals[1] - evals[2])))
        }
        EdgeStatistic::HLambda1 => {
            let h = ensemble::sample_h(spec, sample_index)?;
            let center = match edge {
                EdgeRef::Estimate(est) => est.l_hat(z_statistic(&h)),
                EdgeRef::Fixed(v) => v,
            };
            let evals = eigenvalues_desc(&h)?;
            Ok((n23 * (evals[0] - center), n23 * (evals[0] - evals[1])))
        }
        EdgeStatistic::GoeMu1 => {
            let h = ensemble::sample_h(spec, sample_index)?;
            let center = match edge {
                EdgeRef::Estimate(est) => est.l_hat(z_statistic(&h)),
                EdgeRef::Fixed(v) => v,
            };
            let evals = eigenvalues_desc(&h)?;
            Ok((n23 * (evals[0] - center), n23 * (evals[0] - evals[1])))
        }
    }
}

/// Rescaled edge statistics for sample indices [first_index, first_index + m).
pub fn edge_samples(
    spec: &EnsembleSpec,
    first_index: u64,
    m: usize,
    which: EdgeStatistic,
    edge: EdgeRef<'_>,
) -> Result<EdgeSampleSet> {
    if m < 100 {
        return Err(Error::invalid("M", format!("edge sampling needs M >= 100, got {m}")));
    }
    let mut rescaled_edges = Vec::with_capacity(m);
    let mut gaps = Vec::with_capacity(m);
    for idx in 0..m as u64 {
        let (stat, gap) = edge_sample_one(spec, first_index + idx, which, edge)?;
        rescaled_edges.push(stat);
        gaps.push(gap);
    }
    Ok(EdgeSampleSet {
        n: spec.n,
        which,
        first_index,
        ensemble_tag: format!("{}/{}", spec.kind.tag(), which.tag()),
        rescaled_edges,
        gaps,
    })
}

/// Level-repulsion summary for one epsilon: the fraction of raw gaps at or
/// below N^(-2/3-epsilon).
#[derive(Clone, Debug, Serialize)]
pub struct RepulsionRow {
    pub epsilon: f64,
    /// raw-gap threshold N^(-2/3-epsilon)
    pub threshold: f64,
    pub frequency: f64,
    pub m: usize,
}

/// Rescaled gaps N^(2/3)(lambda_i - lambda_{i+1}) for the requested
/// indices (1-based, descending order) across a stream of spectra, plus
/// the repulsion frequency for each epsilon.
pub fn gap_and_repulsion<I>(
    eigenvalue_stream: I,
    n: usize,
    indices: &[usize],
    epsilons: &[f64],
) -> Result<(Vec<f64>, Vec<RepulsionRow>)>
where
    I: IntoIterator,
    I::Item: AsRef<[f64]>,
{
    if indices.is_empty() {
        return Err(Error::invalid("indices", "need at least one gap index"));
    }
    let n23 = (n as f64).powf(2.0 / 3.0);
    let mut gaps = Vec::new();
    for evals in eigenvalue_stream {
        let evals = evals.as_ref();
        for &i in indices {
            if i < 1 || i + 1 > evals.len() {
                return Err(Error::invalid("indices", format!("gap index {i} out of range")));
            }
            let gap = evals[i - 1] - evals[i];
            gaps.push(n23 * gap.max(0.0));
        }
    }
    let m = gaps.len();
    let rows = epsilons
        .iter()
        .map(|&eps| {
            let rescaled_threshold = (n as f64).powf(-eps);
            let hits = gaps.iter().filter(|&&g| g <= rescaled_threshold).count();
            RepulsionRow {
                epsilon: eps,
                threshold: (n as f64).powf(-2.0 / 3.0 - eps),
                frequency: hits as f64 / m as f64,
                m,
            }
        })
        .collect();
    Ok((gaps, rows))
}

/// Rigidity residuals (lambda_k - gamma_k) / (N^(-2/3) min(k, N-k+1)^(-1/3))
/// for k in the given 1-based range; gamma_k is the semicircle classical
/// location rescaled by edge/2.
pub fn rigidity_residuals(
    eigenvalues: &[f64],
    edge: f64,
    k_range: std::ops::RangeInclusive<usize>,
) -> Result<Vec<f64>> {
    let n = eigenvalues.len();
    let (lo, hi) = (*k_range.start(), *k_range.end());
    if lo < 1 || hi > n || lo > hi {
        return Err(Error::invalid("k_range", format!("range {lo}..={hi} invalid for N = {n}")));
    }
    if !(edge > 0.0) {
        return Err(Error::invalid("edge", "edge must be positive"));
    }
    let nf = n as f64;
    let mut residuals = Vec::with_capacity(hi - lo + 1);
    for k in lo..=hi {
        let gamma = spectral::gamma_sc(k, n)? * edge / 2.0;
        let denom = nf.powf(-2.0 / 3.0) * (k.min(n - k + 1) as f64).powf(-1.0 / 3.0);
        residuals.push((eigenvalues[k - 1] - gamma) / denom);
    }
    Ok(residuals)
}
