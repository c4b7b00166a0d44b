//! Quantum-ergodicity fluctuation statistics for Wigner matrices and the
//! matrix-element bound scan: diagonal observables N<u_a, B u_a>/sqrt(2 tr B^2)
//! should fluctuate like standard Gaussians, and all normalized matrix
//! elements N|<u_i, B u_j>|/sqrt(tr B^2) should stay logarithmically small.

use serde::Serialize;

use crate::ensemble::{self, EnsembleSpec};
use crate::matrix::SymmetricMatrix;
use crate::rng::stream_rng;
use crate::spectral::{self, SpectralData};
use crate::{Error, Result};

/// One diagonal fluctuation statistic N <u_a, B u_a> / sqrt(2 tr B^2).
#[derive(Clone, Debug, Serialize)]
pub struct EthSample {
    pub sample_index: u64,
    /// eigenvalue index, 1-based descending
    pub a: usize,
    pub obs_tag: String,
    pub stat: f64,
}

/// Entry law of the Wigner sampler. Both laws share one distribution for
/// every entry of a sample, as the fluctuation theory requires.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WignerLaw {
    /// Gaussian entries; the smoothest law, fastest convergence
    Goe,
    /// entries +-1/sqrt(N), the two-point law at its dense endpoint
    Rademacher,
}

impl WignerLaw {
    pub fn tag(&self) -> &'static str {
        match self {
            WignerLaw::Goe => "goe",
            WignerLaw::Rademacher => "rademacher",
        }
    }
}

/// One Wigner sample under the chosen entry law.
pub fn sample_wigner(n: usize, law: WignerLaw, master_seed: u64, sample_index: u64) -> Result<SymmetricMatrix> {
    match law {
        WignerLaw::Goe => Ok(ensemble::sample_goe(n, master_seed, sample_index)),
        WignerLaw::Rademacher => {
            let nf = n as f64;
            let spec = EnsembleSpec::general_sparse(n, nf.sqrt(), nf.sqrt(), master_seed);
            ensemble::sample_general_sparse(&spec, sample_index)
        }
    }
}

/// Check an observable's contract (dimension, traceless, Hilbert-Schmidt
/// norm at least N^tau times the operator norm squared) and return its
/// operator norm.
pub fn validate_observable(n: usize, tau: f64, b: &SymmetricMatrix) -> Result<f64> {
    if b.n() != n {
        return Err(Error::invalid("observables", "observable dimension mismatch"));
    }
    if b.trace().abs() >= 1e-8 {
        return Err(Error::invalid("observables", format!("observable not traceless, tr B = {:.2e}", b.trace())));
    }
    let trace_sq = b.trace_sq();
    let op_norm = spectral::eigenvalues_desc(b)?
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if trace_sq < (n as f64).powf(tau) * op_norm * op_norm {
        return Err(Error::invalid(
            "observables",
            format!("tr B^2 = {trace_sq:.3e} below the N^tau ||B||^2 floor"),
        ));
    }
    Ok(op_norm)
}

/// Diagonal fluctuation statistics over M Wigner samples, one per
/// (sample, observable, index) triple.
pub fn eth_edge_samples(
    n: usize,
    tau: f64,
    observables: &[(String, SymmetricMatrix)],
    a_list: &[usize],
    m: usize,
    law: WignerLaw,
    master_seed: u64,
) -> Result<Vec<EthSample>> {
    if observables.is_empty() {
        return Err(Error::invalid("observables", "need at least one observable"));
    }
    if a_list.iter().any(|&a| a < 1 || a > n) {
        return Err(Error::invalid("a_list", "eigenvector index out of range"));
    }
    let mut op_norms = Vec::with_capacity(observables.len());
    for (_, b) in observables {
        op_norms.push(validate_observable(n, tau, b)?);
    }
    let mut out = Vec::with_capacity(m * observables.len() * a_list.len());
    for idx in 0..m as u64 {
        let h = sample_wigner(n, law, master_seed, idx)?;
        let s = spectral::eigh(&h)?;
        for ((tag, b), &op_norm) in observables.iter().zip(&op_norms) {
            let cap = n as f64 * op_norm / (2.0 * b.trace_sq()).sqrt();
            for &a in a_list {
                let stat = eth_stat_one(&s, b, a);
                assert!(stat.is_finite() && stat.abs() <= cap + 1e-9, "fluctuation statistic out of range: {stat}");
                out.push(EthSample { sample_index: idx, a, obs_tag: tag.clone(), stat });
            }
        }
    }
    Ok(out)
}

/// One diagonal fluctuation statistic N <u_a, B u_a> / sqrt(2 tr B^2)
/// from already-computed spectral data; `a` is 1-based from the top.
pub fn eth_stat_one(s: &SpectralData, b: &SymmetricMatrix, a: usize) -> f64 {
    let n = s.n();
    assert!(a >= 1 && a <= n && b.n() == n, "index or dimension out of range");
    let u = s.eigenvector(a - 1);
    n as f64 / (2.0 * b.trace_sq()).sqrt() * b.quad_form(u, u)
}

/// Result of the matrix-element scan.
#[derive(Clone, Copy, Debug)]
pub struct EthScan {
    /// max over scanned pairs of N |<u_i, B u_j>| / sqrt(tr B^2)
    pub value: f64,
    /// number of off-diagonal pairs scanned
    pub pairs: usize,
    /// true when the spectrum has a numerically degenerate gap, which
    /// makes eigenvector matrix elements basis artifacts
    pub degenerate_spectrum: bool,
}

/// Number of subsampled off-diagonal pairs in the default scan.
pub const ETH_SCAN_PAIRS: usize = 10_000;

/// Scan normalized matrix elements N |<u_i, B u_j>| / sqrt(tr B^2) over
/// all diagonal pairs plus 10^4 seeded off-diagonal pairs (or every pair
/// when `full` is set or the spectrum is small).
pub fn eth_bound_scan(s: &SpectralData, b: &SymmetricMatrix, full: bool) -> Result<EthScan> {
    let n = s.n();
    if b.n() != n {
        return Err(Error::invalid("B", "observable dimension mismatch"));
    }
    if b.trace().abs() >= 1e-8 {
        return Err(Error::invalid("B", format!("observable not traceless, tr B = {:.2e}", b.trace())));
    }
    let norm = n as f64 / b.trace_sq().sqrt();

    let evals = s.eigenvalues();
    let scale = 1.0 + evals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let degenerate = evals.windows(2).any(|w| w[0] - w[1] <= 1e-12 * scale);

    // precompute B u_j once per eigenvector
    let images: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut y = vec![0.0; n];
            b.apply(s.eigenvector(j), &mut y);
            y
        })
        .collect();

    let mut max_stat = 0.0f64;
    for i in 0..n {
        max_stat = max_stat.max(spectral::dot(s.eigenvector(i), &images[i]).abs());
    }

    let exhaustive = full || n * (n - 1) / 2 <= ETH_SCAN_PAIRS;
    let pairs = if exhaustive {
        for i in 0..n {
            for j in i + 1..n {
                max_stat = max_stat.max(spectral::dot(s.eigenvector(i), &images[j]).abs());
            }
        }
        n * (n - 1) / 2
    } else {
        let mut rng = stream_rng(0x5ca9, "eth-pair-subsample", n as u64);
        use rand::Rng;
        for _ in 0..ETH_SCAN_PAIRS {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            max_stat = max_stat.max(spectral::dot(s.eigenvector(i), &images[j]).abs());
        }
        ETH_SCAN_PAIRS
    };

    Ok(EthScan { value: norm * max_stat, pairs, degenerate_spectrum: degenerate })
}
