//! Random-matrix ensembles and deterministic probe objects.
//!
//! Three laws are exposed: a rescaled sparse Erdos-Renyi adjacency matrix
//! (Bernoulli entries, mean removed into an explicit rank-one shift), a
//! general sparse two-point law parameterized by the sparsity scale q, and
//! the GOE baseline. All entries are drawn over the upper triangle in
//! row-major order from a stream addressed by (master_seed, purpose,
//! sample_index), so samples are bit-reproducible under any scheduling.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::matrix::SymmetricMatrix;
use crate::rng::stream_rng;
use crate::spectral;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    SparseEr,
    GeneralSparse,
    Goe,
}

impl EnsembleKind {
    pub fn tag(&self) -> &'static str {
        match self {
            EnsembleKind::SparseEr => "sparse-er",
            EnsembleKind::GeneralSparse => "general-sparse",
            EnsembleKind::Goe => "goe",
        }
    }
}

/// Full parameterization of a matrix law.
///
/// `p` applies to SparseEr only; `q` and `f` to GeneralSparse only. For
/// SparseEr both q = sqrt(Np) and f = sqrt(Np/(1-p)) are derived, never
/// stored, so the parameters cannot drift out of consistency. GOE has no
/// shift.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(default = "default_tau")]
    pub tau: f64,
    pub master_seed: u64,
    /// Loopless-graph variant: force the adjacency diagonal to zero.
    #[serde(default)]
    pub zero_diagonal: bool,
}

fn default_tau() -> f64 {
    0.3
}

impl EnsembleSpec {
    pub fn sparse_er(n: usize, p: f64, master_seed: u64) -> Self {
        EnsembleSpec {
            kind: EnsembleKind::SparseEr,
            n,
            p: Some(p),
            q: None,
            f: None,
            tau: default_tau(),
            master_seed,
            zero_diagonal: false,
        }
    }

    pub fn general_sparse(n: usize, q: f64, f: f64, master_seed: u64) -> Self {
        EnsembleSpec {
            kind: EnsembleKind::GeneralSparse,
            n,
            p: None,
            q: Some(q),
            f: Some(f),
            tau: default_tau(),
            master_seed,
            zero_diagonal: false,
        }
    }

    pub fn goe(n: usize, master_seed: u64) -> Self {
        EnsembleSpec {
            kind: EnsembleKind::Goe,
            n,
            p: None,
            q: None,
            f: None,
            tau: default_tau(),
            master_seed,
            zero_diagonal: false,
        }
    }

    /// Sparsity scale: sqrt(Np) for SparseEr, q for GeneralSparse, and the
    /// dense endpoint sqrt(N) for GOE.
    pub fn q(&self) -> f64 {
        match self.kind {
            EnsembleKind::SparseEr => (self.n as f64 * self.p.unwrap_or(0.0)).sqrt(),
            EnsembleKind::GeneralSparse => self.q.unwrap_or(0.0),
            EnsembleKind::Goe => (self.n as f64).sqrt(),
        }
    }

    /// Rank-one shift magnitude; 0 means no shift.
    pub fn f(&self) -> f64 {
        match self.kind {
            EnsembleKind::SparseEr => {
                let p = self.p.unwrap_or(0.0);
                (self.n as f64 * p / (1.0 - p)).sqrt()
            }
            EnsembleKind::GeneralSparse => self.f.unwrap_or_else(|| self.q()),
            EnsembleKind::Goe => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid("N", format!("need N >= 2, got {}", self.n)));
        }
        if !(self.tau > 0.0 && self.tau <= 0.5) {
            return Err(Error::invalid("tau", format!("need tau in (0, 1/2], got {}", self.tau)));
        }
        match self.kind {
            EnsembleKind::SparseEr => {
                let p = self.p.ok_or_else(|| Error::invalid("p", "required for sparse-er"))?;
                if !(p > 0.0 && p <= 0.5) {
                    return Err(Error::invalid("p", format!("need p in (0, 1/2], got {p}")));
                }
                if self.q.is_some() || self.f.is_some() {
                    return Err(Error::invalid("q", "q and f are derived for sparse-er; do not set them"));
                }
            }
            EnsembleKind::GeneralSparse => {
                if self.p.is_some() {
                    return Err(Error::invalid("p", "p applies to sparse-er only"));
                }
                let q = self.q.ok_or_else(|| Error::invalid("q", "required for general-sparse"))?;
                let n = self.n as f64;
                if !(q >= n.powf(self.tau) && q <= n.sqrt()) {
                    return Err(Error::invalid(
                        "q",
                        format!("need N^tau = {:.4} <= q <= sqrt(N) = {:.4}, got {q}", n.powf(self.tau), n.sqrt()),
                    ));
                }
                let f = self.f();
                if !(f >= self.tau * q && f <= q / self.tau) {
                    return Err(Error::invalid(
                        "f",
                        format!("need tau*q = {:.4} <= f <= q/tau = {:.4}, got {f}", self.tau * q, q / self.tau),
                    ));
                }
            }
            EnsembleKind::Goe => {
                if self.p.is_some() || self.q.is_some() || self.f.is_some() {
                    return Err(Error::invalid("p", "goe takes no p, q, or f"));
                }
            }
        }
        Ok(())
    }
}

/// The constant unit vector e = N^(-1/2) (1, ..., 1).
pub fn e_vector(n: usize) -> Vec<f64> {
    vec![1.0 / (n as f64).sqrt(); n]
}

/// Deterministic rescaling step of the Erdos-Renyi reduction: given the 0/1
/// adjacency indicator, A = chi / sqrt(Np(1-p)) and H = (chi - p) /
/// sqrt(Np(1-p)), which is exactly A - f ee^T.
fn er_rescale(chi: &SymmetricMatrix, p: f64) -> (SymmetricMatrix, SymmetricMatrix) {
    let n = chi.n();
    let scale = 1.0 / (n as f64 * p * (1.0 - p)).sqrt();
    let a = SymmetricMatrix::from_fn(n, |i, j| chi.get(i, j) * scale);
    let h = SymmetricMatrix::from_fn(n, |i, j| (chi.get(i, j) - p) * scale);
    (a, h)
}

/// Sample the rescaled adjacency matrix A and its centered part H = A - f ee^T.
pub fn sample_er_rescaled(spec: &EnsembleSpec, sample_index: u64) -> Result<(SymmetricMatrix, SymmetricMatrix)> {
    spec.validate()?;
    if spec.kind != EnsembleKind::SparseEr {
        return Err(Error::invalid("kind", "sample_er_rescaled needs a sparse-er spec"));
    }
    let p = spec.p.unwrap();
    let n = spec.n;
    let mut rng = stream_rng(spec.master_seed, "er-matrix", sample_index);
    let zero_diag = spec.zero_diagonal;
    let chi = SymmetricMatrix::from_fn(n, |i, j| {
        if zero_diag && i == j {
            0.0
        } else {
            (rng.random::<f64>() < p) as u8 as f64
        }
    });
    Ok(er_rescale(&chi, p))
}

/// Sample the general sparse law: centered two-point entries with
/// E H_ij^2 = 1/N and fourth moment of order 1/(N q^2).
pub fn sample_general_sparse(spec: &EnsembleSpec, sample_index: u64) -> Result<SymmetricMatrix> {
    spec.validate()?;
    if spec.kind != EnsembleKind::GeneralSparse {
        return Err(Error::invalid("kind", "sample_general_sparse needs a general-sparse spec"));
    }
    let n = spec.n;
    let (v_plus, v_minus, theta) = two_point_values(n, spec.q());
    let mut rng = stream_rng(spec.master_seed, "gs-matrix", sample_index);
    Ok(SymmetricMatrix::from_fn(n, |_, _| {
        if rng.random::<f64>() < theta {
            v_plus
        } else {
            v_minus
        }
    }))
}

/// Two-point law realizing the sparse moment conditions: value
/// (1-theta)/(sqrt(N) theta~) with probability theta = q^2/N, else
/// -theta/(sqrt(N) theta~), where theta~ = sqrt(theta(1-theta)). The
/// degenerate endpoints are avoided by clamping theta to [1/N, 1/2]; the
/// dense endpoint q = sqrt(N) therefore becomes symmetric Rademacher/sqrt(N).
fn two_point_values(n: usize, q: f64) -> (f64, f64, f64) {
    let nf = n as f64;
    let theta = (q * q / nf).clamp(1.0 / nf, 0.5);
    let theta_tilde = (theta * (1.0 - theta)).sqrt();
    let v_plus = (1.0 - theta) / (nf.sqrt() * theta_tilde);
    let v_minus = -theta / (nf.sqrt() * theta_tilde);
    (v_plus, v_minus, theta)
}

/// A = H + f ee^T, i.e. every entry shifted by f/N.
pub fn add_rank_one(h: &SymmetricMatrix, f: f64) -> SymmetricMatrix {
    let n = h.n();
    let shift = f / n as f64;
    SymmetricMatrix::from_fn(n, |i, j| h.get(i, j) + shift)
}

/// GOE sample: off-diagonal Normal(0, 1/N), diagonal Normal(0, 2/N).
pub fn sample_goe(n: usize, master_seed: u64, sample_index: u64) -> SymmetricMatrix {
    let sd_off = (1.0 / n as f64).sqrt();
    let sd_diag = (2.0 / n as f64).sqrt();
    let mut rng = stream_rng(master_seed, "goe-matrix", sample_index);
    SymmetricMatrix::from_fn(n, |i, j| {
        let g: f64 = rng.sample(StandardNormal);
        g * if i == j { sd_diag } else { sd_off }
    })
}

/// Sample the centered matrix H for any ensemble kind.
pub fn sample_h(spec: &EnsembleSpec, sample_index: u64) -> Result<SymmetricMatrix> {
    match spec.kind {
        EnsembleKind::SparseEr => Ok(sample_er_rescaled(spec, sample_index)?.1),
        EnsembleKind::GeneralSparse => sample_general_sparse(spec, sample_index),
        EnsembleKind::Goe => {
            spec.validate()?;
            Ok(sample_goe(spec.n, spec.master_seed, sample_index))
        }
    }
}

/// Sample (A, H) with A = H + f ee^T; for GOE the two coincide (f = 0).
pub fn sample_shifted(spec: &EnsembleSpec, sample_index: u64) -> Result<(SymmetricMatrix, SymmetricMatrix)> {
    match spec.kind {
        EnsembleKind::SparseEr => sample_er_rescaled(spec, sample_index),
        EnsembleKind::GeneralSparse => {
            let h = sample_general_sparse(spec, sample_index)?;
            let a = add_rank_one(&h, spec.f());
            Ok((a, h))
        }
        EnsembleKind::Goe => {
            let h = sample_h(spec, sample_index)?;
            Ok((h.clone(), h))
        }
    }
}

/// k deterministic unit vectors orthogonal to e, optionally orthonormal.
/// Gaussian draws are centered (projecting out e) and, with the flag set,
/// Gram-Schmidt orthogonalized against earlier vectors.
pub fn make_perp_frame(n: usize, k: usize, frame_seed: u64, orthonormal: bool) -> Result<Vec<Vec<f64>>> {
    if k < 1 || k >= n {
        return Err(Error::invalid("k", format!("need 1 <= k <= N - 1 = {}, got {k}", n - 1)));
    }
    let mut rng = stream_rng(frame_seed, "frame", 0);
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(k);
    while frame.len() < k {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let mean = v.iter().sum::<f64>() / n as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        if orthonormal {
            for prev in &frame {
                let c = spectral::dot(&v, prev);
                v.iter_mut().zip(prev).for_each(|(x, p)| *x -= c * p);
            }
        }
        let norm = spectral::dot(&v, &v).sqrt();
        if norm < 1e-6 {
            continue; // degenerate draw; take the next one
        }
        v.iter_mut().for_each(|x| *x /= norm);
        frame.push(v);
    }
    Ok(frame)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservableKind {
    DiagPM,
    CenteredProjection,
    RandomSym,
}

impl ObservableKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ObservableKind::DiagPM => "diag-pm",
            ObservableKind::CenteredProjection => "centered-projection",
            ObservableKind::RandomSym => "random-sym",
        }
    }
}

/// Deterministic traceless observable with tr B^2 well above N^tau ||B||^2.
pub fn make_traceless_observable(n: usize, kind: ObservableKind, obs_seed: u64) -> Result<SymmetricMatrix> {
    match kind {
        ObservableKind::DiagPM => {
            if n % 2 != 0 {
                return Err(Error::invalid("N", "diag-pm observable needs even N"));
            }
            Ok(SymmetricMatrix::from_fn(n, |i, j| {
                if i != j {
                    0.0
                } else if i < n / 2 {
                    1.0
                } else {
                    -1.0
                }
            }))
        }
        ObservableKind::CenteredProjection => {
            let r = n / 4;
            if r == 0 {
                return Err(Error::invalid("N", "centered projection needs N >= 4"));
            }
            let off = r as f64 / n as f64;
            Ok(SymmetricMatrix::from_fn(n, |i, j| {
                if i != j {
                    0.0
                } else if i < r {
                    1.0 - off
                } else {
                    -off
                }
            }))
        }
        ObservableKind::RandomSym => {
            let mut b = sample_goe(n, obs_seed, 0);
            b.make_traceless();
            let evals = spectral::eigenvalues_desc(&b)?;
            let op_norm = evals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            b.scale(1.0 / op_norm);
            Ok(b)
        }
    }
}

/// Deterministic probe directions and observables for one experiment:
/// an orthonormal frame in the orthogonal complement of e plus a set of
/// traceless observables.
#[derive(Clone, Debug)]
pub struct ProbeSet {
    pub n: usize,
    pub vectors: Vec<Vec<f64>>,
    pub observables: Vec<(ObservableKind, SymmetricMatrix)>,
    pub e: Vec<f64>,
    /// Whether the vectors are constrained to the orthogonal complement of
    /// e. Scans of the centered matrix H admit arbitrary directions; scans
    /// of the shifted matrix A require perpendicular probes.
    pub perp_to_e: bool,
}

impl ProbeSet {
    pub fn build(
        n: usize,
        tau: f64,
        n_vectors: usize,
        frame_seed: u64,
        observable_kinds: &[ObservableKind],
        obs_seed: u64,
    ) -> Result<ProbeSet> {
        let vectors = make_perp_frame(n, n_vectors, frame_seed, true)?;
        let observables = observable_kinds
            .iter()
            .map(|&kind| Ok((kind, make_traceless_observable(n, kind, obs_seed)?)))
            .collect::<Result<Vec<_>>>()?;
        let set = ProbeSet { n, vectors, observables, e: e_vector(n), perp_to_e: true };
        set.validate(tau)?;
        Ok(set)
    }

    /// Probe invariants: unit norms, orthogonality to e (when flagged),
    /// traceless observables with tr B^2 >= N^tau ||B||^2.
    pub fn validate(&self, tau: f64) -> Result<()> {
        for (idx, v) in self.vectors.iter().enumerate() {
            let norm = spectral::dot(v, v).sqrt();
            if (norm - 1.0).abs() >= 1e-12 {
                return Err(Error::invalid("vectors", format!("probe {idx} has norm {norm}")));
            }
            if self.perp_to_e {
                let overlap = spectral::dot(v, &self.e).abs();
                if overlap >= 1e-12 {
                    return Err(Error::invalid("vectors", format!("probe {idx} overlaps e by {overlap:.2e}")));
                }
            }
        }
        for (kind, b) in &self.observables {
            if b.trace().abs() >= 1e-10 {
                return Err(Error::invalid("observables", format!("{} has trace {:.2e}", kind.tag(), b.trace())));
            }
            let evals = spectral::eigenvalues_desc(b)?;
            let op_norm = evals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let floor = (self.n as f64).powf(tau) * op_norm * op_norm;
            if b.trace_sq() < floor {
                return Err(Error::invalid(
                    "observables",
                    format!("{}: tr B^2 = {:.4} below N^tau ||B||^2 = {:.4}", kind.tag(), b.trace_sq(), floor),
                ));
            }
        }
        Ok(())
    }
}
