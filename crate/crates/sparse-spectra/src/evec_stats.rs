//! Eigenvector distribution suites: joint Gaussianity of edge eigenvector
//! overlaps, bulk overlap moments, top-eigenvector alignment, and the
//! Poisson-kernel smoothing identity that recovers an overlap from the
//! resolvent alone.

use num_complex::Complex64;
use serde::Serialize;

use crate::ensemble::{self, EnsembleSpec, ProbeSet};
use crate::spectral::{self, SpectralData};
use crate::{Error, Result};

/// One emitted overlap statistic N <v, u_a> <w, u_a>.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OverlapSample {
    pub sample_index: u64,
    /// eigenvalue index, 1-based descending; 2 is the first non-trivial one
    pub a: usize,
    /// probe indices (i, j) with i <= j into the probe set
    pub pair: (usize, usize),
    /// <v, w> of the probe pair
    pub vw_inner: f64,
    pub value: f64,
}

/// Reject spectra whose requested eigenvalue is numerically degenerate
/// with a neighbor; overlaps of a degenerate level are basis artifacts.
fn check_nondegenerate(s: &SpectralData, a: usize) -> Result<()> {
    let evals = s.eigenvalues();
    let scale = 1.0 + evals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lower = if a < evals.len() { evals[a - 1] - evals[a] } else { f64::INFINITY };
    let upper = evals[a - 2] - evals[a - 1];
    if lower <= 1e-12 * scale || upper <= 1e-12 * scale {
        return Err(Error::invalid(
            "spec",
            format!("eigenvalue {a} is degenerate with a neighbor; overlap statistics undefined"),
        ));
    }
    Ok(())
}

/// Overlap statistics of one decomposed sample for every unordered probe
/// pair and every requested eigenvector index.
pub fn overlap_values_from_spectral(
    s: &SpectralData,
    probes: &ProbeSet,
    a_list: &[usize],
    sample_index: u64,
) -> Result<Vec<OverlapSample>> {
    if probes.n != s.n() {
        return Err(Error::invalid("probes", format!("probe dimension {} vs spectral dimension {}", probes.n, s.n())));
    }
    if !probes.perp_to_e {
        return Err(Error::invalid("probes", "edge overlap statistics need probes orthogonal to e"));
    }
    for &a in a_list {
        if !(2..=6).contains(&a) {
            return Err(Error::invalid("a_list", format!("eigenvector index {a} outside the edge range 2..=6")));
        }
        check_nondegenerate(s, a)?;
    }
    let nf = s.n() as f64;
    let mut out = Vec::with_capacity(a_list.len() * probes.vectors.len() * (probes.vectors.len() + 1) / 2);
    for &a in a_list {
        let u = s.eigenvector(a - 1);
        let ov: Vec<f64> = probes.vectors.iter().map(|v| spectral::dot(v, u)).collect();
        for i in 0..probes.vectors.len() {
            for j in i..probes.vectors.len() {
                out.push(OverlapSample {
                    sample_index,
                    a,
                    pair: (i, j),
                    vw_inner: spectral::dot(&probes.vectors[i], &probes.vectors[j]),
                    value: nf * ov[i] * ov[j],
                });
            }
        }
    }
    Ok(out)
}

/// Draw M samples of the shifted ensemble and emit edge overlap statistics
/// for each requested eigenvector index and probe pair.
pub fn edge_overlap_samples(
    spec: &EnsembleSpec,
    probes: &ProbeSet,
    a_list: &[usize],
    m: usize,
) -> Result<Vec<OverlapSample>> {
    let mut out = Vec::new();
    for idx in 0..m as u64 {
        let (a_mat, _) = ensemble::sample_shifted(spec, idx)?;
        let s = spectral::eigh(&a_mat)?;
        out.extend(overlap_values_from_spectral(&s, probes, a_list, idx)?);
    }
    Ok(out)
}

/// Limiting characteristic function of N<v,u><w,u>:
/// g(t) = (1 - 2i<v,w>t + (1 - <v,w>^2) t^2)^(-1/2), principal branch.
/// The argument of the square root has real part >= 1, so the branch is
/// continuous in t.
pub fn target_cf(t: f64, vw_inner: f64) -> Complex64 {
    assert!(vw_inner.abs() <= 1.0 + 1e-12, "|<v,w>| must be <= 1");
    let s = vw_inner.clamp(-1.0, 1.0);
    let w = Complex64::new(1.0 + (1.0 - s * s) * t * t, -2.0 * s * t);
    w.sqrt().inv()
}

/// Empirical vs limiting characteristic function on a t grid.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EcfRow {
    pub t: f64,
    pub re_emp: f64,
    pub im_emp: f64,
    pub re_target: f64,
    pub im_target: f64,
}

pub fn ecf_comparison(values: &[f64], vw_inner: f64, t_grid: &[f64]) -> Result<Vec<EcfRow>> {
    let emp = crate::stat_tests::empirical_cf(values, t_grid)?;
    Ok(t_grid
        .iter()
        .zip(emp)
        .map(|(&t, e)| {
            let g = target_cf(t, vw_inner);
            EcfRow { t, re_emp: e.re, im_emp: e.im, re_target: g.re, im_target: g.im }
        })
        .collect())
}

/// sup over the grid of |empirical CF - target CF|.
pub fn ecf_sup_distance(values: &[f64], vw_inner: f64, t_grid: &[f64]) -> Result<f64> {
    let rows = ecf_comparison(values, vw_inner, t_grid)?;
    Ok(rows
        .iter()
        .map(|r| ((r.re_emp - r.re_target).powi(2) + (r.im_emp - r.im_target).powi(2)).sqrt())
        .fold(0.0, f64::max))
}

/// Moment summary of bulk overlaps N<v,u_i>^2 against the Gaussian
/// targets E Z^2 = 1, E Z^4 = 3, E Z_i^2 Z_j^2 = 1.
#[derive(Clone, Debug, Serialize)]
pub struct BulkMomentRow {
    /// eigenvalue index, 1-based descending
    pub i: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub fourth: f64,
    pub fourth_se: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BulkCrossRow {
    pub i: usize,
    pub j: usize,
    pub value: f64,
    pub se: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BulkMomentTable {
    pub rows: Vec<BulkMomentRow>,
    pub cross: Vec<BulkCrossRow>,
}

/// N<v,u_i>^2 for each requested bulk index of one decomposed sample.
pub fn bulk_values_from_spectral(s: &SpectralData, probe: &[f64], i_list: &[usize]) -> Result<Vec<f64>> {
    if probe.len() != s.n() {
        return Err(Error::invalid("probe", "dimension mismatch"));
    }
    let nf = s.n() as f64;
    Ok(i_list
        .iter()
        .map(|&i| {
            let ov = spectral::dot(probe, s.eigenvector(i - 1));
            nf * ov * ov
        })
        .collect())
}

pub(crate) fn validate_bulk_indices(n: usize, tau: f64, i_list: &[usize]) -> Result<()> {
    if i_list.is_empty() {
        return Err(Error::invalid("i_list", "need at least one bulk index"));
    }
    let lo = (tau * n as f64).ceil() as usize;
    let hi = ((1.0 - tau) * n as f64).floor() as usize;
    for &i in i_list {
        if i < lo.max(1) || i > hi.min(n) {
            return Err(Error::invalid("i_list", format!("index {i} outside the bulk window [{lo}, {hi}]")));
        }
    }
    Ok(())
}

/// Sample M matrices and tabulate bulk overlap moments for a unit probe
/// orthogonal to e.
pub fn bulk_moment_check(
    spec: &EnsembleSpec,
    probe: &[f64],
    i_list: &[usize],
    m: usize,
) -> Result<BulkMomentTable> {
    validate_bulk_indices(spec.n, spec.tau, i_list)?;
    if probe.len() != spec.n {
        return Err(Error::invalid("probe", "dimension mismatch"));
    }
    let norm = spectral::dot(probe, probe).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("probe", format!("probe must be a unit vector, norm = {norm}")));
    }
    if m < 2 {
        return Err(Error::invalid("M", "need at least 2 samples for standard errors"));
    }
    let mut per_index: Vec<Vec<f64>> = vec![Vec::with_capacity(m); i_list.len()];
    for idx in 0..m as u64 {
        let (a_mat, _) = ensemble::sample_shifted(spec, idx)?;
        let s = spectral::eigh(&a_mat)?;
        for (slot, value) in per_index.iter_mut().zip(bulk_values_from_spectral(&s, probe, i_list)?) {
            slot.push(value);
        }
    }
    bulk_table_from_values(i_list, &per_index)
}

/// Tabulate moments from pre-collected per-index overlap values
/// (per_index[k][sample] = N<v,u_{i_list[k]}>^2).
pub fn bulk_table_from_values(i_list: &[usize], per_index: &[Vec<f64>]) -> Result<BulkMomentTable> {
    if per_index.len() != i_list.len() || per_index.iter().any(|v| v.len() != per_index[0].len()) {
        return Err(Error::invalid("per_index", "value table shape mismatch"));
    }
    let rows = i_list
        .iter()
        .zip(per_index)
        .map(|(&i, vals)| {
            let (mean, mean_se) = crate::stat_tests::mean_and_se(vals);
            let squares: Vec<f64> = vals.iter().map(|x| x * x).collect();
            let (fourth, fourth_se) = crate::stat_tests::mean_and_se(&squares);
            BulkMomentRow { i, mean, mean_se, fourth, fourth_se }
        })
        .collect();
    let mut cross = Vec::new();
    for a in 0..i_list.len() {
        for b in a + 1..i_list.len() {
            let products: Vec<f64> = per_index[a].iter().zip(&per_index[b]).map(|(x, y)| x * y).collect();
            let (value, se) = crate::stat_tests::mean_and_se(&products);
            cross.push(BulkCrossRow { i: i_list[a], j: i_list[b], value, se });
        }
    }
    Ok(BulkMomentTable { rows, cross })
}

/// Deviation statistics of the top eigenvalue and eigenvector from their
/// rank-one predictions: dev_lambda1 = (lambda_1 - f) f and
/// dev_align = (<e,u_1> - 1 + 1/(2f^2)) min(f^3, sqrt(N) f), with the sign
/// of u_1 fixed so <e,u_1> >= 0.
pub fn top_alignment_check(s: &SpectralData, f: f64) -> Result<(f64, f64)> {
    if !(f >= 3.0) {
        return Err(Error::invalid("f", format!("top alignment expansion needs f >= 3, got {f}")));
    }
    let n = s.n();
    let e = ensemble::e_vector(n);
    let align = spectral::dot(&e, s.eigenvector(0)).abs();
    let dev_lambda1 = (s.eigenvalue(0) - f) * f;
    let scale = (f * f * f).min((n as f64).sqrt() * f);
    let dev_align = (align - 1.0 + 1.0 / (2.0 * f * f)) * scale;
    Ok((dev_lambda1, dev_align))
}

/// Spectral-scale parameters of the smoothing identity.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SmoothingParams {
    pub n: usize,
    pub xi: f64,
    pub delta: f64,
    /// eta_plus = N^(-2/3-xi), the Poisson kernel width
    pub eta_plus: f64,
    /// eta_minus = N^(-2/3-6 xi), the finer companion scale
    pub eta_minus: f64,
}

impl SmoothingParams {
    /// Direct construction from desk-scale exponents. Structural
    /// requirement only: 0 < delta < xi <= 1/2, so the window N^delta
    /// eta_plus stays well below the eigenvalue spacing scale.
    pub fn desk(n: usize, xi: f64, delta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("N", "need N >= 2"));
        }
        if !(xi > 0.0 && xi <= 0.5) {
            return Err(Error::invalid("xi", format!("xi must lie in (0, 1/2], got {xi}")));
        }
        if !(delta > 0.0 && delta < xi) {
            return Err(Error::invalid("delta", format!("delta must lie in (0, xi), got {delta}")));
        }
        let nf = n as f64;
        Ok(SmoothingParams {
            n,
            xi,
            delta,
            eta_plus: nf.powf(-2.0 / 3.0 - xi),
            eta_minus: nf.powf(-2.0 / 3.0 - 6.0 * xi),
        })
    }

    /// Asymptotic parameter chain delta < xi/100 < tau/10000.
    pub fn asymptotic_scaled(n: usize, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau <= 0.5) {
            return Err(Error::invalid("tau", "tau must lie in (0, 1/2]"));
        }
        let xi = tau / 200.0;
        let delta = xi / 200.0;
        let sp = Self::desk(n, xi, delta)?;
        debug_assert!(sp.delta < sp.xi / 100.0 && sp.xi < tau / 100.0);
        Ok(sp)
    }

    /// Half-width N^delta eta_plus of the energy window around lambda_2.
    pub fn window_halfwidth(&self) -> f64 {
        (self.n as f64).powf(self.delta) * self.eta_plus
    }

    /// Fraction of a centered Poisson kernel's mass inside the window:
    /// (2/pi) atan(N^delta).
    pub fn capture(&self) -> f64 {
        2.0 / std::f64::consts::PI * (self.n as f64).powf(self.delta).atan()
    }

    /// Minimal admissible gap lambda_2 - lambda_3.
    pub fn min_gap(&self) -> f64 {
        2.0 * self.window_halfwidth()
    }
}

/// Result of the smoothing identity on one sample.
#[derive(Clone, Copy, Debug)]
pub struct SmoothedOverlap {
    /// (N/pi) int over the window of Im<v, G(E + i eta_plus) w> dE,
    /// divided by the kernel capture factor; NaN when the gap check fails
    pub value: f64,
    /// the overlap N<v,u_2><w,u_2> read directly from the eigenvectors
    pub direct: f64,
    /// lambda_2 - lambda_3
    pub gap: f64,
    pub gap_too_small: bool,
}

fn check_unit(name: &'static str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::invalid(name, "dimension mismatch"));
    }
    let norm = spectral::dot(v, v).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(name, format!("must be a unit vector, norm = {norm}")));
    }
    Ok(())
}

/// Composite Simpson rule with the given (even) panel count.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for k in 1..panels {
        let weight = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += weight * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

fn smoothed_with_panels(
    s: &SpectralData,
    v: &[f64],
    w: &[f64],
    sp: &SmoothingParams,
    panels: usize,
) -> Result<SmoothedOverlap> {
    let n = s.n();
    if sp.n != n {
        return Err(Error::invalid("sp", format!("smoothing parameters built for N = {}, spectrum has N = {n}", sp.n)));
    }
    if n < 3 {
        return Err(Error::invalid("S", "need at least three eigenvalues"));
    }
    check_unit("v", v, n)?;
    check_unit("w", w, n)?;

    let lambda2 = s.eigenvalue(1);
    let gap = lambda2 - s.eigenvalue(2);
    let ov_v = s.overlaps(v);
    let ov_w = s.overlaps(w);
    let direct = n as f64 * ov_v[1] * ov_w[1];
    if gap <= sp.min_gap() {
        return Ok(SmoothedOverlap { value: f64::NAN, direct, gap, gap_too_small: true });
    }

    let eta = sp.eta_plus;
    let evals = s.eigenvalues();
    let integrand = |e: f64| -> f64 {
        let mut acc = 0.0;
        for k in 0..n {
            let d = evals[k] - e;
            acc += ov_v[k] * ov_w[k] * eta / (d * d + eta * eta);
        }
        acc
    };
    let half = sp.window_halfwidth();
    let integral = simpson(&integrand, lambda2 - half, lambda2 + half, panels);
    let value = n as f64 / std::f64::consts::PI * integral / sp.capture();
    Ok(SmoothedOverlap { value, direct, gap, gap_too_small: false })
}

/// Minimum panel count for the window quadrature; the integrand varies on
/// the scale eta_plus and the window is only ~N^delta eta_plus wide, so
/// Simpson converges rapidly from here.
pub const SMOOTHING_MIN_PANELS: usize = 256;

/// Recover N<v,u_2><w,u_2> from the resolvent alone: Poisson-kernel
/// average of Im G_vw over the window lambda_2 +- N^delta eta_plus,
/// renormalized by the deterministic in-window kernel mass. Panel count
/// doubles until the integral is stable to 1e-10 relative.
pub fn smoothed_overlap(s: &SpectralData, v: &[f64], w: &[f64], sp: &SmoothingParams) -> Result<SmoothedOverlap> {
    let mut panels = SMOOTHING_MIN_PANELS;
    let mut out = smoothed_with_panels(s, v, w, sp, panels)?;
    if out.gap_too_small {
        return Ok(out);
    }
    loop {
        panels *= 2;
        let refined = smoothed_with_panels(s, v, w, sp, panels)?;
        let scale = 1.0 + refined.value.abs();
        if (refined.value - out.value).abs() <= 1e-10 * scale || panels >= 16384 {
            return Ok(refined);
        }
        out = refined;
    }
}

/// Fixed-panel variant exposed for convergence checks.
pub fn smoothed_overlap_fixed_panels(
    s: &SpectralData,
    v: &[f64],
    w: &[f64],
    sp: &SmoothingParams,
    panels: usize,
) -> Result<SmoothedOverlap> {
    if panels < SMOOTHING_MIN_PANELS {
        return Err(Error::invalid("panels", format!("need at least {SMOOTHING_MIN_PANELS} panels")));
    }
    smoothed_with_panels(s, v, w, sp, panels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SymmetricMatrix;
    use crate::stat_tests::{self, ReferenceDist};

    fn rotated_spectrum(evals: &[f64], seed: u64) -> SpectralData {
        // random orthogonal basis from a GOE eigendecomposition
        let n = evals.len();
        let basis = spectral::eigh(&ensemble::sample_goe(n, seed, 0)).unwrap();
        let mut vectors = Vec::with_capacity(n * n);
        for k in 0..n {
            vectors.extend_from_slice(basis.eigenvector(k));
        }
        SpectralData::from_parts(evals.to_vec(), vectors).unwrap()
    }

    #[test]
    fn target_cf_closed_form_points() {
        assert!((target_cf(0.0, 0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((target_cf(0.0, 1.0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((target_cf(1.0, 0.0).re - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(target_cf(1.0, 0.0).im.abs() < 1e-15);

        // vw = 1 reduces to the chi-square CF with |g| = (1 + 4t^2)^(-1/4)
        for k in 0..40 {
            let t = -5.0 + 0.25 * k as f64;
            let g = target_cf(t, 1.0);
            assert!((g.norm() - (1.0 + 4.0 * t * t).powf(-0.25)).abs() < 1e-12);
            // conjugate symmetry
            let gm = target_cf(-t, 1.0);
            assert!((g - gm.conj()).norm() < 1e-12);
        }

        // branch continuity along a fine grid
        let mut prev = target_cf(-5.0, 0.7);
        let mut t = -5.0;
        while t < 5.0 {
            t += 0.01;
            let g = target_cf(t, 0.7);
            assert!((g - prev).norm() < 0.05);
            prev = g;
        }
    }

    #[test]
    fn degenerate_spectrum_is_refused() {
        let n = 16;
        let f = 5.0;
        let a = SymmetricMatrix::from_fn(n, |_, _| f / n as f64);
        let s = spectral::eigh(&a).unwrap();
        let probes = ProbeSet::build(n, 0.3, 2, 7, &[], 7).unwrap();
        let err = overlap_values_from_spectral(&s, &probes, &[2], 0);
        assert!(err.is_err());
    }

    #[test]
    fn overlap_rows_validate_inputs() {
        let spec = EnsembleSpec::sparse_er(32, 0.3, 9);
        let (a, _) = ensemble::sample_shifted(&spec, 0).unwrap();
        let s = spectral::eigh(&a).unwrap();
        let probes = ProbeSet::build(32, 0.3, 2, 7, &[], 7).unwrap();
        assert!(overlap_values_from_spectral(&s, &probes, &[1], 0).is_err());
        assert!(overlap_values_from_spectral(&s, &probes, &[7], 0).is_err());
        let wrong = ProbeSet::build(16, 0.3, 2, 7, &[], 7).unwrap();
        assert!(overlap_values_from_spectral(&s, &wrong, &[2], 0).is_err());
    }

    #[test]
    fn overlap_sign_invariance_and_diagonal_positivity() {
        let spec = EnsembleSpec::sparse_er(64, 0.2, 11);
        let (a, _) = ensemble::sample_shifted(&spec, 0).unwrap();
        let s = spectral::eigh(&a).unwrap();
        let probes = ProbeSet::build(64, 0.3, 3, 13, &[], 13).unwrap();
        let rows = overlap_values_from_spectral(&s, &probes, &[2, 3], 4).unwrap();
        // 6 unordered pairs x 2 indices
        assert_eq!(rows.len(), 12);
        for r in &rows {
            if r.pair.0 == r.pair.1 {
                assert!(r.value >= 0.0);
                assert!((r.vw_inner - 1.0).abs() < 1e-9);
            }
        }

        // flip the sign of u_2 and recompute: identical statistics
        let mut vectors = Vec::with_capacity(64 * 64);
        for k in 0..64 {
            let u = s.eigenvector(k);
            if k == 1 {
                vectors.extend(u.iter().map(|x| -x));
            } else {
                vectors.extend_from_slice(u);
            }
        }
        let flipped = SpectralData::from_parts(s.eigenvalues().to_vec(), vectors).unwrap();
        let rows_flipped = overlap_values_from_spectral(&flipped, &probes, &[2, 3], 4).unwrap();
        for (a, b) in rows.iter().zip(&rows_flipped) {
            assert_eq!(a.value.to_bits(), b.value.to_bits());
        }
    }

    #[test]
    fn edge_overlap_statistics_small_scale() {
        let n = 400;
        let spec = EnsembleSpec::sparse_er(n, 0.05, 17);
        let probes = ProbeSet::build(n, 0.3, 2, 19, &[], 19).unwrap();
        let m = 300;
        let rows = edge_overlap_samples(&spec, &probes, &[2, 3], m).unwrap();

        let diag: Vec<f64> = rows.iter().filter(|r| r.pair == (0, 0) && r.a == 2).map(|r| r.value).collect();
        let off: Vec<f64> = rows.iter().filter(|r| r.pair == (0, 1) && r.a == 2).map(|r| r.value).collect();
        assert_eq!(diag.len(), m);

        let (mean_diag, se_diag) = stat_tests::mean_and_se(&diag);
        assert!((mean_diag - 1.0).abs() < 4.0 * se_diag, "v = w mean {mean_diag:.3} +- {se_diag:.3}");

        let inner = rows.iter().find(|r| r.pair == (0, 1)).unwrap().vw_inner;
        let (mean_off, se_off) = stat_tests::mean_and_se(&off);
        assert!((mean_off - inner).abs() < 4.0 * se_off, "v, w mean {mean_off:.3} +- {se_off:.3}");

        // chi-square marginal for v = w
        let ks = stat_tests::ks_one_sample(&diag, |x| stat_tests::reference_cdf(ReferenceDist::ChiSq1, x)).unwrap();
        assert!(ks < 0.12, "chi-square KS = {ks:.4}");

        // joint CF for the probe pair
        let grid = stat_tests::default_t_grid();
        let sup = ecf_sup_distance(&off, inner, &grid).unwrap();
        assert!(sup < 0.12, "ECF sup distance = {sup:.4}");

        // independence across eigenvector indices
        let diag3: Vec<f64> = rows.iter().filter(|r| r.pair == (0, 0) && r.a == 3).map(|r| r.value).collect();
        let corr = stat_tests::correlation(&diag, &diag3);
        assert!(corr.abs() < 3.0 / (m as f64).sqrt() * 1.5, "corr = {corr:.4}");
    }

    #[test]
    fn bulk_moments_small_scale() {
        let n = 300;
        let spec = EnsembleSpec::sparse_er(n, 0.1, 23);
        let probe = &ensemble::make_perp_frame(n, 1, 29, true).unwrap()[0];
        let table = bulk_moment_check(&spec, probe, &[140, 160], 150).unwrap();
        for row in &table.rows {
            assert!((row.mean - 1.0).abs() < 0.3, "mean at {} is {:.3}", row.i, row.mean);
            assert!((row.fourth - 3.0).abs() < 1.5, "fourth at {} is {:.3}", row.i, row.fourth);
        }
        assert_eq!(table.cross.len(), 1);
        let cross = &table.cross[0];
        assert!((cross.value - 1.0).abs() < 1.0, "cross moment {:.3}", cross.value);
    }

    #[test]
    fn bulk_window_validation() {
        let n = 300;
        let spec = EnsembleSpec::sparse_er(n, 0.1, 23);
        let probe = &ensemble::make_perp_frame(n, 1, 29, true).unwrap()[0];
        assert!(bulk_moment_check(&spec, probe, &[10], 10).is_err());
        assert!(bulk_moment_check(&spec, probe, &[295], 10).is_err());
        assert!(bulk_moment_check(&spec, probe, &[], 10).is_err());
        let scaled: Vec<f64> = probe.iter().map(|x| 2.0 * x).collect();
        assert!(bulk_moment_check(&spec, &scaled, &[150], 10).is_err());
    }

    #[test]
    fn top_alignment_exact_rank_one() {
        let n = 100;
        let f = 5.0;
        let a = SymmetricMatrix::from_fn(n, |_, _| f / n as f64);
        let s = spectral::eigh(&a).unwrap();
        let (dev1, dev2) = top_alignment_check(&s, f).unwrap();
        assert!(dev1.abs() < 1e-9, "dev_lambda1 = {dev1:.2e}");
        let expected = (f * f * f).min((n as f64).sqrt() * f) / (2.0 * f * f);
        assert!((dev2 - expected).abs() < 1e-9, "dev_align = {dev2} vs {expected}");

        assert!(top_alignment_check(&s, 2.0).is_err());
    }

    #[test]
    fn top_alignment_sparse_sample() {
        let spec = EnsembleSpec::sparse_er(500, 0.05, 31);
        let (a, _) = ensemble::sample_shifted(&spec, 0).unwrap();
        let s = spectral::eigh(&a).unwrap();
        let (dev1, dev2) = top_alignment_check(&s, spec.f()).unwrap();
        assert!(dev1.abs() <= 10.0, "dev_lambda1 = {dev1:.3}");
        assert!(dev2.abs() <= 10.0, "dev_align = {dev2:.3}");
    }

    #[test]
    fn smoothing_params_validation() {
        assert!(SmoothingParams::desk(500, 0.2, 0.05).is_ok());
        assert!(SmoothingParams::desk(500, 0.2, 0.2).is_err());
        assert!(SmoothingParams::desk(500, 0.0, 0.0).is_err());
        assert!(SmoothingParams::desk(500, 0.6, 0.05).is_err());
        assert!(SmoothingParams::desk(1, 0.2, 0.05).is_err());

        let sp = SmoothingParams::desk(500, 0.2, 0.05).unwrap();
        let nf = 500f64;
        assert!((sp.eta_plus - nf.powf(-2.0 / 3.0 - 0.2)).abs() < 1e-18);
        assert!((sp.eta_minus - nf.powf(-2.0 / 3.0 - 1.2)).abs() < 1e-20);
        assert!((sp.window_halfwidth() - nf.powf(0.05) * sp.eta_plus).abs() < 1e-18);
        assert!(sp.capture() > 0.5 && sp.capture() < 1.0);

        let asymptotic = SmoothingParams::asymptotic_scaled(500, 0.3).unwrap();
        assert!(asymptotic.delta < asymptotic.xi / 100.0);
        assert!(asymptotic.xi < 0.3 / 100.0);
    }

    /// Poisson-kernel mass of the eigenvalue at lambda over [a, b].
    fn kernel_mass(lambda: f64, eta: f64, a: f64, b: f64) -> f64 {
        (((b - lambda) / eta).atan() - ((a - lambda) / eta).atan()) / std::f64::consts::PI
    }

    fn closed_form_smoothed(s: &SpectralData, v: &[f64], w: &[f64], sp: &SmoothingParams) -> f64 {
        let lambda2 = s.eigenvalue(1);
        let half = sp.window_halfwidth();
        let (lo, hi) = (lambda2 - half, lambda2 + half);
        let ov_v = s.overlaps(v);
        let ov_w = s.overlaps(w);
        let total: f64 = (0..s.n())
            .map(|k| ov_v[k] * ov_w[k] * kernel_mass(s.eigenvalue(k), sp.eta_plus, lo, hi))
            .sum();
        s.n() as f64 * total / sp.capture()
    }

    #[test]
    fn smoothing_isolated_eigenvalue_is_exact() {
        let evals = vec![2.0, 0.0, -1.0];
        let mut vectors = vec![0.0; 9];
        vectors[0] = 1.0; // u_1 = e_1
        vectors[4] = 1.0; // u_2 = e_2
        vectors[8] = 1.0; // u_3 = e_3
        let s = SpectralData::from_parts(evals, vectors).unwrap();
        let sp = SmoothingParams::desk(3, 0.2, 0.05).unwrap();
        let v = vec![0.0, 1.0, 0.0];
        let out = smoothed_overlap(&s, &v, &v, &sp).unwrap();
        assert!(!out.gap_too_small);
        assert!((out.direct - 3.0).abs() < 1e-15);
        // v is exactly the second eigenvector: no leakage terms survive and
        // the capture renormalization makes the identity exact
        assert!((out.value - 3.0).abs() < 1e-6, "smoothed = {}", out.value);
    }

    #[test]
    fn smoothing_matches_closed_form_on_rotated_spectra() {
        let s = rotated_spectrum(&[3.0, 1.0, 0.2, -2.0], 37);
        let sp = SmoothingParams::desk(4, 0.2, 0.05).unwrap();
        let frame = ensemble::make_perp_frame(4, 2, 41, true).unwrap();
        let out = smoothed_overlap(&s, &frame[0], &frame[1], &sp).unwrap();
        assert!(!out.gap_too_small);
        let expected = closed_form_smoothed(&s, &frame[0], &frame[1], &sp);
        assert!((out.value - expected).abs() < 1e-8, "quadrature {} vs closed form {expected}", out.value);
        let rel_err = (out.value - out.direct).abs() / (1.0 + out.direct.abs());
        assert!(rel_err < 0.25, "identity error {rel_err:.3}");
    }

    #[test]
    fn smoothing_leakage_for_orthogonal_probe() {
        // widely separated spectrum: gap >= 10 window half-widths
        let s = rotated_spectrum(&[10.0, 1.0, -5.0, -12.0], 43);
        let sp = SmoothingParams::desk(4, 0.2, 0.05).unwrap();
        assert!(s.eigenvalue(1) - s.eigenvalue(2) >= 10.0 * sp.window_halfwidth());

        // v orthogonal to u_2, w with weight on both u_1 and u_2 so the
        // leakage term through u_1 is nonzero
        let u1 = s.eigenvector(0);
        let u2 = s.eigenvector(1);
        let u3 = s.eigenvector(2);
        let inv = 0.5f64.sqrt();
        let v: Vec<f64> = u1.iter().zip(u3).map(|(a, b)| inv * (a + b)).collect();
        let w: Vec<f64> = u1.iter().zip(u2).map(|(a, b)| inv * (a + b)).collect();
        let out = smoothed_overlap(&s, &v, &w, &sp).unwrap();
        assert!(out.direct.abs() < 1e-9);
        let expected = closed_form_smoothed(&s, &v, &w, &sp);
        assert!((out.value - expected).abs() < 1e-8);
        assert!(out.value.abs() <= 0.1, "leakage {:.2e}", out.value);
    }

    #[test]
    fn smoothing_gap_flag() {
        let evals = vec![3.0, 1.0, 0.99, -2.0];
        let n = evals.len();
        let mut vectors = vec![0.0; n * n];
        for k in 0..n {
            vectors[k * n + k] = 1.0;
        }
        let s = SpectralData::from_parts(evals, vectors).unwrap();
        let sp = SmoothingParams::desk(4, 0.2, 0.05).unwrap();
        assert!(sp.min_gap() > 0.01);
        let v = vec![0.0, 1.0, 0.0, 0.0];
        let out = smoothed_overlap(&s, &v, &v, &sp).unwrap();
        assert!(out.gap_too_small);
        assert!(out.value.is_nan());
        assert!((out.gap - 0.01).abs() < 1e-12);
    }

    #[test]
    fn smoothing_panel_doubling_is_stable() {
        let s = rotated_spectrum(&[3.0, 1.0, 0.2, -2.0], 47);
        let sp = SmoothingParams::desk(4, 0.2, 0.05).unwrap();
        let frame = ensemble::make_perp_frame(4, 2, 41, true).unwrap();
        let coarse = smoothed_overlap_fixed_panels(&s, &frame[0], &frame[1], &sp, 256).unwrap();
        let fine = smoothed_overlap_fixed_panels(&s, &frame[0], &frame[1], &sp, 512).unwrap();
        let rel = (coarse.value - fine.value).abs() / (1.0 + fine.value.abs());
        assert!(rel < 1e-6, "refinement moved the integral by {rel:.2e}");
        assert!(smoothed_overlap_fixed_panels(&s, &frame[0], &frame[1], &sp, 64).is_err());
    }

    #[test]
    fn smoothing_rejects_mismatched_inputs() {
        let s = rotated_spectrum(&[3.0, 1.0, 0.2, -2.0], 49);
        let sp3 = SmoothingParams::desk(3, 0.2, 0.05).unwrap();
        let v = vec![0.5; 4];
        assert!(smoothed_overlap(&s, &v, &v, &sp3).is_err());
        let sp = SmoothingParams::desk(4, 0.2, 0.05).unwrap();
        let not_unit = vec![0.5, 0.5, 0.5, 0.6];
        assert!(smoothed_overlap(&s, &not_unit, &not_unit, &sp).is_err());
    }

}
