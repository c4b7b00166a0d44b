//! Deterministic spectral analytics: semicircle formulas, classical
//! eigenvalue locations, dense eigendecomposition, resolvent quadratic
//! forms, and the exact identities used as numerical self-checks.

use num_complex::Complex64;

use crate::matrix::SymmetricMatrix;
use crate::{Error, Result};

/// Stieltjes transform of the semicircle density: the root of
/// m^2 + z m + 1 = 0 with Im m > 0.
///
/// Both square-root signs are tried and the Herglotz root kept, which is
/// robust near the branch cut without quadrant case analysis.
pub fn m_sc(z: Complex64) -> Result<Complex64> {
    if z.im <= 0.0 {
        return Err(Error::invalid("z", format!("Im z must be positive, got {}", z.im)));
    }
    let s = (z * z - 4.0).sqrt();
    let m1 = (-z + s) / 2.0;
    let m2 = (-z - s) / 2.0;
    // roots multiply to 1, so exactly one lies in the upper half plane
    Ok(if m1.im > 0.0 { m1 } else { m2 })
}

/// Semicircle density and CDF at x. Density is (1/2pi) sqrt(4 - x^2) on
/// [-2, 2]; the CDF uses the closed form and clamps to [0, 1].
pub fn semicircle(x: f64) -> (f64, f64) {
    if x <= -2.0 {
        return (0.0, 0.0);
    }
    if x >= 2.0 {
        return (0.0, 1.0);
    }
    let root = (4.0 - x * x).sqrt();
    let density = root / (2.0 * std::f64::consts::PI);
    let cdf = 0.5
        + x * root / (4.0 * std::f64::consts::PI)
        + (x / 2.0).asin() / std::f64::consts::PI;
    (density * if x.abs() < 2.0 { 1.0 } else { 0.0 }, cdf.clamp(0.0, 1.0))
}

pub fn semicircle_cdf(x: f64) -> f64 {
    semicircle(x).1
}

/// Classical location of the k-th largest eigenvalue under the semicircle
/// law: the unique gamma in [-2, 2] with 1 - cdf(gamma) = (k - 1/2)/N.
pub fn gamma_sc(k: usize, n: usize) -> Result<f64> {
    if k < 1 || k > n {
        return Err(Error::invalid("k", format!("need 1 <= k <= {n}, got {k}")));
    }
    let target = 1.0 - (k as f64 - 0.5) / n as f64;
    Ok(invert_cdf(target, 1.0))
}

/// Classical location with offset k/N for a measure approximated by the
/// semicircle rescaled to support [-edge, edge].
pub fn gamma_measure(k: usize, n: usize, edge: f64) -> Result<f64> {
    if k < 1 || k > n {
        return Err(Error::invalid("k", format!("need 1 <= k <= {n}, got {k}")));
    }
    if !(edge > 0.0) {
        return Err(Error::invalid("edge", format!("need edge > 0, got {edge}")));
    }
    let target = 1.0 - k as f64 / n as f64;
    Ok(invert_cdf(target, edge / 2.0))
}

/// Bisection for cdf(gamma/scale) = target on gamma in [-2, 2]*scale.
/// 60 halvings shrink the bracket to ~4e-18, far below every tolerance
/// used downstream; an exact hit returns early (so symmetric targets give
/// exactly 0).
fn invert_cdf(target: f64, scale: f64) -> f64 {
    let (mut lo, mut hi) = (-2.0 * scale, 2.0 * scale);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let c = semicircle_cdf(mid / scale);
        if c == target {
            return mid;
        }
        if c < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Full eigendecomposition of a real symmetric matrix, eigenvalues sorted
/// descending. Each eigenvector is stored contiguously.
#[derive(Clone, Debug)]
pub struct SpectralData {
    n: usize,
    /// lambda_1 >= lambda_2 >= ... >= lambda_n
    eigenvalues: Vec<f64>,
    /// eigenvector k occupies vectors[k*n..(k+1)*n]
    vectors: Vec<f64>,
}

impl SpectralData {
    /// Assemble from a descending eigenvalue list and a flat eigenvector
    /// array (vector k in vectors[k*n..(k+1)*n]).
    pub fn from_parts(eigenvalues: Vec<f64>, vectors: Vec<f64>) -> Result<Self> {
        let n = eigenvalues.len();
        if n == 0 {
            return Err(Error::invalid("eigenvalues", "empty spectrum"));
        }
        if vectors.len() != n * n {
            return Err(Error::invalid("vectors", format!("expected {} entries, got {}", n * n, vectors.len())));
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid("eigenvalues", "must be non-increasing"));
        }
        Ok(SpectralData { n, eigenvalues, vectors })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k]
    }

    /// k-th eigenvector, k = 0 is the top of the spectrum.
    pub fn eigenvector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.n..(k + 1) * self.n]
    }

    /// All overlaps <u_k, v>.
    pub fn overlaps(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|k| dot(self.eigenvector(k), v))
            .collect()
    }

    /// Residual and orthonormality checks against the source matrix:
    /// ||A u_k - lambda_k u_k|| <= 1e-9 ||A||_op and max-abs Gram deviation
    /// from the identity < 1e-9.
    pub fn verify(&self, source: &SymmetricMatrix) -> Result<()> {
        let n = self.n;
        if source.n() != n {
            return Err(Error::invalid("source", "dimension mismatch"));
        }
        let op_norm = self.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let tol = 1e-9 * op_norm.max(f64::MIN_POSITIVE);
        let mut au = vec![0.0; n];
        for k in 0..n {
            let u = self.eigenvector(k);
            source.apply(u, &mut au);
            let lam = self.eigenvalues[k];
            let res: f64 = au
                .iter()
                .zip(u)
                .map(|(a, b)| (a - lam * b) * (a - lam * b))
                .sum::<f64>()
                .sqrt();
            if res > tol {
                return Err(Error::Eigensolver {
                    detail: format!("residual {res:.3e} for eigenpair {k} exceeds {tol:.3e}"),
                });
            }
        }
        for k in 0..n {
            for l in k..n {
                let g = dot(self.eigenvector(k), self.eigenvector(l));
                let dev = if k == l { (g - 1.0).abs() } else { g.abs() };
                if dev >= 1e-9 {
                    return Err(Error::Eigensolver {
                        detail: format!("Gram deviation {dev:.3e} at ({k},{l})"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Eigendecompose via faer's self-adjoint solver (single-threaded; the
/// Monte Carlo layer parallelizes over samples instead).
pub fn eigh(m: &SymmetricMatrix) -> Result<SpectralData> {
    let n = m.n();
    let evd = m
        .to_faer()
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Eigensolver { detail: format!("{e:?}") })?;
    let s = evd.S();
    let u = evd.U();
    let mut eigenvalues = vec![0.0; n];
    let mut vectors = vec![0.0; n * n];
    for k in 0..n {
        let src = n - 1 - k;
        eigenvalues[k] = s[src];
        let dst = &mut vectors[k * n..(k + 1) * n];
        for i in 0..n {
            dst[i] = u[(i, src)];
        }
    }
    Ok(SpectralData { n, eigenvalues, vectors })
}

/// Eigenvalues only (descending); roughly twice as fast as `eigh`.
pub fn eigenvalues_desc(m: &SymmetricMatrix) -> Result<Vec<f64>> {
    let mut vals = m
        .to_faer()
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::Eigensolver { detail: format!("{e:?}") })?;
    vals.reverse();
    Ok(vals)
}

/// <x, G(z) y> = sum_k <x,u_k><u_k,y> / (lambda_k - z).
pub fn resolvent_qform(s: &SpectralData, z: Complex64, x: &[f64], y: &[f64]) -> Result<Complex64> {
    if z.im == 0.0 {
        return Err(Error::invalid("z", "resolvent needs Im z != 0"));
    }
    for (name, v) in [("x", x), ("y", y)] {
        let norm = dot(v, v).sqrt();
        if norm > 1.0 + 1e-9 {
            return Err(Error::invalid("x", format!("|{name}| = {norm} exceeds 1")));
        }
    }
    let ax = s.overlaps(x);
    let ay = s.overlaps(y);
    Ok(qform_from_overlaps(&s.eigenvalues, &ax, &ay, z))
}

/// Fast path when the overlaps <u_k, x>, <u_k, y> are precomputed
/// (grid scans reuse them across many z).
pub fn qform_from_overlaps(eigenvalues: &[f64], ax: &[f64], ay: &[f64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for ((&lam, &a), &b) in eigenvalues.iter().zip(ax).zip(ay) {
        acc += (a * b) / (Complex64::new(lam, 0.0) - z);
    }
    acc
}

/// Relative Ward residual |sum_j |G_ij|^2 - Im G_ii / eta| / (Im G_ii / eta).
/// The identity is exact for resolvents, so both sides are evaluated by
/// independent summation routes and the residual measures round-off only.
pub fn ward_residual(s: &SpectralData, z: Complex64, i: usize) -> Result<f64> {
    if z.im <= 0.0 {
        return Err(Error::invalid("z", "Ward residual needs Im z > 0"));
    }
    let n = s.n;
    if i >= n {
        return Err(Error::invalid("i", format!("row {i} out of range for n = {n}")));
    }
    // row i of G: G_ij = sum_k u_k[i] c_k u_k[j]
    let mut row = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let u = s.eigenvector(k);
        let c = u[i] / (Complex64::new(s.eigenvalues[k], 0.0) - z);
        for (r, &uj) in row.iter_mut().zip(u) {
            *r += c * uj;
        }
    }
    let lhs: f64 = row.iter().map(|g| g.norm_sqr()).sum();
    let rhs = row[i].im / z.im;
    Ok((lhs - rhs).abs() / rhs)
}

/// One point of the spectral domain D = {E + i eta : |E| <= 3,
/// N^(tau-1) <= eta <= 1}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralDomainPoint {
    pub e: f64,
    pub eta: f64,
}

impl SpectralDomainPoint {
    #[inline]
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.e, self.eta)
    }

    pub fn in_domain(&self, n: usize, tau: f64) -> bool {
        let eta_min = (n as f64).powf(tau - 1.0);
        self.e.abs() <= 3.0 + 1e-12 && self.eta >= eta_min * (1.0 - 1e-12) && self.eta <= 1.0 + 1e-12
    }
}

/// nE linearly spaced energies in [-3, 3] crossed with nEta log-spaced
/// scales in [N^(tau-1), 1]; eta varies fastest.
pub fn domain_grid(n: usize, tau: f64, n_e: usize, n_eta: usize) -> Result<Vec<SpectralDomainPoint>> {
    if n_e < 2 || n_eta < 2 {
        return Err(Error::invalid("grid", format!("need nE, nEta >= 2, got {n_e}x{n_eta}")));
    }
    let eta_min = (n as f64).powf(tau - 1.0);
    let log_min = eta_min.ln();
    let mut points = Vec::with_capacity(n_e * n_eta);
    for i in 0..n_e {
        let e = -3.0 + 6.0 * i as f64 / (n_e - 1) as f64;
        for j in 0..n_eta {
            let eta = if j == 0 {
                eta_min
            } else if j == n_eta - 1 {
                1.0
            } else {
                (log_min * (1.0 - j as f64 / (n_eta - 1) as f64)).exp()
            };
            points.push(SpectralDomainPoint { e, eta });
        }
    }
    Ok(points)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
