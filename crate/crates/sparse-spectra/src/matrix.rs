//! Dense symmetric matrices stored row-major with exact (bitwise) symmetry.
//!
//! Symmetry is structural: constructors evaluate each unordered index pair
//! once and write both mirror entries from the same value, so `get(i, j)`
//! and `get(j, i)` are always bit-identical. Downstream eigensolver and
//! resolvent code relies on this; it is checked, not re-established, there.

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    /// Row-major, length n*n.
    entries: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix { n, entries: vec![0.0; n * n] }
    }

    /// Build from a generator evaluated once per pair (i, j) with i <= j.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SymmetricMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.entries[i * n + j] = v;
                m.entries[j * n + i] = v;
            }
        }
        m
    }

    /// Wrap a full row-major buffer, verifying exact symmetry.
    pub fn from_rows(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::invalid("entries", format!("expected {} values, got {}", n * n, entries.len())));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let a = entries[i * n + j];
                let b = entries[j * n + i];
                if a.to_bits() != b.to_bits() {
                    return Err(Error::invalid("entries", format!("asymmetric at ({i},{j}): {a} vs {b}")));
                }
            }
        }
        Ok(SymmetricMatrix { n, entries })
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        SymmetricMatrix::from_fn(n, |i, j| if i == j { values[i] } else { 0.0 })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Set both (i, j) and (j, i).
    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.n + j] = v;
        self.entries[j * self.n + i] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Bitwise symmetry scan; true for anything built by this module.
    pub fn is_exactly_symmetric(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| {
            (i + 1..n).all(|j| self.entries[i * n + j].to_bits() == self.entries[j * n + i].to_bits())
        })
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// tr(M^2) = sum of squared entries, exact for symmetric M.
    pub fn trace_sq(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.entries {
            *v *= c;
        }
    }

    /// Subtract (tr M / n) from the diagonal, making the result traceless.
    pub fn make_traceless(&mut self) {
        let shift = self.trace() / self.n as f64;
        for i in 0..self.n {
            let v = self.get(i, i) - shift;
            self.set_sym(i, i, v);
        }
    }

    /// y = M x.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(y.len(), n);
        for i in 0..n {
            let row = &self.entries[i * n..(i + 1) * n];
            y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// v^T M w.
    pub fn quad_form(&self, v: &[f64], w: &[f64]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            let row = &self.entries[i * n..(i + 1) * n];
            let mw: f64 = row.iter().zip(w).map(|(a, b)| a * b).sum();
            acc += v[i] * mw;
        }
        acc
    }

    pub fn to_faer(&self) -> faer::Mat<f64> {
        faer::Mat::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}
