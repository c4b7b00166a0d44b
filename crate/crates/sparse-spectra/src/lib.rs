//! Spectral statistics for sparse random symmetric matrices.
//!
//! The crate samples sparse Wigner-type ensembles with an optional rank-one
//! mean shift, eigendecomposes them, and measures eigenvalue and eigenvector
//! observables against their limiting laws: semicircle density, resolvent
//! concentration on mesoscopic scales, edge fluctuations and universality,
//! overlap distributions for edge and bulk eigenvectors, and fluctuations of
//! observable matrix elements. A small statistics toolkit (KS distances,
//! empirical characteristic functions, reference CDFs) turns measurements
//! into pass/fail results, and a runner orchestrates deterministic parallel
//! Monte Carlo over sample indices.
//!
//! Determinism contract: every sampled object is a pure function of
//! `(master_seed, purpose, sample_index)`. Worker count and scheduling never
//! change results; reductions merge in sample-index order.

pub mod matrix;
pub mod rng;
pub mod spectral;
pub mod ensemble;
pub mod local_laws;
pub mod edge_stats;
pub mod evec_stats;
pub mod eth;
pub mod io;
pub mod runner;

pub use ensemble::{EnsembleKind, EnsembleSpec, ObservableKind, ProbeSet};
pub use matrix::SymmetricMatrix;
pub use runner::{ExperimentConfig, Suite, SuiteReport};
pub use spectral::SpectralData;
pub use stat_tests::TestResult;

/// Crate-wide error type. Numerical routines validate their preconditions
/// and name the offending field so config errors surface with context.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    InvalidInput { field: &'static str, reason: String },
    #[error("eigensolver failed: {detail}")]
    Eigensolver { detail: String },
    #[error("bad file format in {path}: {reason}")]
    Format { path: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput { field, reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
