//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {dim} exceeds configured limit {limit}")]
    Dimension { dim: usize, limit: usize },
    #[error("infinite product does not converge: |t| = {abs_t} >= 1")]
    NonConvergent { abs_t: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("coordinate count {count} is smaller than the partition length {len}")]
    CountTooSmall { count: usize, len: usize },
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("zero vector")]
    ZeroVector,
    #[error("sector overflow: m = {m} plus p = {p} exceeds N = {n}")]
    SectorOverflow { m: usize, p: usize, n: usize },
    #[error("coordinate lists overlap")]
    Overlap,
    #[error("not a highest-weight vector: |E v| / |v| = {ratio:e}")]
    NotHighestWeight { ratio: f64 },
    #[error("window too small for {m} magnons")]
    WindowTooSmall { m: usize },
    #[error("singular rapidity: |denominator| = {0:e}")]
    SingularRapidity(f64),
    #[error("pole in regularized tail: |1 - suffix product| = {0:e}")]
    Pole(f64),
    #[error("eigensolver failed to converge after {0} sweeps")]
    ConvergenceFailure(usize),
    #[error("operator is not hermitian and no diagonal symmetrization exists")]
    NotSymmetrizable,
}

pub type Result<T> = std::result::Result<T, Error>;
