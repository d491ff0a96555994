use thiserror::Error;

use crate::sparse::SvdTriple;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },

    #[error("power iteration did not converge; best operator-norm estimate {best}")]
    NormNonConvergence { best: f64 },

    #[error("subspace iteration did not converge; partial factorization attached")]
    SvdNonConvergence { partial: Box<SvdTriple> },

    #[error("no spectral gap: singular values are flat, supply the rank explicitly")]
    NoSpectralGap,

    #[error("points are at or beyond the cut locus (principal angle {angle} rad)")]
    CutLocus { angle: f64 },

    #[error("regularizer overflow in row {row}: z = {z}; rescale the factor rows")]
    RegularizerOverflow { row: usize, z: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
