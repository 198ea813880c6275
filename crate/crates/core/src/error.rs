use thiserror::Error;

use crate::reconstruct::ReconstructionResult;
use crate::reduction::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the spectral toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("energy {s} lies within {tol:e} of an eigenvalue; widen the bracket")]
    AmbiguousCount { s: f64, tol: f64 },

    #[error("eigenvalue search failed for index {index}: {reason}")]
    SpectrumSearch { index: usize, reason: String },

    #[error("quadrature did not converge for eigenvalue {index} (relative change {change:e})")]
    Quadrature { index: usize, change: f64 },

    #[error("energy {s} is within {distance:e} of eigenvalue {eigenvalue}")]
    NearPole {
        s: f64,
        eigenvalue: f64,
        distance: f64,
    },

    #[error("zero {index} is repeated; only simple spectra are supported")]
    MultipleZero { index: usize },

    #[error("unsupported boundary configuration: {0}")]
    UnsupportedBoundary(String),

    #[error("no finite limit for the squared-eigenvalue gap (tail slope {slope:e}); regime mismatch?")]
    NoFiniteGap { slope: f64 },

    #[error("spectral pair rejected: {}", .0.reasons.join("; "))]
    Rejected(Box<ValidationReport>),

    #[error("norming constant {index} is not positive ({value}); data is not realizable")]
    PositivityViolation { index: usize, value: f64 },

    #[error("norming constants fail the asymptotic test: {0}")]
    AsymptoticsViolation(String),

    #[error("optimizer stagnated after {iterations} iterations (misfit {misfit:e})")]
    Stagnation {
        iterations: usize,
        misfit: f64,
        best: Box<ReconstructionResult>,
    },

    #[error("frequency system is not Riesz-like (Gram condition number {cond:e})")]
    NotRieszLike { cond: f64 },
}
