//! Spectral toolkit for Sturm–Liouville operators −(u′ − σu)′ − σ(u′ − σu) = s u
//! on [0, 1] with distributional potential q = σ′, σ piecewise constant.
//!
//! The forward side computes eigenvalues, norming constants and
//! characteristic values by exact per-cell propagation. The inverse side
//! validates a pair of spectra, turns it into eigenvalues with norming
//! constants through canonical products, and fits σ to those data.

pub mod boundary;
pub mod error;
pub mod forward;
pub mod io;
pub mod ode;
pub mod potential;
pub mod products;
pub mod prufer;
pub mod quadrature;
pub mod reconstruct;
pub mod reduction;
pub mod riesz;
pub mod spectrum;

pub use boundary::{gauge_transform, BoundaryData, BoundaryValue};
pub use error::{Error, Result};
pub use forward::{
    char_value, compute_spectrum, norming_constants, resolvent_trace_ratio, CharacteristicSample, TailModel,
};
pub use ode::{cell_transfer, propagate, Direction, Propagation, StateVector, TransferMatrix};
pub use potential::{project_sigma, PiecewiseSigma, SigmaSource};
pub use products::{product_derivative_at_zero, product_eval, ZeroSequence};
pub use prufer::{count_below, prufer_theta};
pub use reduction::{estimate_h_gap, norming_from_two_spectra, validate_pair, RegimePair, ValidationReport, Verdict};
pub use reconstruct::{reconstruct_sigma, roundtrip_report, ReconstructionResult, RoundtripReport};
pub use riesz::{expand_in_basis, fourier_diff, gram_matrix, FrequencySystem, Profile};
pub use spectrum::{AsymptoticClass, SpectralData, Spectrum};
