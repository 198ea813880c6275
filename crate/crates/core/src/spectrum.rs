//! Eigenvalue sequences and spectral data.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::boundary::{BoundaryData, BoundaryValue};
use crate::error::{Error, Result};

/// Asymptotic class of √s_n, named after the zero-potential characteristic function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AsymptoticClass {
    /// λ_n ≈ π(n − 1/2): Dirichlet at 0, third-type at 1.
    HalfIntegerCos,
    /// μ_n ≈ πn: Dirichlet at both ends.
    IntegerSin,
    /// λ_n ≈ π(n − 1): third-type at both ends.
    IntegerCos,
    /// μ_n ≈ π(n − 1/2): third-type at 0, Dirichlet at 1.
    HalfIntegerSin,
}

impl AsymptoticClass {
    pub fn for_boundary(bc: BoundaryData) -> Self {
        match (bc.left, bc.right) {
            (BoundaryValue::Infinite, BoundaryValue::Finite(_)) => Self::HalfIntegerCos,
            (BoundaryValue::Infinite, BoundaryValue::Infinite) => Self::IntegerSin,
            (BoundaryValue::Finite(_), BoundaryValue::Finite(_)) => Self::IntegerCos,
            (BoundaryValue::Finite(_), BoundaryValue::Infinite) => Self::HalfIntegerSin,
        }
    }

    /// Asymptotic center of √s_n, 1-based.
    pub fn head(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            Self::HalfIntegerCos | Self::HalfIntegerSin => PI * (n - 0.5),
            Self::IntegerSin => PI * n,
            Self::IntegerCos => PI * (n - 1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::HalfIntegerCos => "HalfIntegerCos",
            Self::IntegerSin => "IntegerSin",
            Self::IntegerCos => "IntegerCos",
            Self::HalfIntegerSin => "HalfIntegerSin",
        }
    }
}

/// Strictly increasing positive energies s_n = λ_n².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectrum", into = "RawSpectrum")]
pub struct Spectrum {
    regime: AsymptoticClass,
    eigenvalues: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSpectrum {
    regime: AsymptoticClass,
    eigenvalues: Vec<f64>,
}

impl TryFrom<RawSpectrum> for Spectrum {
    type Error = Error;

    fn try_from(raw: RawSpectrum) -> Result<Self> {
        Spectrum::new(raw.eigenvalues, raw.regime)
    }
}

impl From<Spectrum> for RawSpectrum {
    fn from(s: Spectrum) -> Self {
        RawSpectrum {
            regime: s.regime,
            eigenvalues: s.eigenvalues,
        }
    }
}

impl Spectrum {
    pub fn new(eigenvalues: Vec<f64>, regime: AsymptoticClass) -> Result<Self> {
        if let Some(i) = eigenvalues.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidSpectrum(format!("eigenvalue {} is not finite", i + 1)));
        }
        if let Some(i) = eigenvalues.iter().position(|&s| s <= 0.0) {
            return Err(Error::InvalidSpectrum(format!(
                "eigenvalue {} = {} is not positive; shift the potential by a constant",
                i + 1,
                eigenvalues[i]
            )));
        }
        if let Some(i) = eigenvalues.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidSpectrum(format!(
                "eigenvalues not strictly increasing at index {}",
                i + 2
            )));
        }
        Ok(Self { regime, eigenvalues })
    }

    /// Energies from square roots λ_n.
    pub fn from_roots(roots: &[f64], regime: AsymptoticClass) -> Result<Self> {
        Self::new(roots.iter().map(|l| l * l).collect(), regime)
    }

    pub fn regime(&self) -> AsymptoticClass {
        self.regime
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// λ_n = √s_n.
    pub fn roots(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|s| s.sqrt()).collect()
    }

    /// λ_n − head(n).
    pub fn residuals(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(i, s)| s.sqrt() - self.regime.head(i + 1))
            .collect()
    }

    pub fn truncated(&self, count: usize) -> Self {
        Self {
            regime: self.regime,
            eigenvalues: self.eigenvalues[..count.min(self.len())].to_vec(),
        }
    }
}

/// Eigenvalues with their norming constants α_n = 2∫|u(x, λ_n)|² dx (u(1) = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub spectrum: Spectrum,
    pub norming_constants: Vec<f64>,
    /// Boundary parameter H at x = 0; the parameter at x = 1 is the unknown.
    pub left: BoundaryValue,
}

impl SpectralData {
    pub fn new(spectrum: Spectrum, norming_constants: Vec<f64>, left: BoundaryValue) -> Result<Self> {
        if spectrum.len() != norming_constants.len() {
            return Err(Error::MalformedInput(format!(
                "{} eigenvalues but {} norming constants",
                spectrum.len(),
                norming_constants.len()
            )));
        }
        if let Some(i) = norming_constants.iter().position(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::PositivityViolation {
                index: i + 1,
                value: norming_constants[i],
            });
        }
        Ok(Self {
            spectrum,
            norming_constants,
            left,
        })
    }

    pub fn len(&self) -> usize {
        self.spectrum.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectrum.is_empty()
    }

    pub fn truncated(&self, count: usize) -> Self {
        let spectrum = self.spectrum.truncated(count);
        let k = spectrum.len();
        Self {
            spectrum,
            norming_constants: self.norming_constants[..k].to_vec(),
            left: self.left,
        }
    }
}
