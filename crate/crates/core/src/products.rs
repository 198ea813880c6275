//! Characteristic functions synthesized from their zeros.
//!
//! All products are built in the energy variable z = λ². With heads a_k of
//! the asymptotic class and a tail shift d ≈ lim (z_k − a_k²), the function
//! with zeros z_1, …, z_K is
//!
//! ```text
//!   Φ(z) = ref(z − d) · Π_{k ≤ K} (z_k − z) / (a_k² + d − z)
//! ```
//!
//! where ref(w) is the zero-potential function whose zeros are exactly a_k²:
//! cos √w for the half-integer classes, sin √w / √w for `IntegerSin` and
//! w · sin √w / √w for `IntegerCos`. Each factor tends to 1 and the
//! zeros beyond K are replaced by the shifted heads, which keeps the
//! normalization Φ(−ν²) / ref(−ν²) → 1.

use crate::error::{Error, Result};
use crate::ode::trig_pair;
use crate::spectrum::{AsymptoticClass, Spectrum};

/// Fewer zeros than this make derivative values unreliable.
pub const MIN_DERIVATIVE_ZEROS: usize = 50;

/// Window around a reference pole inside which the cancelling form is used.
const POLE_WINDOW: f64 = 0.5;

/// Positive simple zeros λ_k with the tail shift used to complete the product.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSequence {
    zeros: Vec<f64>,
    squares: Vec<f64>,
    regime: AsymptoticClass,
    shift: f64,
}

impl ZeroSequence {
    /// Zeros λ_k with the tail shift estimated from the data.
    pub fn new(zeros: Vec<f64>, regime: AsymptoticClass) -> Result<Self> {
        if zeros.is_empty() {
            return Err(Error::MalformedInput("zero sequence is empty".into()));
        }
        if let Some(i) = zeros.iter().position(|z| !(z.is_finite() && *z > 0.0)) {
            return Err(Error::InvalidSpectrum(format!("zero {} = {} is not positive", i + 1, zeros[i])));
        }
        for (i, w) in zeros.windows(2).enumerate() {
            if w[0] == w[1] {
                return Err(Error::MultipleZero { index: i + 2 });
            }
            if w[0] > w[1] {
                return Err(Error::InvalidSpectrum(format!("zeros decrease at index {}", i + 2)));
            }
        }
        let squares: Vec<f64> = zeros.iter().map(|l| l * l).collect();
        let shift = estimate_shift(&squares, regime);
        Ok(Self {
            zeros,
            squares,
            regime,
            shift,
        })
    }

    pub fn from_spectrum(spectrum: &Spectrum) -> Result<Self> {
        Self::new(spectrum.roots(), spectrum.regime())
    }

    /// Replaces the estimated tail shift d.
    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    pub fn regime(&self) -> AsymptoticClass {
        self.regime
    }

    pub fn tail_count(&self) -> usize {
        self.zeros.len()
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Warning text when there are too few zeros for derivative evaluation.
    pub fn derivative_warning(&self) -> Option<String> {
        (self.tail_count() < MIN_DERIVATIVE_ZEROS).then(|| {
            format!(
                "only {} zeros supplied; derivatives need at least {MIN_DERIVATIVE_ZEROS}",
                self.tail_count()
            )
        })
    }

    fn head_sq(&self, k: usize) -> f64 {
        let a = self.regime.head(k);
        a * a
    }
}

/// Weighted mean of z_k − a_k² over the last third, weights k².
fn estimate_shift(squares: &[f64], regime: AsymptoticClass) -> f64 {
    let n = squares.len();
    let start = n - n.div_ceil(3);
    let (mut num, mut den) = (0.0, 0.0);
    for (i, z) in squares.iter().enumerate().skip(start) {
        let k = i + 1;
        let w = (k * k) as f64;
        let a = regime.head(k);
        num += w * (z - a * a);
        den += w;
    }
    num / den
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Reference {
    /// cos √w, zeros (π(m − 1/2))².
    Cos,
    /// sin √w / √w, zeros (πm)².
    Sinc,
}

impl Reference {
    fn eval(self, w: f64) -> f64 {
        let (c, s) = trig_pair(w, 1.0);
        match self {
            Reference::Cos => c,
            Reference::Sinc => s,
        }
    }

    /// Index m ≥ 1 of the reference zero nearest to √w, when within the window.
    fn nearby_pole(self, w: f64) -> Option<(usize, f64)> {
        if w <= 0.0 {
            return None;
        }
        let l = w.sqrt();
        let (m, alpha) = match self {
            Reference::Cos => {
                let m = (l / std::f64::consts::PI).floor() as usize + 1;
                (m, std::f64::consts::PI * (m as f64 - 0.5))
            }
            Reference::Sinc => {
                let m = (l / std::f64::consts::PI).round() as usize;
                (m, std::f64::consts::PI * m as f64)
            }
        };
        (m >= 1 && (l - alpha).abs() < POLE_WINDOW).then_some((m, alpha))
    }

    /// ref(w) / (α² − w) with the common zero cancelled; α is a zero of ref.
    fn cancelled(self, w: f64, alpha: f64) -> f64 {
        let l = w.sqrt();
        let x = alpha - l;
        let sinc_half = if x.abs() < 1e-4 {
            1.0 - x * x / 24.0
        } else {
            2.0 * (x / 2.0).sin() / x
        };
        match self {
            Reference::Cos => ((l + alpha) / 2.0).sin() / (alpha + l) * sinc_half,
            Reference::Sinc => -((l + alpha) / 2.0).cos() / (l * (alpha + l)) * sinc_half,
        }
    }
}

/// Product of terms in a fixed pairwise order.
fn pairwise_product(values: &[f64]) -> f64 {
    match values.len() {
        0 => 1.0,
        1 => values[0],
        n => pairwise_product(&values[..n / 2]) * pairwise_product(&values[n / 2..]),
    }
}

/// Shifted-reference product over zero indices `first..=K`, matched with
/// reference indices starting from 1. With `exclude = Some(e)` the factor
/// (z_e − z) is left out, giving Φ(z) / (z_e − z).
fn core(zs: &ZeroSequence, reference: Reference, first: usize, z: f64, exclude: Option<usize>) -> f64 {
    let d = zs.shift;
    let w = z - d;
    let count = zs.tail_count() + 1 - first;
    let special = reference
        .nearby_pole(w)
        .filter(|&(m, _)| m <= count)
        .map(|(m, alpha)| (m + first - 1, alpha));
    let mut factors = Vec::with_capacity(count + 2);
    factors.push(match special {
        Some((_, alpha)) => reference.cancelled(w, alpha),
        None => reference.eval(w),
    });
    for k in first..=zs.tail_count() {
        let num = zs.squares[k - 1] - z;
        let den = zs.head_sq(k) + d - z;
        let is_special = special.map(|(m, _)| m) == Some(k);
        match (exclude == Some(k), is_special) {
            (false, false) => factors.push(num / den),
            (false, true) => factors.push(num),
            (true, false) => factors.push(1.0 / den),
            (true, true) => {}
        }
    }
    pairwise_product(&factors)
}

/// The characteristic function as a function of z = λ².
///
/// For `IntegerSin` this is Ψ(λ)/λ; the other classes return Φ itself.
pub fn product_eval_z(zeros: &ZeroSequence, z: f64) -> f64 {
    match zeros.regime {
        AsymptoticClass::HalfIntegerCos | AsymptoticClass::HalfIntegerSin => {
            core(zeros, Reference::Cos, 1, z, None)
        }
        AsymptoticClass::IntegerSin => core(zeros, Reference::Sinc, 1, z, None),
        AsymptoticClass::IntegerCos => {
            // ref(w)/(0 − w) = −sin √w/√w, so the first zero is peeled off.
            -(zeros.squares[0] - z) * core(zeros, Reference::Sinc, 2, z, None)
        }
    }
}

/// The characteristic function at real λ: even for cosine classes, odd for `IntegerSin`.
pub fn product_eval(zeros: &ZeroSequence, lambda: f64) -> f64 {
    let v = product_eval_z(zeros, lambda * lambda);
    if zeros.regime == AsymptoticClass::IntegerSin {
        lambda * v
    } else {
        v
    }
}

fn check_index(zeros: &ZeroSequence, n: usize) -> Result<()> {
    if n == 0 || n > zeros.tail_count() {
        return Err(Error::MalformedInput(format!(
            "zero index {n} outside 1..={}",
            zeros.tail_count()
        )));
    }
    Ok(())
}

/// d/dz of [`product_eval_z`] at z = λ_n².
pub fn product_derivative_z(zeros: &ZeroSequence, n: usize) -> Result<f64> {
    check_index(zeros, n)?;
    let zn = zeros.squares[n - 1];
    Ok(match zeros.regime {
        AsymptoticClass::HalfIntegerCos | AsymptoticClass::HalfIntegerSin => {
            -core(zeros, Reference::Cos, 1, zn, Some(n))
        }
        AsymptoticClass::IntegerSin => -core(zeros, Reference::Sinc, 1, zn, Some(n)),
        AsymptoticClass::IntegerCos if n == 1 => core(zeros, Reference::Sinc, 2, zn, None),
        AsymptoticClass::IntegerCos => {
            (zeros.squares[0] - zn) * core(zeros, Reference::Sinc, 2, zn, Some(n))
        }
    })
}

/// d/dλ of [`product_eval`] at λ = λ_n.
pub fn product_derivative_at_zero(zeros: &ZeroSequence, n: usize) -> Result<f64> {
    let dz = product_derivative_z(zeros, n)?;
    let l = zeros.zeros[n - 1];
    Ok(match zeros.regime {
        // Ψ = λ P(λ²) and P(λ_n²) = 0.
        AsymptoticClass::IntegerSin => 2.0 * l * l * dz,
        _ => 2.0 * l * dz,
    })
}
