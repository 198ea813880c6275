//! Perturbed sine and cosine systems on [0, 1]: Gram matrices, expansions and
//! the cosine-difference estimate.
//!
//! Frequencies are stored as a multiple of π/2 plus a small offset, so that
//! sin and cos at unperturbed sums and differences of frequencies are exact
//! and the unperturbed Gram matrix is exactly ½·I.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::spectrum::Spectrum;

/// Gram matrices with a larger condition number are not treated as Riesz bases.
pub const RIESZ_CONDITION_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisKind {
    Sine,
    Cosine,
}

/// Unperturbed frequency of the k-th element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyHead {
    /// πk.
    Integer,
    /// π(k − 1/2).
    HalfIntegerBelow,
    /// π(k + 1/2).
    HalfIntegerAbove,
}

/// A number (π/2)·units + offset.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Angle {
    units: i64,
    offset: f64,
}

impl Angle {
    fn value(self) -> f64 {
        FRAC_PI_2 * self.units as f64 + self.offset
    }

    fn add(self, other: Angle) -> Angle {
        Angle {
            units: self.units + other.units,
            offset: self.offset + other.offset,
        }
    }

    fn sub(self, other: Angle) -> Angle {
        Angle {
            units: self.units - other.units,
            offset: self.offset - other.offset,
        }
    }

    fn sin(self) -> f64 {
        let (s, c) = self.offset.sin_cos();
        match self.units.rem_euclid(4) {
            0 => s,
            1 => c,
            2 => -s,
            _ => -c,
        }
    }

    /// ∫₀¹ cos(value·t) dt.
    fn sinc(self) -> f64 {
        if self.units == 0 && self.offset.abs() < 1e-4 {
            let x2 = self.offset * self.offset;
            return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
        }
        self.sin() / self.value()
    }
}

/// {sin ω_k x} or {cos ω_k x} with ω_k = head(k) + μ_k.
///
/// Sine systems are indexed from k = 1, cosine systems from k = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySystem {
    kind: BasisKind,
    head: FrequencyHead,
    offsets: Vec<f64>,
}

impl FrequencySystem {
    /// System with frequencies head(k) + offsets[i].
    pub fn new(kind: BasisKind, head: FrequencyHead, offsets: Vec<f64>) -> Result<Self> {
        let sys = Self { kind, head, offsets };
        if let Some(i) = sys.offsets.iter().position(|m| !m.is_finite()) {
            return Err(Error::MalformedInput(format!("frequency offset {i} is not finite")));
        }
        let freqs = sys.frequencies();
        if freqs.first().is_some_and(|&w| w < 0.0) {
            return Err(Error::MalformedInput("frequencies must be nonnegative".into()));
        }
        if let Some(i) = freqs.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(Error::MalformedInput(format!("frequencies not strictly increasing at position {}", i + 2)));
        }
        let n = sys.offsets.len();
        if n >= 8 {
            let q = n / 4;
            let first = sys.offsets[..q].iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let last = sys.offsets[n - q..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if last > first + 1e-12 {
                return Err(Error::MalformedInput(format!(
                    "frequency deviations do not decay (last-quartile max {last:e}, first-quartile max {first:e})"
                )));
            }
        }
        Ok(sys)
    }

    /// Offsets μ_k = ω_k − head(k) recovered from explicit frequencies.
    pub fn from_frequencies(kind: BasisKind, head: FrequencyHead, frequencies: &[f64]) -> Result<Self> {
        let first = Self::first_index_of(kind);
        let offsets = frequencies
            .iter()
            .enumerate()
            .map(|(i, w)| w - FRAC_PI_2 * head_units(head, first + i) as f64)
            .collect();
        Self::new(kind, head, offsets)
    }

    /// The four standard families (a)–(d) with offsets μ_k = f(k).
    pub fn family(label: char, count: usize, perturbation: impl Fn(usize) -> f64) -> Result<Self> {
        let (kind, head) = match label {
            'a' => (BasisKind::Sine, FrequencyHead::Integer),
            'b' => (BasisKind::Sine, FrequencyHead::HalfIntegerBelow),
            'c' => (BasisKind::Cosine, FrequencyHead::Integer),
            'd' => (BasisKind::Cosine, FrequencyHead::HalfIntegerAbove),
            other => return Err(Error::MalformedInput(format!("unknown family {other:?}"))),
        };
        let first = Self::first_index_of(kind);
        Self::new(kind, head, (first..first + count).map(perturbation).collect())
    }

    fn first_index_of(kind: BasisKind) -> usize {
        match kind {
            BasisKind::Sine => 1,
            BasisKind::Cosine => 0,
        }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn head(&self) -> FrequencyHead {
        self.head
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    fn angle(&self, j: usize) -> Angle {
        Angle {
            units: head_units(self.head, Self::first_index_of(self.kind) + j),
            offset: self.offsets[j],
        }
    }

    pub fn frequency(&self, j: usize) -> f64 {
        self.angle(j).value()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.frequency(j)).collect()
    }

    /// e_j(x), 0-based j.
    pub fn element(&self, j: usize, x: f64) -> f64 {
        let w = self.frequency(j) * x;
        match self.kind {
            BasisKind::Sine => w.sin(),
            BasisKind::Cosine => w.cos(),
        }
    }
}

fn head_units(head: FrequencyHead, k: usize) -> i64 {
    let k = k as i64;
    match head {
        FrequencyHead::Integer => 2 * k,
        FrequencyHead::HalfIntegerBelow => 2 * k - 1,
        FrequencyHead::HalfIntegerAbove => 2 * k + 1,
    }
}

fn check_truncation(sys: &FrequencySystem, n: usize) -> Result<()> {
    if n == 0 || n > sys.len() {
        return Err(Error::MalformedInput(format!(
            "truncation {n} outside 1..={}",
            sys.len()
        )));
    }
    Ok(())
}

/// G_jk = ∫₀¹ e_j e_k by product-to-sum formulas.
pub fn gram_matrix(sys: &FrequencySystem, n: usize) -> Result<DMatrix<f64>> {
    check_truncation(sys, n)?;
    let sign = match sys.kind {
        BasisKind::Sine => -1.0,
        BasisKind::Cosine => 1.0,
    };
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let a = sys.angle(j);
            (0..n)
                .map(|k| {
                    let b = sys.angle(k);
                    0.5 * (a.sub(b).sinc() + sign * a.add(b).sinc())
                })
                .collect()
        })
        .collect();
    Ok(DMatrix::from_fn(n, n, |j, k| rows[j][k]))
}

/// Ratio of the extreme eigenvalues of a symmetric matrix.
pub fn condition_number(gram: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(gram.clone());
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &v in eig.eigenvalues.iter() {
        lo = lo.min(v.abs());
        hi = hi.max(v.abs());
    }
    hi / lo
}

/// A function on [0, 1] with computable moments.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// Σ_j coeffs[i][j] x^j on [breakpoints[i], breakpoints[i+1]].
    Piecewise { breakpoints: Vec<f64>, coeffs: Vec<Vec<f64>> },
    /// sin(ωx).
    Sine(f64),
    /// cos(ωx).
    Cosine(f64),
}

impl Profile {
    pub fn constant(c: f64) -> Self {
        Profile::Piecewise {
            breakpoints: vec![0.0, 1.0],
            coeffs: vec![vec![c]],
        }
    }

    /// f(x) = x.
    pub fn identity() -> Self {
        Profile::Piecewise {
            breakpoints: vec![0.0, 1.0],
            coeffs: vec![vec![0.0, 1.0]],
        }
    }

    /// 0 on [0, at), 1 on [at, 1].
    pub fn step(at: f64) -> Self {
        Profile::Piecewise {
            breakpoints: vec![0.0, at, 1.0],
            coeffs: vec![vec![0.0], vec![1.0]],
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Piecewise { breakpoints, coeffs } => {
                let i = breakpoints[1..]
                    .partition_point(|&b| b <= x)
                    .min(coeffs.len() - 1);
                coeffs[i].iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
            Profile::Sine(w) => (w * x).sin(),
            Profile::Cosine(w) => (w * x).cos(),
        }
    }

    fn own_frequency(&self) -> f64 {
        match self {
            Profile::Piecewise { .. } => 0.0,
            Profile::Sine(w) | Profile::Cosine(w) => w.abs(),
        }
    }

    fn pieces(&self) -> Vec<(f64, f64)> {
        match self {
            Profile::Piecewise { breakpoints, .. } => breakpoints.windows(2).map(|w| (w[0], w[1])).collect(),
            _ => vec![(0.0, 1.0)],
        }
    }

    /// ∫₀¹ f(x) g(x) dx for g oscillating at most at `frequency`.
    pub fn integrate_against(&self, frequency: f64, g: impl Fn(f64) -> f64) -> f64 {
        let rule = GaussLegendre::new(20);
        let omega = frequency.abs() + self.own_frequency();
        self.pieces()
            .into_iter()
            .map(|(a, b)| {
                let panels = ((omega * (b - a) / 2.0).ceil() as usize).max(1);
                let h = (b - a) / panels as f64;
                (0..panels)
                    .map(|p| {
                        let lo = a + p as f64 * h;
                        rule.integrate(lo, lo + h, |x| self.eval(x) * g(x))
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    fn norm_squared(&self) -> f64 {
        match self {
            Profile::Sine(w) => 0.5 * (1.0 - sinc(2.0 * w)),
            Profile::Cosine(w) => 0.5 * (1.0 + sinc(2.0 * w)),
            Profile::Piecewise { .. } => self.integrate_against(0.0, |x| self.eval(x)),
        }
    }

    /// ∫ f e_j, in closed form for trigonometric profiles.
    fn moment(&self, sys: &FrequencySystem, j: usize) -> f64 {
        let w = sys.frequency(j);
        match (self, sys.kind) {
            (Profile::Sine(v), BasisKind::Sine) => 0.5 * (sinc(v - w) - sinc(v + w)),
            (Profile::Cosine(v), BasisKind::Cosine) => 0.5 * (sinc(v - w) + sinc(v + w)),
            (_, BasisKind::Sine) => self.integrate_against(w, |x| (w * x).sin()),
            (_, BasisKind::Cosine) => self.integrate_against(w, |x| (w * x).cos()),
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Coefficients of the best L₂ approximation of f in span{e_1, …, e_n}.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub coefficients: Vec<f64>,
    /// b_k = ∫ f e_k.
    pub moments: Vec<f64>,
    /// ‖f − Σ c_k e_k‖.
    pub residual: f64,
    pub gram_condition: f64,
}

/// Solves G c = b for the first `n` elements of the system.
pub fn expand_in_basis(f: &Profile, sys: &FrequencySystem, n: usize) -> Result<Expansion> {
    let gram = gram_matrix(sys, n)?;
    let cond = condition_number(&gram);
    if !(cond <= RIESZ_CONDITION_LIMIT) {
        return Err(Error::NotRieszLike { cond });
    }
    let moments: Vec<f64> = (0..n).into_par_iter().map(|j| f.moment(sys, j)).collect();
    let b = DVector::from_column_slice(&moments);
    let c = gram
        .clone()
        .cholesky()
        .map(|ch| ch.solve(&b))
        .or_else(|| gram.clone().lu().solve(&b))
        .ok_or(Error::NotRieszLike { cond })?;
    let energy = f.norm_squared() - 2.0 * c.dot(&b) + c.dot(&(&gram * &c));
    Ok(Expansion {
        coefficients: c.iter().copied().collect(),
        moments,
        residual: energy.max(0.0).sqrt(),
        gram_condition: cond,
    })
}

/// ν_n and the remainder of ∫ f (cos λ_n t − cos μ_n t) = (λ_n − μ_n) ν_n + O(|λ_n − μ_n|³).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierDiff {
    /// ν_n = −∫ t f(t) sin((λ_n + μ_n) t / 2) dt.
    pub nu: Vec<f64>,
    /// ∫ f (cos λ_n t − cos μ_n t) dt.
    pub integrals: Vec<f64>,
    pub residuals: Vec<f64>,
    /// |λ_n − μ_n|.
    pub differences: Vec<f64>,
}

impl FourierDiff {
    /// max |residual_n| / |λ_n − μ_n|³ over 1-based indices in `range`; 0 if all differences vanish.
    pub fn cubic_constant_over(&self, range: std::ops::RangeInclusive<usize>) -> f64 {
        range
            .filter(|&n| n >= 1 && n <= self.residuals.len() && self.differences[n - 1] > 0.0)
            .map(|n| self.residuals[n - 1].abs() / self.differences[n - 1].powi(3))
            .fold(0.0, f64::max)
    }

    pub fn cubic_constant(&self) -> f64 {
        self.cubic_constant_over(1..=self.residuals.len())
    }
}

pub fn fourier_diff(f: &Profile, lams: &Spectrum, mus: &Spectrum) -> Result<FourierDiff> {
    if lams.len() != mus.len() {
        return Err(Error::MalformedInput(format!(
            "sequence lengths differ: {} and {}",
            lams.len(),
            mus.len()
        )));
    }
    let (l, m) = (lams.roots(), mus.roots());
    let rows: Vec<(f64, f64, f64, f64)> = l
        .par_iter()
        .zip(&m)
        .map(|(&a, &b)| {
            let (half_sum, half_diff) = (0.5 * (a + b), 0.5 * (a - b));
            let nu = -f.integrate_against(half_sum, |t| t * (half_sum * t).sin());
            // cos a t − cos b t = −2 sin(half_diff t) sin(half_sum t), free of cancellation.
            let integral = f.integrate_against(a.abs().max(b.abs()), |t| {
                -2.0 * (half_diff * t).sin() * (half_sum * t).sin()
            });
            (nu, integral, integral - (a - b) * nu, (a - b).abs())
        })
        .collect();
    Ok(FourierDiff {
        nu: rows.iter().map(|r| r.0).collect(),
        integrals: rows.iter().map(|r| r.1).collect(),
        residuals: rows.iter().map(|r| r.2).collect(),
        differences: rows.iter().map(|r| r.3).collect(),
    })
}

/// Heads π(n − 1/2) shifted by `offsets`, as a spectrum of squares.
pub fn half_integer_spectrum(offsets: impl Fn(usize) -> f64, count: usize) -> Result<Spectrum> {
    let roots: Vec<f64> = (1..=count).map(|n| PI * (n as f64 - 0.5) + offsets(n)).collect();
    Spectrum::from_roots(&roots, crate::spectrum::AsymptoticClass::HalfIntegerCos)
}
