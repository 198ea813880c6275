//! Forward problem: eigenvalues, norming constants and characteristic values by shooting.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{BoundaryData, BoundaryValue};
use crate::error::{Error, Result};
use crate::ode::{cell_transfer, propagate, Direction, Propagation, StateVector};
use crate::potential::PiecewiseSigma;
use crate::prufer::{count_below, index_function};
use crate::quadrature::GaussLegendre;
use crate::spectrum::{AsymptoticClass, SpectralData, Spectrum};

const BRACKET_EXPANSIONS: usize = 5;
const BISECTION_REL_WIDTH: f64 = 1e-8;
const SECANT_STEPS: usize = 12;
const QUADRATURE_REL_TOL: f64 = 1e-9;
const QUADRATURE_REFINEMENTS: usize = 4;
const NEAR_POLE_TOL: f64 = 1e-6;

/// One evaluation of the characteristic function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicSample {
    pub s: f64,
    pub value: f64,
}

/// Initial state at x = 1 of the solution satisfying the right boundary condition.
fn right_init(right: BoundaryValue) -> StateVector {
    match right {
        BoundaryValue::Finite(h) => StateVector::new(-h, 1.0),
        // u(1) = 0, u′(1) = −1: gives u(0) = sin λ / λ for σ ≡ 0.
        BoundaryValue::Infinite => StateVector::new(-1.0, 0.0),
    }
}

/// Initial state at x = 0 of the solution satisfying the left boundary condition.
fn left_init(left: BoundaryValue) -> StateVector {
    match left {
        BoundaryValue::Finite(h) => StateVector::new(h, 1.0),
        BoundaryValue::Infinite => StateVector::new(1.0, 0.0),
    }
}

fn left_form(left: BoundaryValue, state: StateVector) -> f64 {
    match left {
        BoundaryValue::Finite(h) => state.u1 - h * state.u,
        BoundaryValue::Infinite => state.u,
    }
}

/// Boundary form at x = 0 of the solution shot from x = 1.
///
/// The solution starts from (u^[1], u) = (−h, 1), or (−1, 0) when h = ∞, so the
/// value is an entire function of s whose zeros are exactly the eigenvalues.
/// For σ ≡ 0 it equals cos λ (H = ∞, h = 0), sin λ / λ (H = h = ∞),
/// λ sin λ (H = h = 0) and so on.
pub fn char_value(sigma: &PiecewiseSigma, bc: BoundaryData, s: f64) -> f64 {
    let p = propagate(sigma, s, right_init(bc.right), Direction::RightToLeft);
    left_form(bc.left, p.final_state()) * p.log_scale.exp()
}

pub fn char_sample(sigma: &PiecewiseSigma, bc: BoundaryData, s: f64) -> CharacteristicSample {
    CharacteristicSample {
        s,
        value: char_value(sigma, bc, s),
    }
}

/// Characteristic values on a grid, evaluated in parallel.
pub fn char_samples(sigma: &PiecewiseSigma, bc: BoundaryData, grid: &[f64]) -> Vec<CharacteristicSample> {
    grid.par_iter().map(|&s| char_sample(sigma, bc, s)).collect()
}

fn signed_square(l: f64) -> f64 {
    l * l.abs()
}

fn bracket_center(class: AsymptoticClass, bc: BoundaryData, n: usize) -> f64 {
    let h = bc.right.finite().unwrap_or(0.0);
    let big_h = bc.left.finite().unwrap_or(0.0);
    let nf = n as f64;
    let correction = match class {
        AsymptoticClass::HalfIntegerCos => h / (PI * nf),
        AsymptoticClass::HalfIntegerSin => big_h / (PI * nf),
        AsymptoticClass::IntegerCos if n >= 2 => (big_h + h) / (PI * (nf - 1.0)),
        _ => 0.0,
    };
    class.head(n) + correction.clamp(-PI / 2.0, PI / 2.0)
}

/// Locates the n-th eigenvalue (1-based).
fn find_eigenvalue(sigma: &PiecewiseSigma, bc: BoundaryData, n: usize) -> Result<f64> {
    let class = AsymptoticClass::for_boundary(bc);
    let center = bracket_center(class, bc, n);
    let f = |s: f64| index_function(sigma, bc, n, s);

    let mut half = PI / 2.0 * (1.0 + 2.0 / n as f64);
    let mut bracket = None;
    for _ in 0..=BRACKET_EXPANSIONS {
        let (lo, hi) = (signed_square(center - half), signed_square(center + half));
        let (flo, fhi) = (f(lo), f(hi));
        if flo < 0.0 && fhi > 0.0 {
            bracket = Some((lo, hi, flo, fhi));
            break;
        }
        half *= 2.0;
    }
    let (mut lo, mut hi, mut flo, mut fhi) = bracket.ok_or_else(|| Error::SpectrumSearch {
        index: n,
        reason: format!(
            "no sign change of the Prüfer index within √s ∈ {center:.6} ± {half:.3}"
        ),
    })?;

    // Shrink until only the n-th eigenvalue lies inside. Neighbours sit at index ±π,
    // so the endpoints are kept a quarter turn away from them.
    while flo <= -PI / 2.0 || fhi >= PI / 2.0 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm < 0.0 {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
    }

    let g = |s: f64| char_value(sigma, bc, s);
    let (mut glo, mut ghi) = (g(lo), g(hi));
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    if glo.signum() == ghi.signum() {
        // The characteristic value is too flat to resolve the sign; finish on the angle.
        return Ok(bisect(f, lo, hi, flo));
    }

    while hi - lo > BISECTION_REL_WIDTH * hi.abs().max(lo.abs()).max(1.0) {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
    }

    // Secant steps inside the final bracket; the endpoint with the smaller
    // residual wins when an iterate would leave it.
    let (mut best, mut gbest) = if glo.abs() < ghi.abs() { (lo, glo) } else { (hi, ghi) };
    for _ in 0..SECANT_STEPS {
        let x = hi - ghi * (hi - lo) / (ghi - glo);
        if !(x > lo && x < hi) {
            break;
        }
        let gx = g(x);
        if gx.abs() < gbest.abs() {
            best = x;
            gbest = gx;
        }
        if gx == 0.0 {
            break;
        }
        if gx.signum() == glo.signum() {
            lo = x;
            glo = gx;
        } else {
            hi = x;
            ghi = gx;
        }
        if hi - lo <= 4.0 * f64::EPSILON * x.abs() {
            break;
        }
    }
    Ok(best)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, flo: f64) -> f64 {
    let sign = flo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid).signum() == sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The first `count` eigenvalues of T(σ, H, h), searched independently per index.
///
/// One extra eigenvalue is located so that completeness can be certified by
/// counting at the midpoint between the last two.
pub fn compute_spectrum(sigma: &PiecewiseSigma, bc: BoundaryData, count: usize) -> Result<Spectrum> {
    let eigenvalues = eigenvalues_unchecked(sigma, bc, count)?;
    Spectrum::new(eigenvalues, AsymptoticClass::for_boundary(bc))
}

/// The first `count` eigenvalues without the positivity requirement.
pub(crate) fn eigenvalues_unchecked(sigma: &PiecewiseSigma, bc: BoundaryData, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::MalformedInput("eigenvalue count must be at least 1".into()));
    }
    let mut roots: Vec<f64> = (1..=count + 1)
        .into_par_iter()
        .map(|n| find_eigenvalue(sigma, bc, n))
        .collect::<Result<_>>()?;
    if let Some(i) = roots.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(Error::SpectrumSearch {
            index: i + 2,
            reason: format!("eigenvalue {} not above its predecessor {}", roots[i + 1], roots[i]),
        });
    }
    let probe = 0.5 * (roots[count - 1] + roots[count]);
    let counted = count_below(sigma, bc, probe)?;
    if counted != count {
        return Err(Error::SpectrumSearch {
            index: count,
            reason: format!("oscillation count {counted} below {probe} disagrees with {count} located roots"),
        });
    }
    roots.truncate(count);
    Ok(roots)
}

/// ∫ u² over the propagated trace on a fixed panel layout.
fn trace_square_integral(
    sigma: &PiecewiseSigma,
    prop: &Propagation,
    rule: &GaussLegendre,
    refinement: usize,
) -> f64 {
    let omega = prop.s.abs().sqrt();
    let mut total = 0.0;
    for (i, (a, b, v)) in sigma.cells().enumerate() {
        let len = b - a;
        let panels = ((omega * len / 2.0).ceil() as usize).max(1) << refinement;
        let start = prop.trace[i];
        let step = len / panels as f64;
        for p in 0..panels {
            let (pa, pb) = (p as f64 * step, (p + 1) as f64 * step);
            total += rule.integrate(pa, pb, |t| {
                let u = cell_transfer(v, prop.s, t).apply(start).u;
                u * u
            });
        }
    }
    total
}

pub(crate) fn norming_constant(sigma: &PiecewiseSigma, h: f64, s: f64, index: usize) -> Result<f64> {
    let prop = propagate(sigma, s, StateVector::new(-h, 1.0), Direction::RightToLeft);
    let coarse_rule = GaussLegendre::new(10);
    let fine_rule = GaussLegendre::new(20);
    let mut change = f64::INFINITY;
    for refinement in 0..=QUADRATURE_REFINEMENTS {
        let coarse = trace_square_integral(sigma, &prop, &coarse_rule, refinement);
        let fine = trace_square_integral(sigma, &prop, &fine_rule, refinement);
        change = (fine - coarse).abs() / fine.abs();
        if change <= QUADRATURE_REL_TOL {
            return Ok(2.0 * fine * (2.0 * prop.log_scale).exp());
        }
    }
    Err(Error::Quadrature { index, change })
}

/// Norming constants α_n = 2∫u_n² for eigenfunctions normalized by u_n(1) = 1.
pub fn norming_constants(
    sigma: &PiecewiseSigma,
    bc: BoundaryData,
    spectrum: &Spectrum,
) -> Result<SpectralData> {
    let h = bc.right.finite().ok_or_else(|| {
        Error::UnsupportedBoundary(
            "norming constants need a finite h: Dirichlet eigenfunctions vanish at x = 1".into(),
        )
    })?;
    let alphas: Vec<f64> = spectrum
        .eigenvalues()
        .par_iter()
        .enumerate()
        .map(|(i, &s)| norming_constant(sigma, h, s, i + 1))
        .collect::<Result<_>>()?;
    SpectralData::new(spectrum.clone(), alphas, bc.left)
}

/// Completion of the eigenvalue series beyond the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailModel {
    /// Truncated sum only.
    None,
    /// Σ_{n>N} 2/(head(n)² − s) with α_n = 1, summed by integral comparison.
    Asymptotic,
}

impl TailModel {
    fn estimate(self, class: AsymptoticClass, terms: usize, s: f64) -> f64 {
        if self == TailModel::None {
            return 0.0;
        }
        let c0 = match class {
            AsymptoticClass::HalfIntegerCos | AsymptoticClass::HalfIntegerSin => 0.5,
            AsymptoticClass::IntegerSin => 0.0,
            AsymptoticClass::IntegerCos => 1.0,
        };
        // Midpoint comparison: Σ_{n>N} g(n) ≈ ∫_{N+1/2}^∞ g.
        let y = PI * (terms as f64 + 0.5 - c0);
        let r = s.abs().sqrt();
        let g = if s > 0.0 {
            (r / y).atanh() / r
        } else if s < 0.0 {
            (r / y).atan() / r
        } else {
            1.0 / y
        };
        2.0 / PI * g
    }
}

/// Both sides of Σ 2/((s_n − s)α_n) = G(1, 1; s).
///
/// The left side sums the supplied spectral data plus the tail model; the
/// right side is the Green function at x = y = 1 from one left shot,
/// u₋(1) / (u₋^[1](1) + h u₋(1)), which is tan λ / λ for σ ≡ 0, H = ∞, h = 0.
pub fn resolvent_trace_ratio(
    sigma: &PiecewiseSigma,
    bc: BoundaryData,
    s: f64,
    data: &SpectralData,
    tail: TailModel,
) -> Result<(f64, f64)> {
    if !s.is_finite() {
        return Err(Error::MalformedInput(format!("energy {s} is not finite")));
    }
    let h = bc.right.finite().ok_or_else(|| {
        Error::UnsupportedBoundary("the trace identity needs a finite h".into())
    })?;
    if data.left != bc.left {
        return Err(Error::MalformedInput(format!(
            "spectral data has H = {} but the boundary data has H = {}",
            data.left, bc.left
        )));
    }
    let eigenvalues = data.spectrum.eigenvalues();
    for &sn in eigenvalues {
        let distance = (s - sn).abs();
        if distance < NEAR_POLE_TOL * sn.abs().max(1.0) {
            return Err(Error::NearPole {
                s,
                eigenvalue: sn,
                distance,
            });
        }
    }
    let sum: f64 = eigenvalues
        .iter()
        .zip(&data.norming_constants)
        .map(|(&sn, &a)| 2.0 / ((sn - s) * a))
        .rev()
        .sum();
    let lhs = sum + tail.estimate(data.spectrum.regime(), eigenvalues.len(), s);

    let p = propagate(sigma, s, left_init(bc.left), Direction::LeftToRight);
    let end = p.final_state();
    let rhs = end.u / (end.u1 + h * end.u);
    Ok((lhs, rhs))
}
