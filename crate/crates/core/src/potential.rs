//! Piecewise-constant primitives σ of singular potentials q = σ′ on [0, 1].
//!
//! The potential itself is never formed: for a piecewise-constant σ it is a
//! finite sum of point masses located at the interior breakpoints, with mass
//! equal to the jump of σ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Piecewise-constant σ on a partition `0 = x_0 < x_1 < … < x_m = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSigma", into = "RawSigma")]
pub struct PiecewiseSigma {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSigma {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawSigma> for PiecewiseSigma {
    type Error = Error;

    fn try_from(raw: RawSigma) -> Result<Self> {
        PiecewiseSigma::new(raw.breakpoints, raw.values)
    }
}

impl From<PiecewiseSigma> for RawSigma {
    fn from(s: PiecewiseSigma) -> Self {
        RawSigma {
            breakpoints: s.breakpoints,
            values: s.values,
        }
    }
}

impl PiecewiseSigma {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidPotential(
                "at least two breakpoints are required".into(),
            ));
        }
        if values.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidPotential(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::InvalidPotential(
                "breakpoints must start at 0 and end at 1".into(),
            ));
        }
        if let Some(i) = breakpoints.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidPotential(format!(
                "breakpoints not strictly increasing at index {}",
                i + 1
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential(format!(
                "value {i} is not finite"
            )));
        }
        Ok(Self { breakpoints, values })
    }

    /// σ on `values.len()` cells of equal width.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let m = values.len();
        if m == 0 {
            return Err(Error::InvalidPotential("no cells".into()));
        }
        let breakpoints = (0..=m).map(|i| i as f64 / m as f64).collect();
        Self::new(breakpoints, values)
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(vec![0.0, 1.0], vec![value])
    }

    pub fn zero() -> Self {
        Self {
            breakpoints: vec![0.0, 1.0],
            values: vec![0.0],
        }
    }

    /// σ = `height`·H(x − `at`): a point mass of size `height` at `at` in q.
    pub fn step(at: f64, height: f64) -> Result<Self> {
        if !(at > 0.0 && at < 1.0) {
            return Err(Error::InvalidPotential(format!(
                "step location {at} must lie in (0, 1)"
            )));
        }
        Self::new(vec![0.0, at, 1.0], vec![0.0, height])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_count(&self) -> usize {
        self.values.len()
    }

    /// Cells as `(left, right, value)`.
    pub fn cells(&self) -> impl DoubleEndedIterator<Item = (f64, f64, f64)> + ExactSizeIterator + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, &v)| (w[0], w[1], v))
    }

    /// Value at `x`; right-continuous except at x = 1.
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.breakpoints[1..]
            .partition_point(|&b| b <= x)
            .min(self.values.len() - 1);
        self.values[idx]
    }

    pub fn mean(&self) -> f64 {
        self.cells().map(|(a, b, v)| (b - a) * v).sum()
    }

    pub fn shifted(&self, shift: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v + shift).collect(),
        }
    }

    /// Representative with zero mean, i.e. the gauge-fixed form.
    pub fn zero_mean(&self) -> Self {
        self.shifted(-self.mean())
    }

    pub fn l2_norm(&self) -> f64 {
        self.cells()
            .map(|(a, b, v)| (b - a) * v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Exact L₂(0,1) distance between two piecewise-constant functions.
    pub fn l2_distance(&self, other: &Self) -> f64 {
        let grid = merge_breakpoints(&self.breakpoints, &other.breakpoints);
        grid.windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let d = self.eval(mid) - other.eval(mid);
                (w[1] - w[0]) * d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Total variation Σ|σ_{j+1} − σ_j|.
    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    /// L₂ projection of this σ onto `cells` equal cells (exact cell averages).
    pub fn project_uniform(&self, cells: usize) -> Result<Self> {
        check_cells(cells)?;
        let values = (0..cells)
            .map(|j| {
                let a = j as f64 / cells as f64;
                let b = (j + 1) as f64 / cells as f64;
                self.integral(a, b) * cells as f64
            })
            .collect();
        Self::uniform(values)
    }

    fn integral(&self, a: f64, b: f64) -> f64 {
        self.cells()
            .map(|(l, r, v)| {
                let lo = l.max(a);
                let hi = r.min(b);
                if hi > lo {
                    (hi - lo) * v
                } else {
                    0.0
                }
            })
            .sum()
    }
}

fn check_cells(cells: usize) -> Result<()> {
    if cells == 0 {
        Err(Error::InvalidPotential("cell count must be positive".into()))
    } else {
        Ok(())
    }
}

fn merge_breakpoints(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut grid: Vec<f64> = a.iter().chain(b).copied().collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Source of σ values for [`project_sigma`].
pub enum SigmaSource<'a> {
    /// Point samples, interpreted as the piecewise-linear interpolant
    /// (constant extrapolation outside the sampled range).
    Samples(&'a [(f64, f64)]),
    /// Closed-form σ evaluated by composite Gauss–Legendre quadrature.
    Function(&'a dyn Fn(f64) -> f64),
}

/// L₂ projection of σ onto `cells` equal cells: the cell averages.
pub fn project_sigma(source: SigmaSource<'_>, cells: usize) -> Result<PiecewiseSigma> {
    check_cells(cells)?;
    let width = 1.0 / cells as f64;
    let values = match source {
        SigmaSource::Samples(samples) => {
            let samples = sorted_samples(samples)?;
            (0..cells)
                .map(|j| {
                    let a = j as f64 * width;
                    linear_interp_integral(&samples, a, a + width) / width
                })
                .collect::<Vec<_>>()
        }
        SigmaSource::Function(f) => {
            let rule = GaussLegendre::new(10);
            let panels = 8;
            let mut values = Vec::with_capacity(cells);
            for j in 0..cells {
                let a = j as f64 * width;
                let h = width / panels as f64;
                let mut total = 0.0;
                for p in 0..panels {
                    let lo = a + p as f64 * h;
                    total += rule.integrate(lo, lo + h, f);
                }
                if !total.is_finite() {
                    return Err(Error::InvalidPotential(format!(
                        "σ is not finite on cell {j}"
                    )));
                }
                values.push(total / width);
            }
            values
        }
    };
    PiecewiseSigma::uniform(values)
}

fn sorted_samples(samples: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(Error::InvalidPotential("no samples".into()));
    }
    if let Some(i) = samples
        .iter()
        .position(|(x, y)| !x.is_finite() || !y.is_finite())
    {
        return Err(Error::InvalidPotential(format!("sample {i} is not finite")));
    }
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(s)
}

// Integral over [a, b] of the piecewise-linear interpolant through `s`.
fn linear_interp_integral(s: &[(f64, f64)], a: f64, b: f64) -> f64 {
    let value_at = |x: f64| -> f64 {
        if x <= s[0].0 {
            return s[0].1;
        }
        if x >= s[s.len() - 1].0 {
            return s[s.len() - 1].1;
        }
        let i = s.partition_point(|p| p.0 <= x);
        let (x0, y0) = s[i - 1];
        let (x1, y1) = s[i];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    };
    let mut knots = vec![a];
    knots.extend(s.iter().map(|p| p.0).filter(|&x| x > a && x < b));
    knots.push(b);
    knots
        .windows(2)
        .map(|w| 0.5 * (w[1] - w[0]) * (value_at(w[0]) + value_at(w[1])))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_of_constant_is_constant() {
        let f = |_x: f64| 0.7;
        let p = project_sigma(SigmaSource::Function(&f), 4).unwrap();
        for v in p.values() {
            assert!((v - 0.7).abs() < 1e-15);
        }
    }

    #[test]
    fn projection_of_identity_gives_cell_midpoints() {
        let f = |x: f64| x;
        let p = project_sigma(SigmaSource::Function(&f), 2).unwrap();
        assert!((p.values()[0] - 0.25).abs() < 1e-15);
        assert!((p.values()[1] - 0.75).abs() < 1e-15);

        let samples = [(0.0, 0.0), (1.0, 1.0)];
        let p = project_sigma(SigmaSource::Samples(&samples), 2).unwrap();
        assert!((p.values()[0] - 0.25).abs() < 1e-15);
        assert!((p.values()[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn aligned_heaviside_projects_exactly() {
        let f = |x: f64| if x >= 0.5 { 1.0 } else { 0.0 };
        let p = project_sigma(SigmaSource::Function(&f), 2).unwrap();
        assert_eq!(p.values()[0], 0.0);
        assert!((p.values()[1] - 1.0).abs() < 1e-15);
        let step = PiecewiseSigma::step(0.5, 1.0).unwrap();
        assert_eq!(step.project_uniform(2).unwrap().values(), &[0.0, 1.0]);
    }

    #[test]
    fn non_finite_samples_are_rejected() {
        let samples = [(0.0, 1.0), (0.5, f64::NAN)];
        assert!(matches!(
            project_sigma(SigmaSource::Samples(&samples), 3),
            Err(Error::InvalidPotential(_))
        ));
        let f = |_x: f64| f64::INFINITY;
        assert!(project_sigma(SigmaSource::Function(&f), 3).is_err());
        assert!(project_sigma(SigmaSource::Function(&f), 0).is_err());
    }

    #[test]
    fn projection_error_halves_when_cells_double() {
        // ‖x − P_m x‖ = 1/(m √12) exactly; compare against a fine reference grid.
        let err = |m: usize| {
            let f = |x: f64| x;
            let p = project_sigma(SigmaSource::Function(&f), m).unwrap();
            let rule = GaussLegendre::new(10);
            p.cells()
                .map(|(a, b, v)| rule.integrate(a, b, |x| (x - v).powi(2)))
                .sum::<f64>()
                .sqrt()
        };
        let mut prev = err(2);
        for m in [4, 8, 16, 32] {
            let e = err(m);
            let ratio = prev / e;
            assert!(ratio > 2.0 / 1.5 && ratio < 2.0 * 1.5, "ratio {ratio}");
            assert!((e - 1.0 / (m as f64 * 12f64.sqrt())).abs() < 1e-12);
            prev = e;
        }
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(PiecewiseSigma::new(vec![0.0, 0.5], vec![1.0]).is_err());
        assert!(PiecewiseSigma::new(vec![0.0, 0.5, 0.5, 1.0], vec![1.0, 2.0, 3.0]).is_err());
        assert!(PiecewiseSigma::new(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(PiecewiseSigma::new(vec![0.0, 1.0], vec![f64::NAN]).is_err());
        let bad: std::result::Result<PiecewiseSigma, _> =
            serde_json::from_str(r#"{"breakpoints":[0,0.2],"values":[1]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn eval_and_distance() {
        let s = PiecewiseSigma::step(0.5, 1.0).unwrap();
        assert_eq!(s.eval(0.25), 0.0);
        assert_eq!(s.eval(0.5), 1.0);
        assert_eq!(s.eval(1.0), 1.0);
        assert!((s.mean() - 0.5).abs() < 1e-15);
        let z = PiecewiseSigma::zero();
        assert!((s.l2_distance(&z) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((s.zero_mean().l2_norm() - 0.5).abs() < 1e-15);
        assert_eq!(s.total_variation(), 1.0);
    }
}
