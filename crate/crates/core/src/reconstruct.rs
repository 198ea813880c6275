//! Recovery of σ and h from eigenvalues with norming constants by a
//! regularized least-squares fit against the forward solver, and the
//! end-to-end round trip through the two-spectra reduction.
//!
//! σ is fitted on a uniform grid in the zero-mean gauge. The residual vector
//! holds (ŝ_n − s_n)/n and (α̂_n − α_n)/n for every datum and, when a
//! regularization weight is given, Charbonnier total-variation terms
//! √w·(Δσ² + ε²)^{1/4}. It is minimized by Levenberg–Marquardt with a
//! central-difference Jacobian.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{BoundaryData, BoundaryValue};
use crate::error::{Error, Result};
use crate::forward::{compute_spectrum, eigenvalues_unchecked, norming_constant, norming_constants};
use crate::potential::PiecewiseSigma;
use crate::reduction::{norming_from_two_spectra, validate_pair, RegimePair, Verdict};
use crate::spectrum::{AsymptoticClass, SpectralData};

/// Tunables of [`reconstruct_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionOptions {
    pub cells: usize,
    pub reg_weight: f64,
    /// Smoothing of |Δσ| in the total-variation term.
    pub tv_epsilon: f64,
    pub max_iterations: usize,
    /// Converged when the root-mean-square data residual is at most this.
    pub rms_threshold: f64,
    pub fd_step: f64,
}

impl ReconstructionOptions {
    pub fn new(cells: usize, reg_weight: f64) -> Self {
        Self {
            cells,
            reg_weight,
            tv_epsilon: 1e-3,
            max_iterations: 100,
            rms_threshold: 1e-3,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReconstructionStatus {
    Converged,
    NotConverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    /// Zero-mean σ̂.
    pub sigma_hat: PiecewiseSigma,
    pub h1_hat: f64,
    /// H in the zero-mean gauge; infinite stays infinite.
    #[serde(rename = "H_hat")]
    pub left_hat: BoundaryValue,
    pub gauge_note: String,
    /// Final objective ‖r‖² including regularization.
    pub misfit: f64,
    /// Root-mean-square of the data residuals alone.
    pub data_rms: f64,
    pub iterations: usize,
    pub status: ReconstructionStatus,
}

/// The least-squares problem behind [`reconstruct_sigma`], exposed for inspection.
#[derive(Debug, Clone)]
pub struct ReconstructionProblem {
    data: SpectralData,
    options: ReconstructionOptions,
    fit_left: bool,
}

impl ReconstructionProblem {
    pub fn new(data: &SpectralData, options: ReconstructionOptions) -> Result<Self> {
        let n = data.len();
        if options.cells < 1 || 2 * options.cells > n {
            return Err(Error::MalformedInput(format!(
                "{} cells need at least {} data points, got {n}",
                options.cells,
                2 * options.cells
            )));
        }
        if !(options.reg_weight >= 0.0 && options.reg_weight.is_finite()) {
            return Err(Error::MalformedInput("regularization weight must be a nonnegative number".into()));
        }
        Ok(Self {
            data: data.clone(),
            options,
            fit_left: !data.left.is_infinite(),
        })
    }

    /// Number of parameters: M − 1 free cell values, h, and H when finite.
    pub fn dimension(&self) -> usize {
        self.options.cells + usize::from(self.fit_left)
    }

    fn regime(&self) -> AsymptoticClass {
        self.data.spectrum.regime()
    }

    /// σ ≡ 0; h from the mean tail offset of s_n against the heads; H from the data.
    pub fn initial_parameters(&self) -> Vec<f64> {
        let s = self.data.spectrum.eigenvalues();
        let n = s.len();
        let start = n - n.div_ceil(3);
        let class = self.regime();
        let (mut num, mut den) = (0.0, 0.0);
        for (i, sn) in s.iter().enumerate().skip(start) {
            let w = ((i + 1) * (i + 1)) as f64;
            let a = class.head(i + 1);
            num += w * (sn - a * a);
            den += w;
        }
        let left = self.data.left.finite().unwrap_or(0.0);
        let mut p = vec![0.0; self.options.cells - 1];
        p.push(0.5 * num / den - left);
        if self.fit_left {
            p.push(left);
        }
        p
    }

    /// (σ, H, h) encoded by a parameter vector.
    pub fn unpack(&self, p: &[f64]) -> Result<(PiecewiseSigma, BoundaryData)> {
        let m = self.options.cells;
        let mut values = p[..m - 1].to_vec();
        values.push(-values.iter().sum::<f64>());
        let sigma = PiecewiseSigma::uniform(values)?;
        let left = if self.fit_left {
            BoundaryValue::Finite(p[m])
        } else {
            BoundaryValue::Infinite
        };
        Ok((sigma, BoundaryData::new(left, p[m - 1])))
    }

    fn data_residuals(&self, p: &[f64]) -> Result<Vec<f64>> {
        let (sigma, bc) = self.unpack(p)?;
        let n = self.data.len();
        let h = bc.right.finite().unwrap_or(0.0);
        let s_hat = eigenvalues_unchecked(&sigma, bc, n)?;
        let alpha_hat: Vec<f64> = s_hat
            .par_iter()
            .enumerate()
            .map(|(i, &s)| norming_constant(&sigma, h, s, i + 1))
            .collect::<Result<_>>()?;
        let s = self.data.spectrum.eigenvalues();
        let a = &self.data.norming_constants;
        let mut r = Vec::with_capacity(2 * n);
        for i in 0..n {
            let w = 1.0 / (i + 1) as f64;
            r.push(w * (s_hat[i] - s[i]));
            r.push(w * (alpha_hat[i] - a[i]));
        }
        Ok(r)
    }

    fn regularization_residuals(&self, p: &[f64]) -> Vec<f64> {
        if self.options.reg_weight == 0.0 {
            return Vec::new();
        }
        let m = self.options.cells;
        let mut values = p[..m - 1].to_vec();
        values.push(-values.iter().sum::<f64>());
        let (w, eps2) = (self.options.reg_weight.sqrt(), self.options.tv_epsilon.powi(2));
        values
            .windows(2)
            .map(|d| w * ((d[1] - d[0]).powi(2) + eps2).powf(0.25))
            .collect()
    }

    /// Full residual vector: data terms followed by regularization terms.
    pub fn residuals(&self, p: &[f64]) -> Result<Vec<f64>> {
        let mut r = self.data_residuals(p)?;
        r.extend(self.regularization_residuals(p));
        Ok(r)
    }

    /// Objective ‖r(p)‖².
    pub fn objective(&self, p: &[f64]) -> Result<f64> {
        Ok(self.residuals(p)?.iter().map(|x| x * x).sum())
    }

    /// Central-difference Jacobian of [`residuals`](Self::residuals), columns in parallel.
    pub fn jacobian(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let step = self.options.fd_step;
        let columns: Vec<Vec<f64>> = (0..p.len())
            .into_par_iter()
            .map(|j| {
                let hj = step * p[j].abs().max(1.0);
                let mut plus = p.to_vec();
                let mut minus = p.to_vec();
                plus[j] += hj;
                minus[j] -= hj;
                let (rp, rm) = (self.residuals(&plus)?, self.residuals(&minus)?);
                Ok(rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * hj)).collect())
            })
            .collect::<Result<_>>()?;
        let rows = columns[0].len();
        Ok(DMatrix::from_fn(rows, p.len(), |i, j| columns[j][i]))
    }

    /// ∇‖r‖² = 2 Jᵀ r, from the optimizer's Jacobian.
    pub fn gradient(&self, p: &[f64]) -> Result<Vec<f64>> {
        let r = DVector::from_vec(self.residuals(p)?);
        let j = self.jacobian(p)?;
        Ok((j.transpose() * r * 2.0).iter().copied().collect())
    }

    fn data_rms(&self, p: &[f64]) -> Result<f64> {
        let r = self.data_residuals(p)?;
        Ok((r.iter().map(|x| x * x).sum::<f64>() / r.len() as f64).sqrt())
    }

    fn result(&self, p: &[f64], misfit: f64, iterations: usize) -> Result<ReconstructionResult> {
        let (sigma, bc) = self.unpack(p)?;
        let data_rms = self.data_rms(p)?;
        let status = if data_rms <= self.options.rms_threshold {
            ReconstructionStatus::Converged
        } else {
            ReconstructionStatus::NotConverged
        };
        Ok(ReconstructionResult {
            sigma_hat: sigma,
            h1_hat: bc.right.finite().unwrap_or(f64::NAN),
            left_hat: bc.left,
            gauge_note: "σ̂ has zero mean; (σ̂ + c, H − c, h + c) yields the same data for every real c".into(),
            misfit,
            data_rms,
            iterations,
            status,
        })
    }
}

/// Fits σ on `cells` uniform cells, and h (plus H when finite), to the spectral data.
pub fn reconstruct_sigma(data: &SpectralData, cells: usize, reg_weight: f64) -> Result<ReconstructionResult> {
    reconstruct_with(data, ReconstructionOptions::new(cells, reg_weight))
}

pub fn reconstruct_with(data: &SpectralData, options: ReconstructionOptions) -> Result<ReconstructionResult> {
    let problem = ReconstructionProblem::new(data, options)?;
    let mut p = problem.initial_parameters();
    let mut r = DVector::from_vec(problem.residuals(&p)?);
    let mut cost = r.norm_squared();
    let mut damping: Option<f64> = None;
    let mut growth = 2.0;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        iterations += 1;
        let j = problem.jacobian(&p)?;
        let jt = j.transpose();
        let a = &jt * &j;
        let g = &jt * &r;
        if g.amax() <= 1e-15 * cost.max(1e-300).sqrt() || cost < 1e-28 {
            break;
        }
        let diag_max = a.diagonal().amax();
        let mu = *damping.get_or_insert(1e-3 * diag_max);

        let mut accepted = false;
        let mut small_step = false;
        let mut mu_now = mu;
        for _ in 0..40 {
            let mut lhs = a.clone();
            for i in 0..lhs.nrows() {
                lhs[(i, i)] += mu_now * a[(i, i)].max(1e-12 * diag_max);
            }
            let Some(delta) = lhs.cholesky().map(|c| c.solve(&(-&g))) else {
                mu_now *= growth;
                growth *= 2.0;
                continue;
            };
            let pnorm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            if delta.norm() <= 1e-12 * (pnorm + 1e-12) {
                small_step = true;
                break;
            }
            let trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(x, d)| x + d).collect();
            let trial_r = problem.residuals(&trial).ok().map(DVector::from_vec);
            let trial_cost = trial_r.as_ref().map_or(f64::INFINITY, |t| t.norm_squared());
            let predicted = -(2.0 * g.dot(&delta) + (&j * &delta).norm_squared());
            if trial_cost < cost {
                let rho = (cost - trial_cost) / predicted.max(f64::MIN_POSITIVE);
                mu_now *= (1.0f64 / 3.0).max(1.0 - (2.0 * rho - 1.0).powi(3));
                growth = 2.0;
                p = trial;
                r = trial_r.unwrap();
                let rel = (cost - trial_cost) / cost;
                cost = trial_cost;
                accepted = true;
                small_step = rel < 1e-14;
                break;
            }
            mu_now *= growth;
            growth *= 2.0;
        }
        damping = Some(mu_now);
        if small_step {
            break;
        }
        if !accepted {
            let best = problem.result(&p, cost, iterations)?;
            if best.status == ReconstructionStatus::Converged {
                return Ok(best);
            }
            return Err(Error::Stagnation {
                iterations,
                misfit: cost,
                best: Box::new(best),
            });
        }
    }
    problem.result(&p, cost, iterations)
}

/// Pass/fail limits for [`roundtrip_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundtripThresholds {
    pub alpha_relative: f64,
    pub gap_absolute: f64,
    pub sigma_l2: f64,
    pub mu_relative: f64,
}

impl Default for RoundtripThresholds {
    fn default() -> Self {
        Self {
            alpha_relative: 1e-3,
            gap_absolute: 5e-2,
            sigma_l2: 5e-2,
            mu_relative: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaRow {
    pub n: usize,
    pub two_spectra: f64,
    pub quadrature: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundtripReport {
    pub regime: RegimePair,
    pub count: usize,
    pub cells: usize,
    pub verdict: Verdict,
    pub validation_reasons: Vec<String>,
    pub alpha_table: Vec<AlphaRow>,
    /// max relative α error over n ≤ N/2; products lose accuracy near the truncation.
    pub alpha_max_relative_error: f64,
    /// (h₁ − h₂) estimate and its error; absent in Dirichlet regimes.
    pub gap_estimate: Option<f64>,
    pub gap_error: Option<f64>,
    pub reconstruction: ReconstructionResult,
    /// ‖σ̂ − (σ − mean σ)‖ in L₂.
    pub sigma_l2_error: f64,
    /// |ĥ₁ − (h₁ − mean σ)|.
    pub h1_error: f64,
    /// max relative error of the re-solved second spectrum over n ≤ N/2.
    pub mu_resolved_max_relative_error: f64,
    pub thresholds: RoundtripThresholds,
    pub all_within_thresholds: bool,
}

/// Generates both spectra, validates, reduces, reconstructs and re-solves the second spectrum.
pub fn roundtrip_report(
    sigma: &PiecewiseSigma,
    left: BoundaryValue,
    h1: BoundaryValue,
    h2: BoundaryValue,
    count: usize,
    cells: usize,
    reg_weight: f64,
) -> Result<RoundtripReport> {
    let regime = RegimePair::classify(left, h1, h2)?;
    let bc1 = BoundaryData { left, right: h1 };
    let bc2 = BoundaryData { left, right: h2 };
    let lams = compute_spectrum(sigma, bc1, count)?;
    let mus = compute_spectrum(sigma, bc2, count)?;
    let validation = validate_pair(&lams, &mus, regime)?;
    let mut data = norming_from_two_spectra(&lams, &mus, regime)?;
    data.left = left;
    let direct = norming_constants(sigma, bc1, &lams)?;

    let alpha_table: Vec<AlphaRow> = data
        .norming_constants
        .iter()
        .zip(&direct.norming_constants)
        .enumerate()
        .map(|(i, (&a, &q))| AlphaRow {
            n: i + 1,
            two_spectra: a,
            quadrature: q,
            relative_error: (a - q).abs() / q,
        })
        .collect();
    let alpha_max_relative_error = alpha_table
        .iter()
        .take(count / 2)
        .map(|r| r.relative_error)
        .fold(0.0, f64::max);

    let gap_estimate = validation.hgap_estimate;
    let gap_error = match (gap_estimate, h1.finite(), h2.finite()) {
        (Some(g), Some(a), Some(b)) => Some((g - (a - b)).abs()),
        _ => None,
    };

    let reconstruction = reconstruct_sigma(&data, cells, reg_weight)?;
    let mean = sigma.mean();
    let sigma_l2_error = reconstruction.sigma_hat.l2_distance(&sigma.shifted(-mean));
    let h1_error = (reconstruction.h1_hat - (h1.finite().unwrap_or(f64::NAN) - mean)).abs();

    let h2_hat = match gap_estimate {
        Some(g) if regime.has_finite_gap() => BoundaryValue::Finite(reconstruction.h1_hat - g),
        _ => BoundaryValue::Infinite,
    };
    let resolved = eigenvalues_unchecked(
        &reconstruction.sigma_hat,
        BoundaryData {
            left: reconstruction.left_hat,
            right: h2_hat,
        },
        count,
    )?;
    let mu_resolved_max_relative_error = resolved
        .iter()
        .zip(mus.eigenvalues())
        .take(count / 2)
        .map(|(a, b)| (a - b).abs() / b.abs())
        .fold(0.0, f64::max);

    let thresholds = RoundtripThresholds::default();
    let all_within_thresholds = validation.accepted()
        && alpha_max_relative_error <= thresholds.alpha_relative
        && gap_error.is_none_or(|e| e <= thresholds.gap_absolute)
        && sigma_l2_error <= thresholds.sigma_l2
        && mu_resolved_max_relative_error <= thresholds.mu_relative;

    Ok(RoundtripReport {
        regime,
        count,
        cells,
        verdict: validation.verdict,
        validation_reasons: validation.reasons,
        alpha_table,
        alpha_max_relative_error,
        gap_estimate,
        gap_error,
        reconstruction,
        sigma_l2_error,
        h1_error,
        mu_resolved_max_relative_error,
        thresholds,
        all_within_thresholds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::Spectrum;
    use std::f64::consts::PI;

    #[test]
    fn zero_potential_is_a_fixed_point() {
        let roots: Vec<f64> = (1..=40).map(|n| PI * (n as f64 - 0.5)).collect();
        let sp = Spectrum::from_roots(&roots, AsymptoticClass::HalfIntegerCos).unwrap();
        let data = SpectralData::new(sp, vec![1.0; 40], BoundaryValue::Infinite).unwrap();
        let res = reconstruct_sigma(&data, 8, 0.0).unwrap();
        assert!(res.sigma_hat.l2_norm() < 1e-3);
        assert!(res.h1_hat.abs() < 1e-3);
        assert_eq!(res.status, ReconstructionStatus::Converged);
        assert!(res.sigma_hat.mean().abs() < 1e-15);
    }

    #[test]
    fn too_many_cells_is_rejected() {
        let roots: Vec<f64> = (1..=10).map(|n| PI * (n as f64 - 0.5)).collect();
        let sp = Spectrum::from_roots(&roots, AsymptoticClass::HalfIntegerCos).unwrap();
        let data = SpectralData::new(sp, vec![1.0; 10], BoundaryValue::Infinite).unwrap();
        assert!(matches!(reconstruct_sigma(&data, 6, 0.0), Err(Error::MalformedInput(_))));
    }
}
