//! Two-spectra reduction: validation of a candidate pair and extraction of norming constants.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{BoundaryData, BoundaryValue};
use crate::error::{Error, Result};
use crate::products::{product_derivative_z, product_eval_z, ZeroSequence, MIN_DERIVATIVE_ZEROS};
use crate::spectrum::{AsymptoticClass, SpectralData, Spectrum};

/// Smallest sequence length accepted by the validators.
pub const MIN_PAIR_LENGTH: usize = 20;
/// Absolute slack of the ℓ₂ flattening test.
pub const FLATTENING_ABS: f64 = 1e-3;
/// Relative growth allowed for the second half of the partial sums.
pub const FLATTENING_REL: f64 = 0.25;

/// Boundary regime of a pair (λ_n², μ_n²): the two spectra share σ and H and differ in h.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimePair {
    /// H = ∞; h₁, h₂ finite.
    ThirdThird,
    /// H = ∞; h₁ finite, h₂ = ∞.
    ThirdDirichlet,
    /// H finite (0 in the canonical gauge); h₁, h₂ finite.
    NeumannThird,
    /// H finite; h₁ finite, h₂ = ∞.
    NeumannDirichlet,
}

impl RegimePair {
    pub const ALL: [RegimePair; 4] = [
        RegimePair::ThirdThird,
        RegimePair::ThirdDirichlet,
        RegimePair::NeumannThird,
        RegimePair::NeumannDirichlet,
    ];

    pub fn lambda_class(self) -> AsymptoticClass {
        match self {
            RegimePair::ThirdThird | RegimePair::ThirdDirichlet => AsymptoticClass::HalfIntegerCos,
            RegimePair::NeumannThird | RegimePair::NeumannDirichlet => AsymptoticClass::IntegerCos,
        }
    }

    pub fn mu_class(self) -> AsymptoticClass {
        match self {
            RegimePair::ThirdThird => AsymptoticClass::HalfIntegerCos,
            RegimePair::ThirdDirichlet => AsymptoticClass::IntegerSin,
            RegimePair::NeumannThird => AsymptoticClass::IntegerCos,
            RegimePair::NeumannDirichlet => AsymptoticClass::HalfIntegerSin,
        }
    }

    /// Whether both h are finite, so that λ_n² − μ_n² has a finite limit.
    pub fn has_finite_gap(self) -> bool {
        matches!(self, RegimePair::ThirdThird | RegimePair::NeumannThird)
    }

    /// The boundary parameter at x = 0 in the canonical gauge.
    pub fn left(self) -> BoundaryValue {
        match self {
            RegimePair::ThirdThird | RegimePair::ThirdDirichlet => BoundaryValue::Infinite,
            RegimePair::NeumannThird | RegimePair::NeumannDirichlet => BoundaryValue::Finite(0.0),
        }
    }

    /// Regime realized by left parameter `left` and right parameters (h₁, h₂).
    pub fn classify(left: BoundaryValue, h1: BoundaryValue, h2: BoundaryValue) -> Result<Self> {
        if h1.is_infinite() {
            return Err(Error::UnsupportedBoundary(
                "the first spectrum must have a finite h₁ (swap the spectra)".into(),
            ));
        }
        Ok(match (left.is_infinite(), h2.is_infinite()) {
            (true, false) => RegimePair::ThirdThird,
            (true, true) => RegimePair::ThirdDirichlet,
            (false, false) => RegimePair::NeumannThird,
            (false, true) => RegimePair::NeumannDirichlet,
        })
    }

    /// λ_1 < μ_1 < λ_2 < … is required; otherwise the order is read from the data.
    fn fixed_order(self) -> bool {
        !self.has_finite_gap()
    }

    pub fn kebab_name(self) -> &'static str {
        match self {
            RegimePair::ThirdThird => "third-third",
            RegimePair::ThirdDirichlet => "third-dirichlet",
            RegimePair::NeumannThird => "neumann-third",
            RegimePair::NeumannDirichlet => "neumann-dirichlet",
        }
    }
}

impl fmt::Display for RegimePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kebab_name())
    }
}

impl FromStr for RegimePair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        RegimePair::ALL
            .into_iter()
            .find(|r| r.kebab_name().replace('-', "") == key)
            .ok_or_else(|| {
                Error::MalformedInput(format!(
                    "unknown regime {s:?}; expected one of third-third, third-dirichlet, neumann-third, neumann-dirichlet"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Accept,
    Reject,
}

/// Partial sums S_m = Σ_{n ≤ m} r_n² and the flattening verdict on them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatteningCheck {
    pub partial_sums: Vec<f64>,
    pub ok: bool,
}

impl FlatteningCheck {
    /// Passes when S_N − S_{N/2} < 0.25·S_{N/2} + 1e−3.
    pub fn new(residuals: &[f64]) -> Self {
        let partial_sums: Vec<f64> = residuals
            .iter()
            .scan(0.0, |acc, r| {
                *acc += r * r;
                Some(*acc)
            })
            .collect();
        let ok = match partial_sums.last() {
            None => true,
            Some(&total) => {
                let half = partial_sums[(partial_sums.len() / 2).max(1) - 1];
                total.is_finite() && total - half < FLATTENING_REL * half + FLATTENING_ABS
            }
        };
        Self { partial_sums, ok }
    }
}

/// Outcome of the three conditions on a candidate pair.
///
/// Condition 1 is strict interlacing, condition 2 boundedness of the residuals
/// against the regime heads, condition 3 (finite-h regimes only) the 1/n law
/// for λ_n − μ_n with a finite limit of λ_n² − μ_n².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub regime: RegimePair,
    pub length: usize,
    pub interlacing_ok: bool,
    /// Index n of the first pair breaking the alternation.
    pub interlacing_first_violation: Option<usize>,
    /// True when the merged sequence starts with λ_1.
    pub lambda_first: bool,
    pub lambda_residuals: FlatteningCheck,
    pub mu_residuals: FlatteningCheck,
    pub asymptotic_ok: bool,
    /// (h₁ − h₂) estimate; absent when not applicable or divergent.
    pub hgap_estimate: Option<f64>,
    /// Condition-3 residuals n(λ_n − μ_n) − h/π; absent when not applicable.
    pub hgap_residuals: Option<FlatteningCheck>,
    pub hgap_residual_ok: Option<bool>,
    pub verdict: Verdict,
    /// Number (1, 2 or 3) of the first failing condition.
    pub first_failure: Option<u8>,
    pub reasons: Vec<String>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accept
    }
}

fn check_lengths(lams: &Spectrum, mus: &Spectrum) -> Result<usize> {
    if lams.len() != mus.len() {
        return Err(Error::MalformedInput(format!(
            "sequence lengths differ: {} λ values, {} μ values",
            lams.len(),
            mus.len()
        )));
    }
    if lams.len() < MIN_PAIR_LENGTH {
        return Err(Error::MalformedInput(format!(
            "need at least {MIN_PAIR_LENGTH} eigenvalues per sequence, got {}",
            lams.len()
        )));
    }
    Ok(lams.len())
}

/// First index n at which the alternation of (a_n) before (b_n) breaks.
fn first_alternation_break(a: &[f64], b: &[f64]) -> Option<usize> {
    (0..a.len()).find_map(|i| {
        let ok = a[i] < b[i] && (i + 1 >= a.len() || b[i] < a[i + 1]);
        (!ok).then_some(i + 1)
    })
}

/// Checks strict interlacing, residual boundedness and the gap law for a candidate pair.
pub fn validate_pair(lams: &Spectrum, mus: &Spectrum, regime: RegimePair) -> Result<ValidationReport> {
    let n = check_lengths(lams, mus)?;
    let (l, m) = (lams.eigenvalues(), mus.eigenvalues());
    let mut reasons = Vec::new();
    let mut notes = Vec::new();
    let mut first_failure: Option<u8> = None;
    let mut fail = |cond: u8, why: String, reasons: &mut Vec<String>| {
        first_failure.get_or_insert(cond);
        reasons.push(format!("condition ({cond}): {why}"));
    };

    if lams.regime() != regime.lambda_class() || mus.regime() != regime.mu_class() {
        notes.push(format!(
            "sequence tags ({}, {}) differ from the regime classes ({}, {}); the regime wins",
            lams.regime().name(),
            mus.regime().name(),
            regime.lambda_class().name(),
            regime.mu_class().name()
        ));
    }

    // (1) interlacing.
    let lambda_first = regime.fixed_order() || l[0] < m[0];
    let violation = if lambda_first {
        first_alternation_break(l, m)
    } else {
        first_alternation_break(m, l)
    };
    if let Some(i) = violation {
        let order = if lambda_first { "λ₁² < μ₁² < λ₂² < …" } else { "μ₁² < λ₁² < μ₂² < …" };
        fail(
            1,
            format!("spectra do not interlace as {order}; first violation at n = {i} (λ² = {}, μ² = {})", l[i - 1], m[i - 1]),
            &mut reasons,
        );
    }

    // (2) residuals against the heads.
    let residuals = |sp: &Spectrum, class: AsymptoticClass| -> Vec<f64> {
        sp.roots().iter().enumerate().map(|(i, r)| r - class.head(i + 1)).collect()
    };
    let lambda_residuals = FlatteningCheck::new(&residuals(lams, regime.lambda_class()));
    let mu_residuals = FlatteningCheck::new(&residuals(mus, regime.mu_class()));
    for (name, check, class) in [
        ("λ", &lambda_residuals, regime.lambda_class()),
        ("μ", &mu_residuals, regime.mu_class()),
    ] {
        if !check.ok {
            fail(
                2,
                format!(
                    "{name}_n − head(n) is not square-summable against the {} heads (partial sums {:.4e} at N/2, {:.4e} at N)",
                    class.name(),
                    check.partial_sums[n / 2 - 1],
                    check.partial_sums[n - 1]
                ),
                &mut reasons,
            );
        }
    }
    let asymptotic_ok = lambda_residuals.ok && mu_residuals.ok;

    // (3) gap law.
    let (mut hgap_estimate, mut hgap_residuals, mut hgap_residual_ok) = (None, None, None);
    if regime.has_finite_gap() {
        match estimate_h_gap(lams, mus) {
            Ok(gap) => {
                hgap_estimate = Some(gap);
                let (lr, mr) = (lams.roots(), mus.roots());
                let nu: Vec<f64> = (0..n)
                    .map(|i| (i + 1) as f64 * (lr[i] - mr[i]) - gap / std::f64::consts::PI)
                    .collect();
                let check = FlatteningCheck::new(&nu);
                if !check.ok {
                    fail(
                        3,
                        format!(
                            "n(λ_n − μ_n) − h/π is not square-summable with h = {gap:.6} (partial sums {:.4e} at N/2, {:.4e} at N)",
                            check.partial_sums[n / 2 - 1],
                            check.partial_sums[n - 1]
                        ),
                        &mut reasons,
                    );
                }
                hgap_residual_ok = Some(check.ok);
                hgap_residuals = Some(check);
            }
            Err(Error::NoFiniteGap { slope }) => {
                hgap_residual_ok = Some(false);
                fail(
                    3,
                    format!("λ_n² − μ_n² has no finite limit (tail slope {slope:.4e} per index)"),
                    &mut reasons,
                );
            }
            Err(e) => return Err(e),
        }
    }
    if n < MIN_DERIVATIVE_ZEROS {
        notes.push(format!(
            "only {n} eigenvalues per sequence; norming constants need at least {MIN_DERIVATIVE_ZEROS} for reliable products"
        ));
    }

    let verdict = if first_failure.is_none() { Verdict::Accept } else { Verdict::Reject };
    Ok(ValidationReport {
        regime,
        length: n,
        interlacing_ok: violation.is_none(),
        interlacing_first_violation: violation,
        lambda_first,
        lambda_residuals,
        mu_residuals,
        asymptotic_ok,
        hgap_estimate,
        hgap_residuals,
        hgap_residual_ok,
        verdict,
        first_failure,
        reasons,
        notes,
    })
}

/// (h₁ − h₂) = ½ lim (λ_n² − μ_n²), from a weighted fit a + b/n on the last half.
///
/// Weights n² favour the most asymptotic terms and a sin² taper across the
/// window suppresses oscillating remainders such as (−1)ⁿ/n; the 1/n term
/// absorbs the leading correction. A straight-line fit over the last third
/// decides whether the differences settle at all.
pub fn estimate_h_gap(lams: &Spectrum, mus: &Spectrum) -> Result<f64> {
    let n = check_lengths(lams, mus)?;
    let start = n - n.div_ceil(3);
    let pts: Vec<(f64, f64, f64)> = (start..n)
        .map(|i| {
            let k = (i + 1) as f64;
            (k, lams.eigenvalues()[i] - mus.eigenvalues()[i], k * k)
        })
        .collect();

    let (a_lin, slope) = weighted_line(pts.iter().map(|&(k, y, w)| (k, y, w)));
    let span = pts.last().unwrap().0 - pts[0].0;
    if !(slope.abs() * span <= 0.5 + 0.1 * a_lin.abs()) {
        return Err(Error::NoFiniteGap { slope });
    }
    // Fit over the last half with a sin² taper so oscillating remainders average out.
    let start = n / 2;
    let len = (n - start) as f64;
    let (a, _) = weighted_line((start..n).map(|i| {
        let k = (i + 1) as f64;
        let taper = (PI * ((i - start) as f64 + 0.5) / len).sin().powi(2);
        (1.0 / k, lams.eigenvalues()[i] - mus.eigenvalues()[i], k * k * taper)
    }));
    Ok(0.5 * a)
}

/// Weighted least squares y ≈ a + b x; returns (a, b).
fn weighted_line(points: impl Iterator<Item = (f64, f64, f64)>) -> (f64, f64) {
    let pts: Vec<_> = points.collect();
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return (my, 0.0);
    }
    let b = sxy / sxx;
    (my - b * mx, b)
}

fn norming_constant(
    regime: RegimePair,
    phi1: &ZeroSequence,
    phi2: &ZeroSequence,
    gap: f64,
    n: usize,
    s: f64,
) -> Result<f64> {
    let d1 = product_derivative_z(phi1, n)?;
    let v2 = product_eval_z(phi2, s);
    Ok(match regime {
        RegimePair::ThirdThird | RegimePair::NeumannThird => 2.0 * gap * d1 / v2,
        // Ψ₂ = λ P₂ is the Dirichlet–Dirichlet function.
        RegimePair::ThirdDirichlet => -2.0 * d1 / v2,
        RegimePair::NeumannDirichlet => 2.0 * d1 / v2,
    })
}

/// Norming constants of the first spectrum from the pair; the pair is validated first.
pub fn norming_from_two_spectra(lams: &Spectrum, mus: &Spectrum, regime: RegimePair) -> Result<SpectralData> {
    let report = validate_pair(lams, mus, regime)?;
    if !report.accepted() {
        return Err(Error::Rejected(Box::new(report)));
    }
    let lams = Spectrum::new(lams.eigenvalues().to_vec(), regime.lambda_class())?;
    let mus = Spectrum::new(mus.eigenvalues().to_vec(), regime.mu_class())?;
    let phi1 = ZeroSequence::from_spectrum(&lams)?;
    let phi2 = ZeroSequence::from_spectrum(&mus)?;
    let gap = report.hgap_estimate.unwrap_or(0.0);

    let alphas: Vec<f64> = lams
        .eigenvalues()
        .par_iter()
        .enumerate()
        .map(|(i, &s)| norming_constant(regime, &phi1, &phi2, gap, i + 1, s))
        .collect::<Result<_>>()?;
    let data = SpectralData::new(lams, alphas, regime.left())?;
    let excess: Vec<f64> = data.norming_constants.iter().map(|a| a - 1.0).collect();
    let check = FlatteningCheck::new(&excess);
    if !check.ok {
        let k = check.partial_sums.len();
        return Err(Error::AsymptoticsViolation(format!(
            "Σ(α_n − 1)² grows from {:.4e} at N/2 to {:.4e} at N",
            check.partial_sums[k / 2 - 1],
            check.partial_sums[k - 1]
        )));
    }
    Ok(data)
}

/// Boundary data (H, h₁) of the first spectrum, h₁ given in the canonical gauge.
pub fn first_boundary(regime: RegimePair, h1: f64) -> BoundaryData {
    BoundaryData::new(regime.left(), h1)
}

#[cfg(test)]
mod tests {
    use super::*;
    fn heads(class: AsymptoticClass, n: usize) -> Spectrum {
        Spectrum::from_roots(&(1..=n).map(|k| class.head(k)).collect::<Vec<_>>(), class).unwrap()
    }

    #[test]
    fn regime_names_round_trip() {
        for r in RegimePair::ALL {
            assert_eq!(r.kebab_name().parse::<RegimePair>().unwrap(), r);
            assert_eq!(format!("{r:?}").parse::<RegimePair>().unwrap(), r);
        }
        assert!("third".parse::<RegimePair>().is_err());
    }

    #[test]
    fn flattening_examples() {
        let decaying: Vec<f64> = (1..=100).map(|n| 1.0 / n as f64).collect();
        assert!(FlatteningCheck::new(&decaying).ok);
        assert!(!FlatteningCheck::new(&vec![0.5; 100]).ok);
        assert!(FlatteningCheck::new(&vec![0.0; 40]).ok);
    }

    #[test]
    fn synthetic_gap() {
        let mus = heads(AsymptoticClass::HalfIntegerCos, 60);
        let lams = Spectrum::new(mus.eigenvalues().iter().map(|s| s - 2.0).collect(), AsymptoticClass::HalfIntegerCos).unwrap();
        assert!((estimate_h_gap(&lams, &mus).unwrap() + 1.0).abs() < 1e-12);
        let shifted: Vec<f64> = mus.roots().iter().map(|r| r + 0.5).collect();
        let shifted = Spectrum::from_roots(&shifted, AsymptoticClass::HalfIntegerCos).unwrap();
        assert!(matches!(estimate_h_gap(&shifted, &mus), Err(Error::NoFiniteGap { .. })));
    }

    #[test]
    fn zero_potential_third_dirichlet_pair() {
        let lams = heads(AsymptoticClass::HalfIntegerCos, 50);
        let mus = heads(AsymptoticClass::IntegerSin, 50);
        let report = validate_pair(&lams, &mus, RegimePair::ThirdDirichlet).unwrap();
        assert!(report.accepted(), "{:?}", report.reasons);
        let data = norming_from_two_spectra(&lams, &mus, RegimePair::ThirdDirichlet).unwrap();
        assert!(data.norming_constants.iter().all(|a| (a - 1.0).abs() < 1e-12));
    }

    #[test]
    fn wrong_order_is_caught() {
        let lams = heads(AsymptoticClass::HalfIntegerCos, 30);
        let mus = heads(AsymptoticClass::IntegerSin, 30);
        let report = validate_pair(&mus, &lams, RegimePair::ThirdDirichlet).unwrap();
        assert_eq!(report.first_failure, Some(1));
        assert_eq!(report.interlacing_first_violation, Some(1));
    }

    #[test]
    fn constant_offset_is_rejected() {
        let lams = heads(AsymptoticClass::HalfIntegerCos, 50);
        let mus: Vec<f64> = lams.roots().iter().map(|r| r + 0.5).collect();
        let mus = Spectrum::from_roots(&mus, AsymptoticClass::HalfIntegerCos).unwrap();
        let report = validate_pair(&lams, &mus, RegimePair::ThirdThird).unwrap();
        assert_eq!(report.verdict, Verdict::Reject);
        assert!(report.interlacing_ok);
        assert_eq!(report.first_failure, Some(2));
        assert_eq!(report.hgap_residual_ok, Some(false));
        assert!(matches!(
            norming_from_two_spectra(&lams, &mus, RegimePair::ThirdThird),
            Err(Error::Rejected(_))
        ));
    }

    #[test]
    fn bad_inputs() {
        let a = heads(AsymptoticClass::HalfIntegerCos, 30);
        let b = heads(AsymptoticClass::IntegerSin, 25);
        assert!(matches!(validate_pair(&a, &b, RegimePair::ThirdDirichlet), Err(Error::MalformedInput(_))));
        let short = heads(AsymptoticClass::IntegerSin, 10);
        assert!(validate_pair(&short, &short, RegimePair::ThirdThird).is_err());
    }
}
