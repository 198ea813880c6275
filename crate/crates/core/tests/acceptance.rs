//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slspec::riesz::{condition_number, half_integer_spectrum};
use slspec::{
    compute_spectrum, estimate_h_gap, fourier_diff, gauge_transform, gram_matrix, norming_constants,
    norming_from_two_spectra, product_eval, resolvent_trace_ratio, roundtrip_report, validate_pair, AsymptoticClass,
    BoundaryData, BoundaryValue, FrequencySystem, PiecewiseSigma, Profile, RegimePair, Spectrum, TailModel,
    ZeroSequence,
};

const INF: BoundaryValue = BoundaryValue::Infinite;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| rel(*x, *y)).fold(0.0, f64::max)
}

fn step() -> PiecewiseSigma {
    PiecewiseSigma::step(0.5, 1.0).unwrap()
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn zero_potential() -> Outcome {
    let t = Instant::now();
    let z = PiecewiseSigma::zero();
    let robin = compute_spectrum(&z, BoundaryData::new(INF, 0.0), 50).unwrap();
    let dirichlet = compute_spectrum(&z, BoundaryData::new(INF, INF), 50).unwrap();
    let e1 = max_rel(robin.eigenvalues(), &(1..=50).map(|n| (PI * (n as f64 - 0.5)).powi(2)).collect::<Vec<_>>());
    let e2 = max_rel(dirichlet.eigenvalues(), &(1..=50).map(|n| (PI * n as f64).powi(2)).collect::<Vec<_>>());
    let el = t.elapsed();
    outcome(
        e1 <= 1e-10 && e2 <= 1e-10 && within(el, 5),
        format!("max rel error h=0 {e1:.2e}, h=inf {e2:.2e}, {el:.2?}"),
    )
}

fn dirac_delta() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for (h, right) in [(Some(0.0), BoundaryValue::Finite(0.0)), (None, INF)] {
        let sp = compute_spectrum(&step(), BoundaryData::new(INF, right), 20).unwrap();
        let oracle = common::step_spectrum(0.5, 1.0, h, 20);
        worst = worst.max(max_rel(sp.eigenvalues(), &oracle));
    }
    let el = t.elapsed();
    outcome(worst <= 1e-9 && within(el, 10), format!("max rel error {worst:.2e}, {el:.2?}"))
}

fn random_sigma(rng: &mut ChaCha8Rng) -> PiecewiseSigma {
    let cells = rng.random_range(2..=6);
    let mut inner: Vec<f64> = (0..cells - 1).map(|_| rng.random_range(0.05..0.95)).collect();
    inner.sort_by(f64::total_cmp);
    let mut bps = vec![0.0];
    bps.extend(inner);
    bps.push(1.0);
    let values = (0..cells).map(|_| rng.random_range(-1.5..1.5)).collect();
    PiecewiseSigma::new(bps, values).unwrap()
}

fn interlacing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    let mut violations = 0;
    let mut details = Vec::new();
    for _ in 0..5 {
        let sigma = random_sigma(&mut rng);
        let end = *sigma.values().last().unwrap();
        let h1 = end + rng.random_range(0.0..3.0);
        let h2 = loop {
            let h = end + rng.random_range(0.0..3.0);
            if (h - h1).abs() > 0.1 {
                break h;
            }
        };
        let a = compute_spectrum(&sigma, BoundaryData::new(INF, h1), 40).unwrap();
        let b = compute_spectrum(&sigma, BoundaryData::new(INF, h2), 40).unwrap();
        let mut merged: Vec<(f64, u8)> = a
            .eigenvalues()
            .iter()
            .map(|&s| (s, 0))
            .chain(b.eigenvalues().iter().map(|&s| (s, 1)))
            .collect();
        merged.sort_by(|x, y| x.0.total_cmp(&y.0));
        let v = merged.windows(2).filter(|w| w[0].1 == w[1].1 || w[0].0 == w[1].0).count();
        violations += v;
        details.push(format!("{}c:{v}", sigma.cell_count()));
    }
    outcome(violations == 0, format!("violations {violations} ({})", details.join(", ")))
}

fn gauge_invariance() -> Outcome {
    let sigma = PiecewiseSigma::new(vec![0.0, 0.3, 0.7, 1.0], vec![0.8, -0.6, 1.2]).unwrap();
    let mut worst: f64 = 0.0;
    for bc in [BoundaryData::new(INF, 2.0), BoundaryData::new(0.5, 2.0)] {
        let base = compute_spectrum(&sigma, bc, 30).unwrap();
        for c in [-2.0, 1.0, 3.0] {
            let (s2, bc2) = gauge_transform(&sigma, bc, c);
            let sp = compute_spectrum(&s2, bc2, 30).unwrap();
            worst = worst.max(max_rel(sp.eigenvalues(), base.eigenvalues()));
        }
    }
    outcome(worst <= 1e-8, format!("max rel deviation {worst:.2e} over 2 boundary sets x 3 shifts"))
}

fn two_spectra_alphas() -> Outcome {
    let t = Instant::now();
    let sigma = step();
    let bc1 = BoundaryData::new(INF, 0.0);
    let lams = compute_spectrum(&sigma, bc1, 200).unwrap();
    let direct = norming_constants(&sigma, bc1, &lams).unwrap();
    let mut errs = Vec::new();
    for (regime, h2) in [(RegimePair::ThirdThird, BoundaryValue::Finite(2.0)), (RegimePair::ThirdDirichlet, INF)] {
        let mus = compute_spectrum(&sigma, BoundaryData::new(INF, h2), 200).unwrap();
        let data = norming_from_two_spectra(&lams, &mus, regime).unwrap();
        errs.push(max_rel(&data.norming_constants[..30], &direct.norming_constants[..30]));
    }
    let el = t.elapsed();
    outcome(
        errs.iter().all(|&e| e <= 1e-4) && within(el, 120),
        format!("max rel error n<=30: third-third {:.2e}, third-dirichlet {:.2e}, {el:.2?}", errs[0], errs[1]),
    )
}

fn h_gap() -> Outcome {
    let potentials = [
        (step(), 0.0, 2.0),
        (PiecewiseSigma::new(vec![0.0, 0.25, 0.6, 1.0], vec![-1.0, 2.0, 0.5]).unwrap(), 2.5, 1.0),
        (PiecewiseSigma::uniform((0..8).map(|i| (i as f64 * 0.8).sin()).collect()).unwrap(), 3.0, 1.5),
    ];
    let mut errs = Vec::new();
    for (sigma, h1, h2) in &potentials {
        let l = compute_spectrum(sigma, BoundaryData::new(INF, *h1), 100).unwrap();
        let m = compute_spectrum(sigma, BoundaryData::new(INF, *h2), 100).unwrap();
        errs.push((estimate_h_gap(&l, &m).unwrap() - (h1 - h2)).abs());
    }
    let worst = errs.iter().copied().fold(0.0, f64::max);
    outcome(worst <= 5e-2, format!("errors {:.2e}, {:.2e}, {:.2e}", errs[0], errs[1], errs[2]))
}

fn product_synthesis() -> Outcome {
    let cos_zeros =
        ZeroSequence::new((1..=50).map(|k| PI * (k as f64 - 0.5)).collect(), AsymptoticClass::HalfIntegerCos).unwrap();
    let sin_zeros = ZeroSequence::new((1..=50).map(|k| PI * k as f64).collect(), AsymptoticClass::IntegerSin).unwrap();
    let (mut ec, mut es): (f64, f64) = (0.0, 0.0);
    for i in 0..=1000 {
        let l = i as f64 * 0.01;
        ec = ec.max((product_eval(&cos_zeros, l) - l.cos()).abs());
        es = es.max((product_eval(&sin_zeros, l) - l.sin()).abs());
    }
    outcome(ec <= 1e-8 && es <= 1e-8, format!("max abs error cos {ec:.2e}, sin {es:.2e}"))
}

fn resolvent_identity() -> Outcome {
    let potentials = [step(), PiecewiseSigma::new(vec![0.0, 0.4, 1.0], vec![1.5, -0.5]).unwrap()];
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for sigma in &potentials {
        let bc = BoundaryData::new(INF, 1.0);
        let sp = compute_spectrum(sigma, bc, 2000).unwrap();
        let data = norming_constants(sigma, bc, &sp).unwrap();
        let e = sp.eigenvalues();
        for s in [-3.0, 0.5 * (e[0] + e[1]), 0.5 * (e[4] + e[5])] {
            let (lhs, rhs) = resolvent_trace_ratio(sigma, bc, s, &data, TailModel::Asymptotic).unwrap();
            worst = worst.max(rel(lhs, rhs));
            cases += 1;
        }
    }
    outcome(worst <= 1e-4, format!("max rel lhs/rhs mismatch {worst:.2e} over {cases} energies"))
}

fn reconstruction_roundtrip() -> Outcome {
    let t = Instant::now();
    let r = roundtrip_report(&step(), INF, 0.0.into(), 2.0.into(), 40, 16, 1e-8).unwrap();
    let el = t.elapsed();
    outcome(
        r.sigma_l2_error <= 5e-2 && r.mu_resolved_max_relative_error <= 1e-3 && within(el, 600),
        format!(
            "sigma L2 {:.2e}, second spectrum rel {:.2e} (n<=20), {el:.2?}",
            r.sigma_l2_error, r.mu_resolved_max_relative_error
        ),
    )
}

fn roots_spectrum(f: impl Fn(f64) -> f64, n: usize, class: AsymptoticClass) -> Spectrum {
    Spectrum::from_roots(&(1..=n).map(|k| f(k as f64)).collect::<Vec<_>>(), class).unwrap()
}

fn rejection_power() -> Outcome {
    use AsymptoticClass::*;
    let hc = |k: f64| PI * (k - 0.5);
    let ic = |k: f64| PI * (k - 1.0);
    let n = 100;
    // (name, λ, μ, regime, expected first failing condition)
    let pairs: Vec<(&str, Spectrum, Spectrum, RegimePair, u8)> = vec![
        (
            "swapped fifth pair",
            roots_spectrum(hc, n, HalfIntegerCos),
            roots_spectrum(|k| if k == 5.0 { hc(k) - 0.1 } else { PI * k }, n, IntegerSin),
            RegimePair::ThirdDirichlet,
            1,
        ),
        (
            "mu skips past lambda",
            roots_spectrum(hc, n, HalfIntegerCos),
            roots_spectrum(|k| if k >= 10.0 { hc(k + 1.0) + 0.1 } else { hc(k) + 0.3 / k }, n, HalfIntegerCos),
            RegimePair::ThirdThird,
            1,
        ),
        (
            "mu below lambda in Neumann-Dirichlet",
            roots_spectrum(|k| ic(k) + 0.3, n, IntegerCos),
            roots_spectrum(|k| if k == 7.0 { ic(k) + 0.1 } else { PI * (k - 0.5) }, n, HalfIntegerSin),
            RegimePair::NeumannDirichlet,
            1,
        ),
        (
            "quarter-shifted Dirichlet heads",
            roots_spectrum(hc, n, HalfIntegerCos),
            roots_spectrum(|k| PI * (k + 0.25), n, IntegerSin),
            RegimePair::ThirdDirichlet,
            2,
        ),
        (
            "constant offset of 0.5",
            roots_spectrum(hc, n, HalfIntegerCos),
            roots_spectrum(|k| hc(k) + 0.5, n, HalfIntegerCos),
            RegimePair::ThirdThird,
            2,
        ),
        (
            "half-integer data in a Neumann regime",
            roots_spectrum(hc, n, IntegerCos),
            roots_spectrum(|k| hc(k) + 0.3 / k, n, IntegerCos),
            RegimePair::NeumannThird,
            2,
        ),
        (
            "Neumann-Dirichlet mu on integer heads",
            roots_spectrum(|k| ic(k) + 0.1 / k, n, IntegerCos),
            roots_spectrum(|k| ic(k) + PI / 4.0, n, HalfIntegerSin),
            RegimePair::NeumannDirichlet,
            2,
        ),
        (
            "difference decaying like n^-1/2",
            roots_spectrum(hc, n, HalfIntegerCos),
            roots_spectrum(|k| hc(k) + 0.2 / k.sqrt(), n, HalfIntegerCos),
            RegimePair::ThirdThird,
            3,
        ),
        (
            "n^-1/2 difference on even indices",
            roots_spectrum(hc, n, HalfIntegerCos),
            roots_spectrum(|k| hc(k) + 0.3 / k + 0.1 * (1.0 + (-1f64).powf(k)) / k.sqrt(), n, HalfIntegerCos),
            RegimePair::ThirdThird,
            3,
        ),
        (
            "Neumann difference decaying like n^-0.55",
            roots_spectrum(|k| ic(k) + 0.2 / k, n, IntegerCos),
            roots_spectrum(|k| ic(k) + 0.2 / k + 0.25 / k.powf(0.55), n, IntegerCos),
            RegimePair::NeumannThird,
            3,
        ),
    ];
    let mut wrong = Vec::new();
    for (name, l, m, regime, expected) in &pairs {
        let report = validate_pair(l, m, *regime).unwrap();
        if report.accepted() || report.first_failure != Some(*expected) {
            wrong.push(format!("{name}: expected ({expected}), got {:?}", report.first_failure));
        }
    }
    let detail = if wrong.is_empty() {
        format!("{} of {} pairs rejected at the expected condition", pairs.len(), pairs.len())
    } else {
        wrong.join("; ")
    };
    outcome(wrong.is_empty(), detail)
}

fn riesz_diagnostics() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for label in ['a', 'b', 'c', 'd'] {
        let sys = FrequencySystem::family(label, 60, |_| 0.0).unwrap();
        let g = gram_matrix(&sys, 60).unwrap();
        let exact = (0..60).all(|j| {
            (0..60).all(|k| {
                let want = match (j == k, label == 'c' && j == 0) {
                    (false, _) => 0.0,
                    (true, true) => 1.0,
                    (true, false) => 0.5,
                };
                g[(j, k)] == want
            })
        });
        let perturbed = FrequencySystem::family(label, 60, |k| 0.2 / k.max(1) as f64).unwrap();
        let cond = condition_number(&gram_matrix(&perturbed, 60).unwrap());
        pass &= exact && cond < 10.0;
        notes.push(format!("{label}: exact {exact}, cond {cond:.3}"));
    }
    let lams = half_integer_spectrum(|_| 0.0, 80).unwrap();
    let mus = half_integer_spectrum(|n| 1.0 / n as f64, 80).unwrap();
    let d = fourier_diff(&Profile::identity(), &lams, &mus).unwrap();
    let constants: Vec<f64> = [20, 40, 80].iter().map(|&n| d.cubic_constant_over(1..=n)).collect();
    let stable = constants.iter().all(|c| c.is_finite() && *c < 1.0)
        && (constants[2] - constants[1]).abs() <= 0.05 * constants[1];
    pass &= stable;
    notes.push(format!(
        "cubic constant n<=20 {:.4}, n<=40 {:.4}, n<=80 {:.4}",
        constants[0], constants[1], constants[2]
    ));
    outcome(pass, notes.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("zero-potential exactness", zero_potential),
        ("Dirac-delta oracle", dirac_delta),
        ("interlacing", interlacing),
        ("gauge invariance", gauge_invariance),
        ("two-spectra norming constants", two_spectra_alphas),
        ("h-gap law", h_gap),
        ("product synthesis", product_synthesis),
        ("resolvent trace identity", resolvent_identity),
        ("reconstruction round trip", reconstruction_roundtrip),
        ("rejection power", rejection_power),
        ("Riesz diagnostics", riesz_diagnostics),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<31} {}  {}",
            i + 1,
            name,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
