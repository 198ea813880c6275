//! Independent oracles for test potentials, written from the classical form
//! −u″ + q u = λ² u with q = m δ(x − a) and Dirichlet condition at x = 0.
#![allow(dead_code)]

use proptest::prelude::*;
use slspec::PiecewiseSigma;

/// Classical pieces of the Dirichlet solution for σ = m·H(x − a): returns (c, e, b)
/// with u = c cos λt + e sin λt on the right piece, t = x − a, b = 1 − a.
fn right_piece(lam: f64, a: f64, m: f64) -> (f64, f64, f64) {
    let c = (lam * a).sin();
    let d = lam * (lam * a).cos() + m * c;
    (c, d / lam, 1.0 - a)
}

/// (u(1), u′(1−)) of the solution with u(0) = 0, u′(0) = λ.
pub fn step_end(lam: f64, a: f64, m: f64) -> (f64, f64) {
    let (c, e, b) = right_piece(lam, a, m);
    let (cb, sb) = ((lam * b).cos(), (lam * b).sin());
    (c * cb + e * sb, lam * (-c * sb + e * cb))
}

/// Boundary functional at x = 1: u(1) for h = ∞, u^[1](1) + h u(1) otherwise.
pub fn step_char(lam: f64, a: f64, m: f64, h: Option<f64>) -> f64 {
    let (u, du) = step_end(lam, a, m);
    match h {
        None => u,
        Some(h) => du - m * u + h * u,
    }
}

/// All roots of f in (0, lam_max], by grid scan and bisection.
pub fn scan_roots(f: impl Fn(f64) -> f64, lam_max: f64, step: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut x0 = step * 1e-3;
    let mut f0 = f(x0);
    while x0 < lam_max {
        let x1 = x0 + step;
        let f1 = f(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            let (mut lo, mut hi, mut flo) = (x0, x1, f0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm * flo <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
                if hi - lo <= 1e-15 * hi {
                    break;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

/// First `count` squared eigenvalues of the step potential, H = ∞.
pub fn step_spectrum(a: f64, m: f64, h: Option<f64>, count: usize) -> Vec<f64> {
    let lam_max = std::f64::consts::PI * (count as f64 + 1.0);
    let roots = scan_roots(|l| step_char(l, a, m, h), lam_max, 0.01);
    roots.iter().take(count).map(|l| l * l).collect()
}

/// α = 2∫u²/u(1)² from closed-form integrals of the two sine–cosine pieces.
pub fn step_alpha(lam: f64, a: f64, m: f64) -> f64 {
    let (c, e, b) = right_piece(lam, a, m);
    let left = a / 2.0 - (2.0 * lam * a).sin() / (4.0 * lam);
    let s2 = (2.0 * lam * b).sin() / (4.0 * lam);
    let right = c * c * (b / 2.0 + s2) + e * e * (b / 2.0 - s2) + c * e * (lam * b).sin().powi(2) / lam;
    let (u1, _) = step_end(lam, a, m);
    2.0 * (left + right) / (u1 * u1)
}

/// Strategy for piecewise σ with 1–5 cells and values in [−2, 2].
pub fn sigma_strategy() -> impl Strategy<Value = PiecewiseSigma> {
    (1usize..=5)
        .prop_flat_map(|cells| {
            (
                proptest::collection::vec(0.05f64..0.95, cells - 1),
                proptest::collection::vec(-2.0f64..2.0, cells),
            )
        })
        .prop_filter_map("distinct breakpoints", |(mut inner, values)| {
            inner.sort_by(f64::total_cmp);
            let mut bps = vec![0.0];
            bps.extend(inner);
            bps.push(1.0);
            PiecewiseSigma::new(bps, values).ok()
        })
}
