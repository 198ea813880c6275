//! Prüfer angle θ with cot θ = u^[1]/u and oscillation counting.
//!
//! θ obeys θ′ = s sin²θ + (cos θ + σ sin θ)², so θ(1, s) is strictly
//! increasing in s and never crosses a multiple of π downwards. The n-th
//! eigenvalue of T(σ, H, h) is the unique s with θ(1, s) = β + (n − 1)π,
//! where θ(0) encodes H and β ∈ (0, π] encodes h.

use std::f64::consts::PI;

use crate::boundary::{BoundaryData, BoundaryValue};
use crate::error::{Error, Result};
use crate::ode::{cell_transfer, StateVector};
use crate::potential::PiecewiseSigma;

/// Angle tolerance for declaring an energy to sit on an eigenvalue.
pub const AMBIGUITY_TOLERANCE: f64 = 1e-9;
const RK_TOLERANCE: f64 = 1e-11;

/// θ(0) for the condition u^[1](0) = H u(0): 0 for Dirichlet, arccot H otherwise.
pub fn left_angle(left: BoundaryValue) -> f64 {
    match left {
        BoundaryValue::Infinite => 0.0,
        BoundaryValue::Finite(h) => 1f64.atan2(h),
    }
}

/// β ∈ (0, π] with cot β = −h; β = π for Dirichlet.
pub fn right_angle(right: BoundaryValue) -> f64 {
    match right {
        BoundaryValue::Infinite => PI,
        BoundaryValue::Finite(h) => 1f64.atan2(-h),
    }
}

/// Projective angle of (u^[1], u) in [0, π).
fn projective_angle(u1: f64, u: f64) -> f64 {
    let (u1, u) = if u < 0.0 || (u == 0.0 && u1 < 0.0) {
        (-u1, -u)
    } else {
        (u1, u)
    };
    let a = u.atan2(u1);
    if a >= PI {
        0.0
    } else {
        a
    }
}

/// θ(1, s) by adaptive Dormand–Prince 5(4) integration of the angle equation.
pub fn prufer_theta(sigma: &PiecewiseSigma, s: f64, init_theta: f64) -> f64 {
    let mut theta = init_theta;
    for (a, b, v) in sigma.cells() {
        theta = integrate_cell(v, s, theta, b - a);
    }
    theta
}

fn rhs(sv: f64, s: f64, theta: f64) -> f64 {
    let (sn, cs) = theta.sin_cos();
    let w = cs + sv * sn;
    s * sn * sn + w * w
}

// Dormand–Prince tableau; the angle equation is autonomous so the nodes c_i are unused.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn integrate_cell(sv: f64, s: f64, theta0: f64, length: f64) -> f64 {
    let f = |y: f64| rhs(sv, s, y);
    let scale = (s.abs() + (1.0 + sv.abs()).powi(2)).max(1.0);
    let mut h = (0.1 / scale.sqrt()).min(length);
    let mut x = 0.0;
    let mut y = theta0;
    let mut k1 = f(y);
    while x < length {
        if x + h > length {
            h = length - x;
        }
        let k2 = f(y + h * A21 * k1);
        let k3 = f(y + h * (A31 * k1 + A32 * k2));
        let k4 = f(y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = f(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = f(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        let y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = f(y_new);
        let err = (h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)).abs();
        let tol = RK_TOLERANCE * (1.0 + y_new.abs().min(1.0));
        if err <= tol || h < 1e-14 {
            x += h;
            y = y_new;
            k1 = k7;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    y
}

/// θ(1, s) from the exact per-cell solution.
///
/// On a cell with s > 0 the solution is u = R sin ψ with ψ advancing
/// linearly at rate √s; u vanishes exactly when ψ crosses a multiple of π,
/// which is where the branch index of θ changes.
pub fn prufer_theta_exact(sigma: &PiecewiseSigma, s: f64, init_theta: f64) -> f64 {
    let mut theta = init_theta;
    for (a, b, v) in sigma.cells() {
        theta = advance_exact(v, s, theta, b - a);
    }
    theta
}

fn advance_exact(sv: f64, s: f64, theta: f64, length: f64) -> f64 {
    let branch = (theta / PI).floor();
    let phase = theta - PI * branch;
    // Representative with u ≥ 0.
    let (u1, u) = (phase.cos(), phase.sin());
    if s > 0.0 {
        let omega = s.sqrt();
        let v = u1 + sv * u;
        let psi_a = u.atan2(v / omega);
        let psi_b = psi_a + omega * length;
        let k = (psi_b / PI).floor();
        let rel = psi_b - PI * k;
        let (sn, cs) = rel.sin_cos();
        // u vanishes at either end of the half-turn; roundoff must not fold π onto 0.
        let phi = if sn > 0.0 {
            sn.atan2(omega * cs - sv * sn)
        } else if rel < PI / 2.0 {
            0.0
        } else {
            PI
        };
        PI * (branch + k) + phi
    } else {
        let end = cell_transfer(sv, s, length).apply(StateVector::new(u1, u));
        let crossed = u > 0.0 && end.u <= 0.0;
        PI * (branch + if crossed { 1.0 } else { 0.0 }) + projective_angle(end.u1, end.u)
    }
}

/// Number of eigenvalues of T(σ, H, h) strictly below `s_max`.
pub fn count_below(sigma: &PiecewiseSigma, bc: BoundaryData, s_max: f64) -> Result<usize> {
    if !s_max.is_finite() {
        return Err(Error::MalformedInput(format!("energy {s_max} is not finite")));
    }
    let theta = prufer_theta_exact(sigma, s_max, left_angle(bc.left));
    let beta = right_angle(bc.right);
    let x = (theta - beta) / PI;
    let nearest = x.round();
    if (x - nearest).abs() * PI < AMBIGUITY_TOLERANCE && nearest >= 0.0 {
        return Err(Error::AmbiguousCount {
            s: s_max,
            tol: AMBIGUITY_TOLERANCE,
        });
    }
    Ok(if x <= 0.0 { 0 } else { x.ceil() as usize })
}

/// Index function θ(1, s) − β − (n − 1)π, increasing in s and zero at s_n.
pub(crate) fn index_function(sigma: &PiecewiseSigma, bc: BoundaryData, n: usize, s: f64) -> f64 {
    prufer_theta_exact(sigma, s, left_angle(bc.left)) - right_angle(bc.right) - (n as f64 - 1.0) * PI
}
