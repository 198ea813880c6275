//! Exact propagation of the quasi-derivative system
//!
//! ```text
//!   d/dx (u^[1], u)ᵀ = [[−σ, −σ² − s], [1, σ]] (u^[1], u)ᵀ
//! ```
//!
//! across a piecewise-constant σ. On a cell the generator A is constant with
//! tr A = 0 and det A = s, so A² = −s·I and exp(A·L) = C(L)·I + S(L)·A with
//! C = cos(√s L), S = sin(√s L)/√s (hyperbolic for s < 0).

use serde::{Deserialize, Serialize};

use crate::potential::PiecewiseSigma;

/// Below this value of |√s|·L the trigonometric coefficients use their Taylor series.
const TAYLOR_THRESHOLD: f64 = 1e-6;
/// Propagated states are renormalized once their max-norm leaves [1/RESCALE, RESCALE].
const RESCALE_LIMIT: f64 = 1e100;

/// A solution value and its quasi-derivative at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    /// Quasi-derivative u^[1] = u′ − σu.
    pub u1: f64,
    pub u: f64,
}

impl StateVector {
    pub fn new(u1: f64, u: f64) -> Self {
        Self { u1, u }
    }

    pub fn max_norm(self) -> f64 {
        self.u1.abs().max(self.u.abs())
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self {
            u1: self.u1 * factor,
            u: self.u * factor,
        }
    }

    pub fn is_trivial(self) -> bool {
        self.u1 == 0.0 && self.u == 0.0
    }
}

/// Matrix [[a, b], [c, d]] acting on (u^[1], u)ᵀ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl TransferMatrix {
    pub const IDENTITY: Self = Self {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn apply(&self, v: StateVector) -> StateVector {
        StateVector {
            u1: self.a * v.u1 + self.b * v.u,
            u: self.c * v.u1 + self.d * v.u,
        }
    }

    /// `self · rhs`: first `rhs`, then `self`.
    pub fn compose(&self, rhs: &Self) -> Self {
        Self {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Inverse of a unimodular matrix.
    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }
}

/// cos(√s L) and sin(√s L)/√s, continued analytically through s ≤ 0.
pub(crate) fn trig_pair(s: f64, length: f64) -> (f64, f64) {
    let omega = s.abs().sqrt();
    if omega * length.abs() < TAYLOR_THRESHOLD {
        let l2 = length * length;
        let x = s * l2;
        let c = 1.0 - x / 2.0 + x * x / 24.0 - x * x * x / 720.0;
        let sn = length * (1.0 - x / 6.0 + x * x / 120.0 - x * x * x / 5040.0);
        (c, sn)
    } else if s > 0.0 {
        let t = omega * length;
        (t.cos(), t.sin() / omega)
    } else {
        let t = omega * length;
        (t.cosh(), t.sinh() / omega)
    }
}

/// Exact transfer matrix over a cell of the given length on which σ is constant.
pub fn cell_transfer(sigma_value: f64, s: f64, length: f64) -> TransferMatrix {
    let (c, sn) = trig_pair(s, length);
    let sv = sigma_value;
    TransferMatrix {
        a: c - sn * sv,
        b: -sn * (sv * sv + s),
        c: sn,
        d: c + sn * sv,
    }
}

/// Transfer matrix over all of [0, 1], composed left to right.
pub fn total_transfer(sigma: &PiecewiseSigma, s: f64) -> TransferMatrix {
    sigma.cells().fold(TransferMatrix::IDENTITY, |acc, (a, b, v)| {
        cell_transfer(v, s, b - a).compose(&acc)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Initial state at x = 0.
    LeftToRight,
    /// Initial state at x = 1.
    RightToLeft,
}

/// Result of [`propagate`]: one solution sampled at every breakpoint.
///
/// The true solution equals `trace[i] · exp(log_scale)`; the common factor is
/// split off only when the amplitude would otherwise overflow.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub s: f64,
    pub direction: Direction,
    /// States at `sigma.breakpoints()`, ordered by increasing x.
    pub trace: Vec<StateVector>,
    pub log_scale: f64,
}

impl Propagation {
    /// State at the far end of the propagation.
    pub fn final_state(&self) -> StateVector {
        match self.direction {
            Direction::LeftToRight => *self.trace.last().unwrap(),
            Direction::RightToLeft => self.trace[0],
        }
    }

    pub fn at_left(&self) -> StateVector {
        self.trace[0]
    }

    pub fn at_right(&self) -> StateVector {
        *self.trace.last().unwrap()
    }

    /// State at an arbitrary x, propagated from the enclosing cell's left breakpoint.
    pub fn state_at(&self, sigma: &PiecewiseSigma, x: f64) -> StateVector {
        let bps = sigma.breakpoints();
        let cell = bps[1..].partition_point(|&b| b <= x).min(sigma.cell_count() - 1);
        let t = x - bps[cell];
        cell_transfer(sigma.values()[cell], self.s, t).apply(self.trace[cell])
    }
}

/// Propagates `init` across [0, 1] in the given direction, recording every breakpoint.
pub fn propagate(
    sigma: &PiecewiseSigma,
    s: f64,
    init: StateVector,
    direction: Direction,
) -> Propagation {
    assert!(!init.is_trivial(), "initial state must be nontrivial");
    let m = sigma.cell_count();
    let mut trace = vec![init; m + 1];
    let mut log_scale = 0.0;
    let mut state = init;
    let rescale = |state: &mut StateVector, trace: &mut [StateVector], log_scale: &mut f64| {
        let norm = state.max_norm();
        if norm > RESCALE_LIMIT || norm < 1.0 / RESCALE_LIMIT {
            let f = 1.0 / norm;
            *state = state.scaled(f);
            for t in trace.iter_mut() {
                *t = t.scaled(f);
            }
            *log_scale += norm.ln();
        }
    };
    match direction {
        Direction::LeftToRight => {
            for (i, (a, b, v)) in sigma.cells().enumerate() {
                state = cell_transfer(v, s, b - a).apply(state);
                trace[i + 1] = state;
                rescale(&mut state, &mut trace[..=i + 1], &mut log_scale);
            }
        }
        Direction::RightToLeft => {
            for (i, (a, b, v)) in sigma.cells().enumerate().rev() {
                state = cell_transfer(v, s, a - b).apply(state);
                trace[i] = state;
                rescale(&mut state, &mut trace[i..], &mut log_scale);
            }
        }
    }
    Propagation {
        s,
        direction,
        trace,
        log_scale,
    }
}
