//! Right-hand sides for the four case models and deterministic integrators.
//!
//! `rhs_case*` validate their input and return the derivative vector. The
//! [`RhsFunction`] implementations on the parameter types skip validation;
//! integrators call those, since intermediate Runge-Kutta stages may dip
//! slightly below zero near extinction.

mod adaptive;
mod fixed;

pub use adaptive::{integrate_adaptive, AdaptiveOptions};
pub use fixed::integrate_fixed;

use crate::error::OdeError;
use crate::math::powf;
use crate::params::{Case0Params, Case1Params, Case2Params, Case3Params, CaseParams};

/// A system `dy/dt = f(t, y)` with a fixed number of components.
pub trait RhsFunction {
    /// Number of state components.
    fn arity(&self) -> usize;

    /// Write `f(t, y)` into `dy`. Both slices have length `arity()`.
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

impl<R: RhsFunction + ?Sized> RhsFunction for &R {
    fn arity(&self) -> usize {
        (**self).arity()
    }
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        (**self).eval(t, y, dy)
    }
}

/// Adapter turning a closure into an [`RhsFunction`].
pub struct FnRhs<F> {
    arity: usize,
    f: F,
}

impl<F: Fn(f64, &[f64], &mut [f64])> FnRhs<F> {
    /// Wrap `f` as a system of `arity` components.
    pub fn new(arity: usize, f: F) -> Self {
        FnRhs { arity, f }
    }
}

impl<F: Fn(f64, &[f64], &mut [f64])> RhsFunction for FnRhs<F> {
    fn arity(&self) -> usize {
        self.arity
    }
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        (self.f)(t, y, dy)
    }
}

fn check_state(y: &[f64], arity: usize) -> Result<(), OdeError> {
    if y.len() != arity {
        return Err(OdeError::ArityMismatch { expected: arity, got: y.len() });
    }
    match y.iter().position(|&v| !(v >= 0.0)) {
        Some(index) => Err(OdeError::NegativeState { index, value: y[index] }),
        None => Ok(()),
    }
}

/// Power-law tumour growth, state `[T]`: `a T^alpha - b T^beta`.
pub fn rhs_case0(state: &[f64], params: &Case0Params) -> Result<[f64; 1], OdeError> {
    check_state(state, 1)?;
    let mut dy = [0.0];
    params.eval(0.0, state, &mut dy);
    Ok(dy)
}

/// Tumour / effector, state `[T, E]`.
pub fn rhs_case1(state: &[f64], params: &Case1Params) -> Result<[f64; 2], OdeError> {
    check_state(state, 2)?;
    let mut dy = [0.0; 2];
    params.eval(0.0, state, &mut dy);
    Ok(dy)
}

/// Tumour / effector / IL-2, state `[T, E, I]`.
pub fn rhs_case2(state: &[f64], params: &Case2Params) -> Result<[f64; 3], OdeError> {
    check_state(state, 3)?;
    let mut dy = [0.0; 3];
    params.eval(0.0, state, &mut dy);
    Ok(dy)
}

/// Tumour / effector / IL-2 / TGF-beta, state `[T, E, I, S]`.
pub fn rhs_case3(state: &[f64], params: &Case3Params) -> Result<[f64; 4], OdeError> {
    check_state(state, 4)?;
    let mut dy = [0.0; 4];
    params.eval(0.0, state, &mut dy);
    Ok(dy)
}

impl RhsFunction for Case0Params {
    fn arity(&self) -> usize {
        1
    }

    fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        // Fractional powers of a negative RK stage value would be NaN.
        let t = y[0].max(0.0);
        dy[0] = self.a * powf(t, self.alpha) - self.b * powf(t, self.beta);
    }
}

impl RhsFunction for Case1Params {
    fn arity(&self) -> usize {
        2
    }

    fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let (t, e) = (y[0], y[1]);
        dy[0] = t * self.a * (1.0 - self.b * t) - self.n * t * e;
        dy[1] = self.p * t * e / (self.g + t) - self.m * t * e - self.d * e + self.s;
    }
}

impl RhsFunction for Case2Params {
    fn arity(&self) -> usize {
        3
    }

    fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let (t, e, i) = (y[0], y[1], y[2]);
        dy[0] = self.a * t * (1.0 - self.b * t) - self.aa * e * t / (self.g2 + t);
        dy[1] = self.c * t - self.mu2 * e + self.p1 * e * i / (self.g1 + i) + self.s1;
        dy[2] = self.p2 * e * t / (self.g3 + t) - self.mu3 * i + self.s2;
    }
}

impl Case3Params {
    /// Net per-capita effector proliferation: IL-2 driven, damped by TGF-beta.
    /// Kept separate so the reconstructed form can be swapped in one place.
    pub fn effector_net_proliferation(&self, il2: f64, tgf: f64) -> f64 {
        (self.p1 - self.q1 * tgf / (self.q2 + tgf)) * il2 / (self.g1 + il2)
    }

    /// Aggregate TGF-beta production by a tumour of size `t`.
    pub fn tgf_production(&self, t: f64) -> f64 {
        self.p4 * t * t / (self.theta * self.theta + t * t)
    }
}

impl RhsFunction for Case3Params {
    fn arity(&self) -> usize {
        4
    }

    fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let (t, e, i, s) = (y[0], y[1], y[2], y[3]);
        dy[0] = self.a * t * (1.0 - t / self.K) - self.aa * e * t / (self.g2 + t) + self.p2 * s * t / (self.g3 + s);
        dy[1] = self.c * t / (1.0 + self.gamma * s) - self.mu1 * e + self.effector_net_proliferation(i, s) * e;
        dy[2] = self.p3 * e * t / ((self.g4 + t) * (1.0 + self.alpha * s)) - self.mu2 * i;
        dy[3] = self.tgf_production(t) - self.mu3 * s;
    }
}

impl RhsFunction for CaseParams {
    fn arity(&self) -> usize {
        match self {
            CaseParams::Case0(p) => p.arity(),
            CaseParams::Case1(p) => p.arity(),
            CaseParams::Case2(p) => p.arity(),
            CaseParams::Case3(p) => p.arity(),
        }
    }

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        match self {
            CaseParams::Case0(p) => p.eval(t, y, dy),
            CaseParams::Case1(p) => p.eval(t, y, dy),
            CaseParams::Case2(p) => p.eval(t, y, dy),
            CaseParams::Case3(p) => p.eval(t, y, dy),
        }
    }
}
