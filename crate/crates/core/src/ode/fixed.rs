use alloc::vec;
use alloc::vec::Vec;

use super::RhsFunction;
use crate::error::OdeError;
use crate::types::{integer_ratio, sample_grid, PopulationState, SpeciesId, Trajectory, TrajectoryMode};

/// Classic fourth-order Runge-Kutta on a uniform step `dt`, sampled every
/// `sample_every` days from `y0.time` to `t_end`.
///
/// Negative components are clamped to zero after each step; the number of
/// clamps is reported in `meta.clamp_events`.
pub fn integrate_fixed<R: RhsFunction>(
    rhs: &R,
    species: &[SpeciesId],
    y0: &PopulationState<f64>,
    t_end: f64,
    dt: f64,
    sample_every: f64,
) -> Result<Trajectory, OdeError> {
    let n = rhs.arity();
    if y0.values.len() != n {
        return Err(OdeError::ArityMismatch { expected: n, got: y0.values.len() });
    }
    if species.len() != n {
        return Err(OdeError::ArityMismatch { expected: n, got: species.len() });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(OdeError::InvalidSetting("dt must be positive"));
    }
    if !(t_end > y0.time) {
        return Err(OdeError::InvalidSetting("t_end must exceed the start time"));
    }
    let steps_per_sample =
        integer_ratio(sample_every, dt).ok_or(OdeError::InvalidSetting("sample_every must be a multiple of dt"))?;

    let t0 = y0.time;
    let grid = sample_grid(t_end - t0, sample_every);
    let mut out = Trajectory::with_capacity(species.to_vec(), TrajectoryMode::Ode, grid.len());
    let mut y = y0.values.clone();
    let mut ws = Workspace::new(n);
    let mut clamps = 0u64;
    let mut step = 0usize;

    out.push(t0, y.iter().copied());
    for _ in 1..grid.len() {
        for _ in 0..steps_per_sample {
            let t = t0 + step as f64 * dt;
            ws.rk4_step(rhs, t, dt, &mut y);
            step += 1;
            for v in y.iter_mut() {
                if !v.is_finite() {
                    return Err(OdeError::NonFiniteState { time: t + dt });
                }
                if *v < 0.0 {
                    *v = 0.0;
                    clamps += 1;
                }
            }
        }
        out.push(t0 + grid[out.len()], y.iter().copied());
    }
    out.meta.clamp_events = clamps;
    Ok(out)
}

struct Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace { k1: vec![0.0; n], k2: vec![0.0; n], k3: vec![0.0; n], k4: vec![0.0; n], tmp: vec![0.0; n] }
    }

    fn rk4_step<R: RhsFunction>(&mut self, rhs: &R, t: f64, h: f64, y: &mut [f64]) {
        let half = 0.5 * h;
        rhs.eval(t, y, &mut self.k1);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + half * self.k1[i];
        }
        rhs.eval(t + half, &self.tmp, &mut self.k2);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + half * self.k2[i];
        }
        rhs.eval(t + half, &self.tmp, &mut self.k3);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + h * self.k3[i];
        }
        rhs.eval(t + h, &self.tmp, &mut self.k4);
        for i in 0..y.len() {
            y[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}
