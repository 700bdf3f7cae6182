use alloc::vec;
use alloc::vec::Vec;

use super::RhsFunction;
use crate::error::OdeError;
use crate::math::{powf, sqrt};
use crate::types::{PopulationState, SpeciesId, Trajectory, TrajectoryMode};

/// Step-size control for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    /// Relative tolerance per component.
    pub rel_tol: f64,
    /// Absolute tolerance per component.
    pub abs_tol: f64,
    /// First trial step, days.
    pub initial_step: f64,
    /// Upper bound on the step, days.
    pub max_step: f64,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions { rel_tol: 1e-8, abs_tol: 1e-10, initial_step: 1e-3, max_step: 1.0 }
    }
}

const MIN_STEP: f64 = 1e-12;

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Fourth-order continuous extension.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Embedded Dormand-Prince 5(4) integration with dense output evaluated on
/// `grid` (strictly increasing, starting at or after `y0.time`, ending at or
/// before `t_end`).
pub fn integrate_adaptive<R: RhsFunction>(
    rhs: &R,
    species: &[SpeciesId],
    y0: &PopulationState<f64>,
    t_end: f64,
    opts: AdaptiveOptions,
    grid: &[f64],
) -> Result<Trajectory, OdeError> {
    let n = rhs.arity();
    if y0.values.len() != n || species.len() != n {
        return Err(OdeError::ArityMismatch { expected: n, got: y0.values.len().min(species.len()) });
    }
    if !(opts.rel_tol > 0.0 && opts.abs_tol > 0.0) {
        return Err(OdeError::InvalidSetting("tolerances must be positive"));
    }
    if !(t_end > y0.time) {
        return Err(OdeError::InvalidSetting("t_end must exceed the start time"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.first().is_some_and(|&g| g < y0.time) {
        return Err(OdeError::InvalidSetting("sample grid must be increasing and start after y0"));
    }
    if grid.last().is_some_and(|&g| g > t_end) {
        return Err(OdeError::InvalidSetting("sample grid extends past t_end"));
    }

    let mut out = Trajectory::with_capacity(species.to_vec(), TrajectoryMode::Ode, grid.len());
    let mut t = y0.time;
    let mut y = y0.values.clone();
    let mut k: [Vec<f64>; 7] = core::array::from_fn(|_| vec![0.0; n]);
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut dense: [Vec<f64>; 5] = core::array::from_fn(|_| vec![0.0; n]);
    let mut h = opts.initial_step.min(opts.max_step).min(t_end - t);
    let mut next_sample = 0usize;
    let mut clamps = 0u64;

    while next_sample < grid.len() && grid[next_sample] <= t {
        out.push(grid[next_sample], y.iter().copied());
        next_sample += 1;
    }

    rhs.eval(t, &y, &mut k[0]);
    check_finite(&k[0], t)?;
    while t < t_end && next_sample < grid.len() {
        if h < MIN_STEP {
            return Err(OdeError::StepUnderflow { time: t });
        }
        let h_step = h.min(t_end - t);

        let combos: [(&[f64], f64); 5] = [
            (&[A21], C2),
            (&[A31, A32], C3),
            (&[A41, A42, A43], C4),
            (&[A51, A52, A53, A54], C5),
            (&[A61, A62, A63, A64, A65], 1.0),
        ];
        for (s, (coeffs, c)) in combos.iter().enumerate() {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, a) in coeffs.iter().enumerate() {
                    acc += a * k[j][i];
                }
                stage[i] = y[i] + h_step * acc;
            }
            let (_, rest) = k.split_at_mut(s + 1);
            rhs.eval(t + c * h_step, &stage, &mut rest[0]);
        }
        for i in 0..n {
            y_new[i] = y[i] + h_step * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
        }
        rhs.eval(t + h_step, &y_new, &mut k[6]);
        for i in 0..n {
            err[i] = h_step * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
        }
        if y_new.iter().chain(k[6].iter()).any(|v| !v.is_finite()) {
            // Retry smaller; a genuinely non-finite field fails at MIN_STEP.
            if h_step <= MIN_STEP * 10.0 {
                return Err(OdeError::NonFiniteState { time: t });
            }
            h = h_step * 0.1;
            continue;
        }

        let mut sq = 0.0;
        for i in 0..n {
            let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            sq += (err[i] / scale) * (err[i] / scale);
        }
        let norm = sqrt(sq / n as f64);
        let factor = if norm == 0.0 { 5.0 } else { (0.9 * powf(norm, -0.2)).clamp(0.2, 5.0) };

        if norm <= 1.0 {
            for i in 0..n {
                let dy = y_new[i] - y[i];
                let bspl = h_step * k[0][i] - dy;
                dense[0][i] = y[i];
                dense[1][i] = dy;
                dense[2][i] = bspl;
                dense[3][i] = dy - h_step * k[6][i] - bspl;
                dense[4][i] =
                    h_step * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
            }
            let slack = 1e-12 * t_end.abs().max(1.0);
            let t_new = if t_end - (t + h_step) <= slack { t_end } else { t + h_step };
            while next_sample < grid.len() && grid[next_sample] <= t_new {
                let theta = ((grid[next_sample] - t) / h_step).min(1.0);
                let th1 = 1.0 - theta;
                let row = (0..n).map(|i| {
                    let v = dense[0][i]
                        + theta * (dense[1][i] + th1 * (dense[2][i] + theta * (dense[3][i] + th1 * dense[4][i])));
                    v.max(0.0)
                });
                out.push(grid[next_sample], row);
                next_sample += 1;
            }
            t = t_new;
            for v in y_new.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                    clamps += 1;
                }
            }
            core::mem::swap(&mut y, &mut y_new);
            if clamps > 0 {
                rhs.eval(t, &y, &mut k[0]);
            } else {
                let (first, rest) = k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
            }
        }
        h = (h_step * factor).min(opts.max_step);
    }
    out.meta.clamp_events = clamps;
    Ok(out)
}

fn check_finite(v: &[f64], time: f64) -> Result<(), OdeError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(OdeError::NonFiniteState { time })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{integrate_fixed, FnRhs};
    use crate::params::Case1Params;
    use crate::types::sample_grid;
    use alloc::vec;

    fn y() -> Vec<SpeciesId> {
        vec![SpeciesId::Other("y".into())]
    }

    #[test]
    fn linear_growth_is_exact() {
        let rhs = FnRhs::new(1, |_, _: &[f64], dy: &mut [f64]| dy[0] = 2.0);
        let opts = AdaptiveOptions { abs_tol: 1e-9, ..Default::default() };
        let traj =
            integrate_adaptive(&rhs, &y(), &PopulationState::initial(vec![0.0]), 10.0, opts, &sample_grid(10.0, 1.0))
                .unwrap();
        assert!((traj.columns[0][10] - 20.0).abs() <= 1e-9);
        assert!((traj.columns[0][3] - 6.0).abs() <= 1e-9);
    }

    #[test]
    fn dense_output_tracks_exponential() {
        let rhs = FnRhs::new(1, |_, y: &[f64], dy: &mut [f64]| dy[0] = -y[0]);
        let grid: Vec<f64> = (0..=37).map(|k| k as f64 * 0.137).collect();
        let opts = AdaptiveOptions { max_step: 2.0, ..Default::default() };
        let traj = integrate_adaptive(&rhs, &y(), &PopulationState::initial(vec![1.0]), 5.2, opts, &grid).unwrap();
        for (t, v) in traj.times.iter().zip(&traj.columns[0]) {
            assert!((v - libm::exp(-t)).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn nan_rhs_is_an_error() {
        let rhs = FnRhs::new(1, |_, _: &[f64], dy: &mut [f64]| dy[0] = f64::NAN);
        let r =
            integrate_adaptive(&rhs, &y(), &PopulationState::initial(vec![1.0]), 1.0, Default::default(), &[0.0, 1.0]);
        assert!(matches!(r, Err(OdeError::NonFiniteState { .. })));
    }

    #[test]
    fn blow_up_underflows_or_fails() {
        // y' = y^2 from y=1 blows up at t=1.
        let rhs = FnRhs::new(1, |_, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0]);
        let r =
            integrate_adaptive(&rhs, &y(), &PopulationState::initial(vec![1.0]), 2.0, Default::default(), &[0.0, 2.0]);
        assert!(matches!(r, Err(OdeError::StepUnderflow { .. }) | Err(OdeError::NonFiniteState { .. })));
    }

    #[test]
    fn agrees_with_rk4_on_case1() {
        let p = Case1Params::scenario(1).unwrap();
        let sp = vec![SpeciesId::Tumour, SpeciesId::Effector];
        let y0 = PopulationState::initial(vec![100.0, 5.0]);
        let fixed = integrate_fixed(&p, &sp, &y0, 100.0, 1e-3, 1.0).unwrap();
        let opts = AdaptiveOptions { rel_tol: 1e-10, abs_tol: 1e-12, ..Default::default() };
        let adaptive = integrate_adaptive(&p, &sp, &y0, 100.0, opts, &fixed.times).unwrap();
        for s in 0..2 {
            for (a, b) in adaptive.columns[s].iter().zip(&fixed.columns[s]) {
                let rel = (a - b).abs() / b.abs().max(1.0);
                assert!(rel < 1e-4, "species {s}: {a} vs {b}");
            }
        }
    }
}
