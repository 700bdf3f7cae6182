use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::{channel_rates, poisson, Effect, EngineConfig, StepReport};
use crate::error::AbmError;
use crate::models::ModelSpec;
use crate::rate::eval_rate;
use crate::types::PopulationState;

/// Advance `state` by one step of length `dt` at count level.
///
/// Per channel, spawn firings are `Poisson(n r dt)` and removal firings are
/// `Binomial(n, p(r, dt))`, with `n` the source count at the start of the
/// step. Removals are applied first, in channel order, each truncated to what
/// is left of its target; spawns and influx arrivals are added afterwards.
/// The caller is responsible for keeping `r dt` within the guard.
pub fn step_tau_leap<R: Rng + ?Sized>(
    state: &mut PopulationState<u64>,
    model: &ModelSpec,
    cfg: &EngineConfig,
    dt: f64,
    rng: &mut R,
) -> Result<StepReport, AbmError> {
    let mut leaper = TauLeaper::new(model);
    let report = leaper.step(model, cfg, &mut state.values, dt, rng)?;
    state.time += dt;
    Ok(report)
}

pub(crate) struct TauLeaper {
    rates: Vec<f64>,
    fires: Vec<u64>,
    real: Vec<f64>,
}

impl TauLeaper {
    pub(crate) fn new(model: &ModelSpec) -> Self {
        TauLeaper {
            rates: vec![0.0; model.transitions.len()],
            fires: vec![0; model.transitions.len()],
            real: vec![0.0; model.species.len()],
        }
    }

    /// Largest `|rate|` over channels whose source is populated.
    pub(crate) fn max_rate(&mut self, model: &ModelSpec, counts: &[u64]) -> Result<f64, AbmError> {
        for (r, &c) in self.real.iter_mut().zip(counts) {
            *r = c as f64;
        }
        channel_rates(model, &self.real, &mut self.rates)?;
        Ok(model
            .transitions
            .iter()
            .zip(&self.rates)
            .filter(|(t, _)| counts[t.source] > 0)
            .map(|(_, r)| r.abs())
            .fold(0.0, f64::max))
    }

    pub(crate) fn step<R: Rng + ?Sized>(
        &mut self,
        model: &ModelSpec,
        cfg: &EngineConfig,
        counts: &mut [u64],
        dt: f64,
        rng: &mut R,
    ) -> Result<StepReport, AbmError> {
        if counts.len() != model.species.len() {
            return Err(AbmError::ArityMismatch { expected: model.species.len(), got: counts.len() });
        }
        for (r, &c) in self.real.iter_mut().zip(counts.iter()) {
            *r = c as f64;
        }
        channel_rates(model, &self.real, &mut self.rates)?;

        for (k, t) in model.transitions.iter().enumerate() {
            let n = counts[t.source];
            let r = self.rates[k];
            self.fires[k] = if n == 0 || r == 0.0 {
                0
            } else if is_spawn(t.effect, r) {
                poisson(n as f64 * r * dt, rng)
            } else {
                binomial(n, cfg.firing.probability(r.abs(), dt), rng)
            };
        }

        let mut report = StepReport::default();
        for (k, t) in model.transitions.iter().enumerate() {
            let target = match t.effect {
                Effect::RemoveSelf => t.source,
                Effect::RemoveRandom(j) => j,
                Effect::SignedBranch if self.rates[k] < 0.0 => t.source,
                _ => continue,
            };
            let want = self.fires[k];
            let done = want.min(counts[target]);
            counts[target] -= done;
            report.clamps += want - done;
        }
        for (k, t) in model.transitions.iter().enumerate() {
            match t.effect {
                Effect::Spawn(j) => counts[j] += self.fires[k],
                Effect::SignedBranch if self.rates[k] > 0.0 => counts[t.source] += self.fires[k],
                _ => {}
            }
        }
        for inf in &model.influxes {
            let s = eval_rate(&inf.rate, &self.real, &model.params)?.max(0.0);
            counts[inf.target] += poisson(s * dt, rng);
        }
        Ok(report)
    }
}

fn is_spawn(effect: Effect, rate: f64) -> bool {
    match effect {
        Effect::Spawn(_) => true,
        Effect::SignedBranch => rate > 0.0,
        Effect::RemoveSelf | Effect::RemoveRandom(_) => false,
    }
}

fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    match Binomial::new(n, p) {
        Ok(d) => d.sample(rng),
        Err(_) => 0,
    }
}
