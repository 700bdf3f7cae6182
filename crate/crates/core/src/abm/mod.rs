//! Stochastic agent engine.
//!
//! Agents fire rate-triggered transitions as independent Poisson streams,
//! discretised on a fixed step. Two interchangeable backends execute the same
//! [`ModelSpec`](crate::models::ModelSpec):
//!
//! * [`Backend::TauLeap`] works on species totals, drawing one firing count
//!   per channel per step. All rates in the case models depend only on totals,
//!   so under [`RatePolicy::Live`] this has the same law as simulating each
//!   agent, at a cost independent of population size.
//! * [`Backend::PerAgent`] keeps every agent individually, so each agent can
//!   carry the rates it was born with ([`RatePolicy::FrozenAtBirth`]).
//!
//! Whenever some channel would have `rate * dt` above
//! [`EngineConfig::max_rate_dt`], the step is split into equal sub-steps.

mod ensemble;
mod per_agent;
mod tau_leap;

pub use ensemble::{mean_trajectory, run_ensemble, run_replication, Ensemble};
pub use per_agent::{step_per_agent, Agent, AgentPopulation};
pub use tau_leap::step_tau_leap;

use alloc::string::String;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{AbmError, RateError};
use crate::math::one_minus_exp_neg;
use crate::models::ModelSpec;
use crate::rate::{eval_rate, RateExpr};
use crate::types::PopulationState;

/// What happens when a channel fires once.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Effect {
    /// One new agent of the given species appears.
    Spawn(usize),
    /// The firing agent dies.
    RemoveSelf,
    /// A uniformly chosen live agent of the given species dies. Dropped when
    /// that species is empty.
    RemoveRandom(usize),
    /// Net-growth branch: positive rate replicates the agent, negative rate
    /// kills it, in both cases at `|rate|`.
    SignedBranch,
}

/// When an agent's channel rate is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RatePolicy {
    /// Re-evaluated from current totals every step.
    #[default]
    Live,
    /// Evaluated once, at the agent's birth, and kept for life.
    /// Only the per-agent backend can honour this.
    FrozenAtBirth,
}

/// Simulation backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Count-level leaping.
    #[default]
    TauLeap,
    /// Individual agents.
    PerAgent,
}

/// Per-step firing probability for an agent whose channel has rate `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FiringLaw {
    /// `p = r dt`. Expected firings per step equal `r dt` exactly, so the
    /// discrete process keeps the ODE's drift and stationary means.
    #[default]
    Linear,
    /// `p = 1 - exp(-r dt)`, the chance a lone Poisson stream fires at least
    /// once in the step.
    Exponential,
}

impl FiringLaw {
    /// Probability for rate `rate >= 0` over `dt`.
    pub fn probability(self, rate: f64, dt: f64) -> f64 {
        match self {
            FiringLaw::Linear => (rate * dt).min(1.0),
            FiringLaw::Exponential => one_minus_exp_neg(rate * dt),
        }
    }
}

/// One stochastic channel attached to every agent of `source`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSpec {
    /// Human-readable channel name.
    pub name: String,
    /// Species whose agents carry the channel.
    pub source: usize,
    /// Rate per source agent, /day.
    pub rate: RateExpr,
    /// Firing effect.
    pub effect: Effect,
    /// Overrides [`EngineConfig::rate_policy`] when set.
    pub policy: Option<RatePolicy>,
}

impl TransitionSpec {
    /// Channel with the engine's default rate policy.
    pub fn new(name: &str, source: usize, rate: RateExpr, effect: Effect) -> Self {
        TransitionSpec { name: name.into(), source, rate, effect, policy: None }
    }

    /// Drift this channel contributes to each species, given the per-source
    /// rate `rate` and `n` source agents.
    pub(crate) fn add_drift(&self, n: f64, rate: f64, out: &mut [f64]) {
        let flux = n * rate;
        match self.effect {
            Effect::Spawn(j) => out[j] += flux,
            Effect::RemoveSelf => out[self.source] -= flux,
            Effect::RemoveRandom(j) => out[j] -= flux,
            Effect::SignedBranch => out[self.source] += flux,
        }
    }
}

/// Global arrivals of `target` at a total rate, /day (treatment events).
#[derive(Debug, Clone, PartialEq)]
pub struct Influx {
    /// Event name.
    pub name: String,
    /// Species that arrives.
    pub target: usize,
    /// Total arrival rate, /day.
    pub rate: RateExpr,
}

/// Engine settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    /// Base step, days.
    pub dt: f64,
    /// Backend.
    pub backend: Backend,
    /// Default rate policy for channels that do not set one.
    pub rate_policy: RatePolicy,
    /// Largest allowed `rate * dt` before the step is subdivided.
    pub max_rate_dt: f64,
    /// Sampling interval, days; a multiple of `dt`.
    pub sample_every: f64,
    /// Per-step firing probability law.
    pub firing: FiringLaw,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            dt: 0.01,
            backend: Backend::TauLeap,
            rate_policy: RatePolicy::Live,
            max_rate_dt: 0.1,
            sample_every: 1.0,
            firing: FiringLaw::Linear,
        }
    }
}

impl EngineConfig {
    /// Check ranges.
    pub fn validate(self) -> Result<Self, AbmError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(AbmError::InvalidConfig("dt must be positive"));
        }
        if !(self.max_rate_dt > 0.0 && self.max_rate_dt < 1.0) {
            return Err(AbmError::InvalidConfig("max_rate_dt must lie in (0, 1)"));
        }
        if crate::types::integer_ratio(self.sample_every, self.dt).is_none() {
            return Err(AbmError::InvalidConfig("sample_every must be a multiple of dt"));
        }
        Ok(self)
    }

    /// Policy in force for a channel.
    pub fn policy_for(&self, t: &TransitionSpec) -> RatePolicy {
        t.policy.unwrap_or(self.rate_policy)
    }
}

/// Live per-source rate of every channel at `counts`.
pub(crate) fn channel_rates(model: &ModelSpec, counts: &[f64], out: &mut [f64]) -> Result<(), RateError> {
    for (slot, t) in out.iter_mut().zip(&model.transitions) {
        let r = eval_rate(&t.rate, counts, &model.params)?;
        *slot = match t.effect {
            Effect::SignedBranch => r,
            _ => r.max(0.0),
        };
    }
    Ok(())
}

/// Number of sub-steps needed so every `|rate| * dt` stays within the guard.
pub(crate) fn substeps_needed(max_rate: f64, dt: f64, guard: f64) -> Result<u64, AbmError> {
    let ratio = max_rate * dt / guard;
    if !ratio.is_finite() {
        return Err(AbmError::InvalidConfig("channel rate is not finite"));
    }
    if ratio <= 1.0 + 1e-9 {
        return Ok(1);
    }
    let m = crate::math::ceil(ratio);
    if m > 1e7 {
        return Err(AbmError::InvalidConfig("rate guard would need more than 1e7 sub-steps; lower dt"));
    }
    Ok(m as u64)
}

pub(crate) fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    match Poisson::new(mean) {
        Ok(d) => {
            let k: f64 = d.sample(rng);
            k as u64
        }
        Err(_) => 0,
    }
}

/// Arrival count for an influx of total rate `s` over `dt`.
pub fn sample_arrivals<R: Rng + ?Sized>(s: f64, dt: f64, rng: &mut R) -> u64 {
    poisson(s * dt, rng)
}

/// Add `Poisson(s dt)` new agents of species `target` to `state`.
/// Returns the number of arrivals.
pub fn apply_influx<R: Rng + ?Sized>(
    state: &mut PopulationState<u64>,
    target: usize,
    s: f64,
    dt: f64,
    rng: &mut R,
) -> u64 {
    let k = sample_arrivals(s, dt, rng);
    state.values[target] += k;
    k
}

/// Counters from one engine step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepReport {
    /// Removals truncated to keep counts non-negative, or messages dropped
    /// for lack of targets.
    pub clamps: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededStream;
    use alloc::vec::Vec;

    #[test]
    fn zero_influx_never_arrives() {
        let mut rng = SeededStream::new(1);
        let mut st = PopulationState::initial(alloc::vec![0u64, 0]);
        for _ in 0..10_000 {
            apply_influx(&mut st, 1, 0.0, 0.01, &mut rng);
        }
        assert_eq!(st.values, [0, 0]);
    }

    fn mean_arrivals(s: f64, reps: usize) -> (f64, f64) {
        let mut rng = SeededStream::new(99);
        let dt = 0.01;
        let totals: Vec<f64> = (0..reps)
            .map(|_| {
                let mut st = PopulationState::initial(alloc::vec![0u64]);
                for _ in 0..10_000 {
                    apply_influx(&mut st, 0, s, dt, &mut rng);
                }
                st.values[0] as f64
            })
            .collect();
        let mean = totals.iter().sum::<f64>() / reps as f64;
        (mean, crate::math::sqrt(s * 100.0 / reps as f64))
    }

    #[test]
    fn influx_mean_over_hundred_days() {
        // Sum of Poisson(s dt) over 100 days is Poisson(100 s).
        let (mean, se) = mean_arrivals(0.318, 10_000);
        assert!((mean - 31.8).abs() < 3.0 * se, "mean {mean}");
        let (mean, se) = mean_arrivals(0.1181, 10_000);
        assert!((mean - 11.81).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn firing_laws() {
        assert_eq!(FiringLaw::Linear.probability(2.0, 0.01), 0.02);
        assert!((FiringLaw::Exponential.probability(2.0, 0.01) - (1.0 - libm::exp(-0.02))).abs() < 1e-15);
        assert_eq!(FiringLaw::Linear.probability(1e6, 1.0), 1.0);
        assert_eq!(FiringLaw::Exponential.probability(1e6, 1.0), 1.0);
    }

    #[test]
    fn config_validation() {
        assert!(EngineConfig::default().validate().is_ok());
        assert!(EngineConfig { dt: 0.0, ..Default::default() }.validate().is_err());
        assert!(EngineConfig { max_rate_dt: 1.0, ..Default::default() }.validate().is_err());
        assert!(EngineConfig { sample_every: 0.015, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn substep_counts() {
        assert_eq!(substeps_needed(10.0, 0.01, 0.1).unwrap(), 1);
        assert_eq!(substeps_needed(25.0, 0.01, 0.1).unwrap(), 3);
        assert!(substeps_needed(f64::INFINITY, 0.01, 0.1).is_err());
    }
}
