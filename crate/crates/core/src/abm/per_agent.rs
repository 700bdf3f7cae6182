use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use super::{channel_rates, poisson, Effect, EngineConfig, RatePolicy, StepReport};
use crate::error::AbmError;
use crate::models::ModelSpec;
use crate::rate::eval_rate;

/// One individual.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    /// Birth time, days.
    pub birth: f64,
    /// Rates fixed at birth for the channels this agent carries, in the order
    /// those channels appear in the model. Empty unless some channel uses
    /// [`RatePolicy::FrozenAtBirth`].
    pub frozen: Vec<f64>,
}

/// Every live agent, grouped by species.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentPopulation {
    /// Current time, days.
    pub time: f64,
    /// `agents[s]` holds the live agents of species `s`.
    pub agents: Vec<Vec<Agent>>,
}

impl AgentPopulation {
    /// Population with `counts[s]` agents of each species, all born at `time`.
    pub fn from_counts(model: &ModelSpec, cfg: &EngineConfig, counts: &[u64], time: f64) -> Result<Self, AbmError> {
        if counts.len() != model.species.len() {
            return Err(AbmError::ArityMismatch { expected: model.species.len(), got: counts.len() });
        }
        let mut pop = AgentPopulation { time, agents: vec![Vec::new(); counts.len()] };
        let frozen = FrozenRates::at(model, cfg, counts)?;
        for (s, &n) in counts.iter().enumerate() {
            pop.agents[s].extend((0..n).map(|_| Agent { birth: time, frozen: frozen.for_species(s) }));
        }
        Ok(pop)
    }

    /// Live count per species.
    pub fn counts(&self) -> Vec<u64> {
        self.agents.iter().map(|a| a.len() as u64).collect()
    }
}

/// Channel rates evaluated at one state, split by source species.
struct FrozenRates {
    per_species: Vec<Vec<f64>>,
}

impl FrozenRates {
    fn at(model: &ModelSpec, cfg: &EngineConfig, counts: &[u64]) -> Result<Self, AbmError> {
        let any_frozen = model.transitions.iter().any(|t| cfg.policy_for(t) == RatePolicy::FrozenAtBirth);
        let mut per_species = vec![Vec::new(); counts.len()];
        if any_frozen {
            let real: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
            let mut rates = vec![0.0; model.transitions.len()];
            channel_rates(model, &real, &mut rates)?;
            for (t, r) in model.transitions.iter().zip(rates) {
                per_species[t.source].push(r);
            }
        }
        Ok(FrozenRates { per_species })
    }

    fn for_species(&self, s: usize) -> Vec<f64> {
        self.per_species[s].clone()
    }
}

/// Advance every agent by one step of length `dt`.
///
/// Species are visited in declaration order, agents in storage order, and
/// each agent's channels in declaration order. A channel fires with
/// probability `p(|rate|, dt)`. An agent removed earlier in the step (by
/// itself or by a message) fires nothing further. Message targets are drawn
/// uniformly among agents still alive; with no target the message is
/// dropped. Newborns and influx arrivals join at the end of the step.
pub fn step_per_agent<R: Rng + ?Sized>(
    pop: &mut AgentPopulation,
    model: &ModelSpec,
    cfg: &EngineConfig,
    dt: f64,
    rng: &mut R,
) -> Result<StepReport, AbmError> {
    AgentStepper::new(model).step(pop, model, cfg, dt, rng)
}

pub(crate) struct AgentStepper {
    by_source: Vec<Vec<usize>>,
    rates: Vec<f64>,
}

impl AgentStepper {
    pub(crate) fn new(model: &ModelSpec) -> Self {
        let mut by_source = vec![Vec::new(); model.species.len()];
        for (k, t) in model.transitions.iter().enumerate() {
            by_source[t.source].push(k);
        }
        AgentStepper { by_source, rates: vec![0.0; model.transitions.len()] }
    }

    pub(crate) fn max_rate(
        &mut self,
        pop: &AgentPopulation,
        model: &ModelSpec,
        cfg: &EngineConfig,
    ) -> Result<f64, AbmError> {
        let real: Vec<f64> = pop.agents.iter().map(|a| a.len() as f64).collect();
        channel_rates(model, &real, &mut self.rates)?;
        let mut max = 0.0f64;
        for (s, channels) in self.by_source.iter().enumerate() {
            if pop.agents[s].is_empty() {
                continue;
            }
            for (local, &k) in channels.iter().enumerate() {
                if cfg.policy_for(&model.transitions[k]) == RatePolicy::FrozenAtBirth {
                    for a in &pop.agents[s] {
                        max = max.max(a.frozen[local].abs());
                    }
                } else {
                    max = max.max(self.rates[k].abs());
                }
            }
        }
        Ok(max)
    }

    pub(crate) fn step<R: Rng + ?Sized>(
        &mut self,
        pop: &mut AgentPopulation,
        model: &ModelSpec,
        cfg: &EngineConfig,
        dt: f64,
        rng: &mut R,
    ) -> Result<StepReport, AbmError> {
        let n_species = model.species.len();
        if pop.agents.len() != n_species {
            return Err(AbmError::ArityMismatch { expected: n_species, got: pop.agents.len() });
        }
        let real: Vec<f64> = pop.agents.iter().map(|a| a.len() as f64).collect();
        channel_rates(model, &real, &mut self.rates)?;

        let mut live = LiveSet::new(&pop.agents);
        let mut births = vec![0u64; n_species];
        let mut report = StepReport::default();

        for s in 0..n_species {
            for idx in 0..pop.agents[s].len() {
                for (local, &k) in self.by_source[s].iter().enumerate() {
                    if live.is_removed(s, idx) {
                        break;
                    }
                    let t = &model.transitions[k];
                    let rate = match cfg.policy_for(t) {
                        RatePolicy::Live => self.rates[k],
                        RatePolicy::FrozenAtBirth => pop.agents[s][idx].frozen[local],
                    };
                    if rate == 0.0 {
                        continue;
                    }
                    let p = cfg.firing.probability(rate.abs(), dt);
                    if rng.random::<f64>() >= p {
                        continue;
                    }
                    match t.effect {
                        Effect::Spawn(j) => births[j] += 1,
                        Effect::RemoveSelf => live.remove(s, idx),
                        Effect::RemoveRandom(j) => match live.pick(j, rng) {
                            Some(victim) => live.remove(j, victim),
                            None => report.clamps += 1,
                        },
                        Effect::SignedBranch if rate > 0.0 => births[s] += 1,
                        Effect::SignedBranch => live.remove(s, idx),
                    }
                }
            }
        }

        for inf in &model.influxes {
            let s = eval_rate(&inf.rate, &real, &model.params)?.max(0.0);
            births[inf.target] += poisson(s * dt, rng);
        }

        for (s, agents) in pop.agents.iter_mut().enumerate() {
            let removed = &live.removed[s];
            let mut i = 0;
            agents.retain(|_| {
                let keep = !removed[i];
                i += 1;
                keep
            });
        }
        pop.time += dt;
        if births.iter().any(|&b| b > 0) {
            let after: Vec<u64> = pop.agents.iter().zip(&births).map(|(a, &b)| a.len() as u64 + b).collect();
            let frozen = FrozenRates::at(model, cfg, &after)?;
            for (s, &b) in births.iter().enumerate() {
                let birth = pop.time;
                pop.agents[s].extend((0..b).map(|_| Agent { birth, frozen: frozen.for_species(s) }));
            }
        }
        Ok(report)
    }
}

/// Live-agent bookkeeping for one step: O(1) uniform pick and removal.
struct LiveSet {
    removed: Vec<Vec<bool>>,
    alive: Vec<Vec<u32>>,
    pos: Vec<Vec<u32>>,
}

impl LiveSet {
    fn new(agents: &[Vec<Agent>]) -> Self {
        LiveSet {
            removed: agents.iter().map(|a| vec![false; a.len()]).collect(),
            alive: agents.iter().map(|a| (0..a.len() as u32).collect()).collect(),
            pos: agents.iter().map(|a| (0..a.len() as u32).collect()).collect(),
        }
    }

    fn is_removed(&self, s: usize, idx: usize) -> bool {
        self.removed[s][idx]
    }

    fn pick<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> Option<usize> {
        let live = &self.alive[s];
        (!live.is_empty()).then(|| live[rng.random_range(0..live.len())] as usize)
    }

    fn remove(&mut self, s: usize, idx: usize) {
        if self.removed[s][idx] {
            return;
        }
        self.removed[s][idx] = true;
        let p = self.pos[s][idx] as usize;
        let last = *self.alive[s].last().expect("live agent present");
        self.alive[s].swap_remove(p);
        if p < self.alive[s].len() {
            self.pos[s][last as usize] = p as u32;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abm::{FiringLaw, TransitionSpec};
    use crate::models::ModelSpec;
    use crate::rate::{ParamTable, RateExpr};
    use crate::rng::SeededStream;
    use crate::types::SpeciesId;

    fn one_channel(rate: f64, effect: Effect, species: usize) -> ModelSpec {
        let sp: Vec<SpeciesId> = [SpeciesId::Tumour, SpeciesId::Effector][..species].to_vec();
        ModelSpec::from_table(
            "single",
            sp,
            ParamTable::from_pairs([("r", rate)]),
            vec![TransitionSpec::new("ch", 0, RateExpr::param(0), effect)],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn survival_matches_exponential_law() {
        let r = 0.5;
        let dt = 0.01;
        let steps = 100;
        let model = one_channel(r, Effect::RemoveSelf, 1);
        let reps = 10_000;
        let expected = libm::exp(-r * steps as f64 * dt);
        let half_width = 3.0 * libm::sqrt(expected * (1.0 - expected) / reps as f64);
        for law in [FiringLaw::Exponential, FiringLaw::Linear] {
            let cfg = EngineConfig { firing: law, ..Default::default() };
            let mut rng = SeededStream::new(77);
            let mut stepper = AgentStepper::new(&model);
            let mut alive = 0;
            for _ in 0..reps {
                let mut pop = AgentPopulation::from_counts(&model, &cfg, &[1], 0.0).unwrap();
                for _ in 0..steps {
                    stepper.step(&mut pop, &model, &cfg, dt, &mut rng).unwrap();
                }
                alive += pop.counts()[0];
            }
            let frac = alive as f64 / reps as f64;
            assert!((frac - expected).abs() < half_width, "{law:?}: {frac} vs {expected}");
        }
    }

    #[test]
    fn message_without_targets_is_dropped() {
        let model = one_channel(1e3, Effect::RemoveRandom(1), 2);
        let cfg = EngineConfig::default();
        let mut pop = AgentPopulation::from_counts(&model, &cfg, &[4, 0], 0.0).unwrap();
        let mut rng = SeededStream::new(1);
        let report = step_per_agent(&mut pop, &model, &cfg, 0.01, &mut rng).unwrap();
        assert_eq!(pop.counts(), [4, 0]);
        assert_eq!(report.clamps, 4);
    }

    #[test]
    fn messages_remove_distinct_targets() {
        let model = one_channel(1e3, Effect::RemoveRandom(1), 2);
        let cfg = EngineConfig::default();
        let mut pop = AgentPopulation::from_counts(&model, &cfg, &[3, 5], 0.0).unwrap();
        let mut rng = SeededStream::new(1);
        step_per_agent(&mut pop, &model, &cfg, 0.01, &mut rng).unwrap();
        assert_eq!(pop.counts(), [3, 2]);
    }

    #[test]
    fn removed_agent_fires_nothing_more() {
        // die first, then a certain spawn: a dead agent must not reproduce.
        let model = ModelSpec::from_table(
            "order",
            vec![SpeciesId::Tumour],
            ParamTable::from_pairs([("r", 1e3)]),
            vec![
                TransitionSpec::new("die", 0, RateExpr::param(0), Effect::RemoveSelf),
                TransitionSpec::new("split", 0, RateExpr::param(0), Effect::Spawn(0)),
            ],
            vec![],
        )
        .unwrap();
        let cfg = EngineConfig::default();
        let mut pop = AgentPopulation::from_counts(&model, &cfg, &[10], 0.0).unwrap();
        step_per_agent(&mut pop, &model, &cfg, 0.01, &mut SeededStream::new(4)).unwrap();
        assert_eq!(pop.counts(), [0]);
    }

    #[test]
    fn newborns_carry_birth_time_and_frozen_rates() {
        let model = ModelSpec::from_table(
            "logistic",
            vec![SpeciesId::Tumour],
            ParamTable::from_pairs([("a", 50.0), ("b", 0.01)]),
            vec![TransitionSpec::new(
                "net",
                0,
                RateExpr::param(0) * (RateExpr::constant(1.0) - RateExpr::param(1) * RateExpr::count(0)),
                Effect::SignedBranch,
            )],
            vec![],
        )
        .unwrap();
        let cfg = EngineConfig { rate_policy: RatePolicy::FrozenAtBirth, ..Default::default() };
        let mut pop = AgentPopulation::from_counts(&model, &cfg, &[10], 0.0).unwrap();
        assert_eq!(pop.agents[0][0].frozen, [50.0 * 0.9]);
        let mut rng = SeededStream::new(8);
        step_per_agent(&mut pop, &model, &cfg, 0.01, &mut rng).unwrap();
        let n = pop.agents[0].len();
        assert!(n > 10);
        let newborn = &pop.agents[0][n - 1];
        assert_eq!(newborn.birth, 0.01);
        let expected = 50.0 * (1.0 - 0.01 * n as f64);
        assert!((newborn.frozen[0] - expected).abs() < 1e-12);
        assert_eq!(pop.agents[0][0].frozen, [45.0]);
    }
}
