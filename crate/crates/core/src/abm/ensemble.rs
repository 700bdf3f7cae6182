use alloc::vec;
use alloc::vec::Vec;

use super::per_agent::{AgentPopulation, AgentStepper};
use super::tau_leap::TauLeaper;
use super::{substeps_needed, Backend, EngineConfig, RatePolicy};
use crate::error::AbmError;
use crate::models::ModelSpec;
use crate::rng::SeededStream;
use crate::types::{integer_ratio, sample_grid, PopulationState, RunMeta, Trajectory, TrajectoryMode};

/// All replications of one ensemble plus their pointwise mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    /// Replications, in seed order.
    pub runs: Vec<Trajectory>,
    /// Pointwise mean over `runs`, tagged [`TrajectoryMode::AbmMean`].
    pub mean: Trajectory,
    /// Seed of each replication.
    pub seeds: Vec<u64>,
}

impl Ensemble {
    /// Number of replications.
    pub fn len(&self) -> usize {
        self.runs.len()
    }

    /// True when there are no replications.
    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }
}

enum Engine {
    Counts(TauLeaper, Vec<u64>),
    Agents(AgentStepper, AgentPopulation),
}

impl Engine {
    fn counts(&self) -> Vec<u64> {
        match self {
            Engine::Counts(_, c) => c.clone(),
            Engine::Agents(_, pop) => pop.counts(),
        }
    }

    fn raise_peaks(&self, peaks: &mut [f64]) {
        match self {
            Engine::Counts(_, c) => {
                for (p, &v) in peaks.iter_mut().zip(c) {
                    *p = p.max(v as f64);
                }
            }
            Engine::Agents(_, pop) => {
                for (p, a) in peaks.iter_mut().zip(&pop.agents) {
                    *p = p.max(a.len() as f64);
                }
            }
        }
    }
}

/// One stochastic replication from `init` to `horizon`, sampled every
/// `cfg.sample_every` days.
///
/// Each base step of `cfg.dt` is split into the fewest equal sub-steps that
/// keep every live `|rate| * dt` within `cfg.max_rate_dt`. Clamp and
/// sub-step counters and per-species peaks end up in the trajectory's
/// [`RunMeta`].
pub fn run_replication(
    model: &ModelSpec,
    init: &PopulationState<u64>,
    cfg: &EngineConfig,
    horizon: f64,
    mut stream: SeededStream,
) -> Result<Trajectory, AbmError> {
    let cfg = cfg.validate()?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(AbmError::InvalidConfig("horizon must be non-negative"));
    }
    let n_species = model.species.len();
    if init.values.len() != n_species {
        return Err(AbmError::ArityMismatch { expected: n_species, got: init.values.len() });
    }
    let frozen = model.transitions.iter().any(|t| cfg.policy_for(t) == RatePolicy::FrozenAtBirth);
    if frozen && cfg.backend == Backend::TauLeap {
        return Err(AbmError::InvalidConfig("frozen-at-birth rates need the per-agent backend"));
    }

    let grid = sample_grid(horizon, cfg.sample_every);
    let per_sample = integer_ratio(cfg.sample_every, cfg.dt).expect("validated");
    let mut engine = match cfg.backend {
        Backend::TauLeap => Engine::Counts(TauLeaper::new(model), init.values.clone()),
        Backend::PerAgent => Engine::Agents(
            AgentStepper::new(model),
            AgentPopulation::from_counts(model, &cfg, &init.values, init.time)?,
        ),
    };

    let mut traj = Trajectory::with_capacity(model.species.clone(), TrajectoryMode::Abm, grid.len());
    let mut meta = RunMeta {
        peaks: init.values.iter().map(|&v| v as f64).collect(),
        seed: Some(stream.seed()),
        ..RunMeta::default()
    };
    traj.push(grid[0], init.values.iter().map(|&v| v as f64));

    for &t in &grid[1..] {
        for _ in 0..per_sample {
            let max_rate = match &mut engine {
                Engine::Counts(leaper, counts) => leaper.max_rate(model, counts)?,
                Engine::Agents(stepper, pop) => stepper.max_rate(pop, model, &cfg)?,
            };
            let m = substeps_needed(max_rate, cfg.dt, cfg.max_rate_dt)?;
            meta.substeps += m - 1;
            let h = cfg.dt / m as f64;
            for _ in 0..m {
                let report = match &mut engine {
                    Engine::Counts(leaper, counts) => leaper.step(model, &cfg, counts, h, &mut stream)?,
                    Engine::Agents(stepper, pop) => stepper.step(pop, model, &cfg, h, &mut stream)?,
                };
                meta.clamp_events += report.clamps;
                engine.raise_peaks(&mut meta.peaks);
            }
        }
        traj.push(t, engine.counts().into_iter().map(|v| v as f64));
    }
    traj.meta = meta;
    Ok(traj)
}

/// `n_reps` replications with seeds `base_seed + i`, and their pointwise
/// mean. Replications run in parallel when the `std` feature is on; the
/// result does not depend on scheduling.
pub fn run_ensemble(
    model: &ModelSpec,
    init: &PopulationState<u64>,
    cfg: &EngineConfig,
    horizon: f64,
    n_reps: usize,
    base_seed: u64,
) -> Result<Ensemble, AbmError> {
    if n_reps == 0 {
        return Err(AbmError::InvalidConfig("n_reps must be at least 1"));
    }
    let seeds: Vec<u64> = (0..n_reps as u64).map(|i| base_seed.wrapping_add(i)).collect();
    let one = |seed: &u64| run_replication(model, init, cfg, horizon, SeededStream::new(*seed));

    #[cfg(feature = "std")]
    let runs: Result<Vec<Trajectory>, AbmError> = {
        use rayon::prelude::*;
        seeds.par_iter().map(one).collect()
    };
    #[cfg(not(feature = "std"))]
    let runs: Result<Vec<Trajectory>, AbmError> = seeds.iter().map(one).collect();

    let runs = runs?;
    let mean = mean_trajectory(&runs);
    Ok(Ensemble { runs, mean, seeds })
}

/// Pointwise mean of same-grid trajectories, accumulated in slice order.
/// Counters are summed and peaks maximised across runs.
pub fn mean_trajectory(runs: &[Trajectory]) -> Trajectory {
    let first = &runs[0];
    let n = runs.len() as f64;
    let mut columns = vec![vec![0.0; first.len()]; first.species.len()];
    let mut meta = RunMeta { peaks: vec![0.0; first.species.len()], ..RunMeta::default() };
    for run in runs {
        for (acc, col) in columns.iter_mut().zip(&run.columns) {
            for (a, v) in acc.iter_mut().zip(col) {
                *a += v;
            }
        }
        meta.clamp_events += run.meta.clamp_events;
        meta.substeps += run.meta.substeps;
        for (p, q) in meta.peaks.iter_mut().zip(&run.meta.peaks) {
            *p = p.max(*q);
        }
    }
    for col in &mut columns {
        for v in col.iter_mut() {
            *v /= n;
        }
    }
    Trajectory {
        species: first.species.clone(),
        times: first.times.clone(),
        columns,
        mode: TrajectoryMode::AbmMean,
        meta,
    }
}
