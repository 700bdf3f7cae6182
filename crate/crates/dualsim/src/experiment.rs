//! End-to-end experiment: ODE baseline, agent ensemble, comparison, census.

use std::time::{Duration, Instant};

use dualsim_core::abm::{run_ensemble, Ensemble};
use dualsim_core::models::{ModelSpec, ScenarioConfig};
use dualsim_core::ode::integrate_fixed;
use dualsim_core::rng::splitmix64;
use dualsim_core::stats::{
    compare_endpoints, compare_trajectories, extreme_case_census, CensusRow, ComparisonReport, Pairing, Predicate,
};
use dualsim_core::{AbmError, ModelError, OdeError, SpeciesId, StatsError, Trajectory};
use thiserror::Error;

/// Failure of one experiment, tagged with its scenario.
#[derive(Debug, Error)]
pub enum ExperimentError {
    /// Model construction failed.
    #[error("{scenario}: {source}")]
    Model {
        /// Scenario id.
        scenario: String,
        /// Cause.
        source: ModelError,
    },
    /// ODE integration failed.
    #[error("{scenario}: ODE integration failed: {source}")]
    Ode {
        /// Scenario id.
        scenario: String,
        /// Cause.
        source: OdeError,
    },
    /// Agent simulation failed.
    #[error("{scenario}: agent simulation failed: {source}")]
    Abm {
        /// Scenario id.
        scenario: String,
        /// Cause.
        source: AbmError,
    },
    /// Comparison failed.
    #[error("{scenario}: comparison failed: {source}")]
    Stats {
        /// Scenario id.
        scenario: String,
        /// Cause.
        source: StatsError,
    },
    /// Scenario settings are inconsistent.
    #[error("{scenario}: {message}")]
    Invalid {
        /// Scenario id.
        scenario: String,
        /// What is wrong.
        message: String,
    },
}

/// Knobs that are not part of the scenario itself.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOptions {
    /// How the rank-sum samples are formed.
    pub pairing: Pairing,
    /// Census predicates; `None` picks [`default_predicates`].
    pub predicates: Option<Vec<Predicate>>,
    /// Keep per-replication trajectories in the result.
    pub keep_runs: bool,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions { pairing: Pairing::Series, predicates: None, keep_runs: true }
    }
}

/// Everything one experiment produced.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    /// Scenario id.
    pub scenario: String,
    /// Seed the ensemble seeds were counted from.
    pub base_seed: u64,
    /// Model that was run.
    pub model: ModelSpec,
    /// Deterministic trajectory.
    pub ode: Trajectory,
    /// Agent ensemble. `runs` is empty when per-replication output was not
    /// kept.
    pub ensemble: Ensemble,
    /// Paradigm comparison.
    pub report: ComparisonReport,
    /// Extreme-case frequencies.
    pub census: Vec<CensusRow>,
    /// Non-fatal observations, e.g. clamping.
    pub warnings: Vec<String>,
    /// Time spent.
    pub wall_clock: Duration,
}

/// Predicates reported by default: tumour extinction by day 200 (or the
/// horizon, if shorter) and by the horizon, effector extinction by the
/// horizon, and for models with TGF-beta the events "never produced" and
/// "never more than 2 molecules at once".
pub fn default_predicates(species: &[SpeciesId], horizon: f64) -> Vec<Predicate> {
    let mut out = vec![Predicate::TumourExtinctBy(horizon.min(200.0))];
    if horizon > 200.0 {
        out.push(Predicate::TumourExtinctBy(horizon));
    }
    if species.contains(&SpeciesId::Effector) {
        out.push(Predicate::EffectorExtinctBy(horizon));
    }
    if species.contains(&SpeciesId::TGFBeta) {
        out.push(Predicate::SpeciesMaxBelow { species: SpeciesId::TGFBeta, bound: 1.0 });
        out.push(Predicate::SpeciesMaxBelow { species: SpeciesId::TGFBeta, bound: 3.0 });
    }
    out
}

/// Run a scenario with default options.
pub fn run_experiment(config: &ScenarioConfig, base_seed: u64) -> Result<ExperimentResult, ExperimentError> {
    run_experiment_with(config, base_seed, &ExperimentOptions::default())
}

/// Run a scenario: integrate the ODE with RK4 at the engine step, run the
/// ensemble with seeds `base_seed + i`, compare, and take the census.
pub fn run_experiment_with(
    config: &ScenarioConfig,
    base_seed: u64,
    options: &ExperimentOptions,
) -> Result<ExperimentResult, ExperimentError> {
    let started = Instant::now();
    let scenario = config.id.clone();
    let invalid = |message: &str| ExperimentError::Invalid { scenario: scenario.clone(), message: message.into() };
    if !(config.horizon > 0.0 && config.horizon.is_finite()) {
        return Err(invalid("horizon must be positive"));
    }
    if config.n_reps == 0 {
        return Err(invalid("n_reps must be at least 1"));
    }
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(invalid("alpha must lie in (0, 1)"));
    }
    let model = config.build_model().map_err(|source| ExperimentError::Model { scenario: scenario.clone(), source })?;
    if config.init.len() != model.arity() {
        return Err(invalid(&format!(
            "initial state has {} values, model declares {} species",
            config.init.len(),
            model.arity()
        )));
    }
    let engine =
        config.engine.validate().map_err(|source| ExperimentError::Abm { scenario: scenario.clone(), source })?;

    let init = config.initial_state();
    let ode = integrate_fixed(&model, &model.species, &init.to_real(), config.horizon, engine.dt, engine.sample_every)
        .map_err(|source| ExperimentError::Ode { scenario: scenario.clone(), source })?;
    let mut ensemble = run_ensemble(&model, &init, &engine, config.horizon, config.n_reps, base_seed)
        .map_err(|source| ExperimentError::Abm { scenario: scenario.clone(), source })?;

    let stats_err = |source| ExperimentError::Stats { scenario: scenario.clone(), source };
    let mut report = match options.pairing {
        Pairing::Series => compare_trajectories(&ode, &ensemble.mean, config.alpha),
        Pairing::Endpoints => compare_endpoints(&ode, &ensemble.runs, config.alpha),
    }
    .map_err(stats_err)?;
    report.scenario = Some(scenario.clone());
    report.seeds = ensemble.seeds.clone();

    let predicates = options.predicates.clone().unwrap_or_else(|| default_predicates(&model.species, config.horizon));
    let census = extreme_case_census(&ensemble.runs, &predicates).map_err(stats_err)?;

    let mut warnings = Vec::new();
    if ode.meta.clamp_events > 0 {
        warnings.push(format!("ODE state clamped at zero {} times", ode.meta.clamp_events));
    }
    if ensemble.mean.meta.clamp_events > 0 {
        warnings.push(format!(
            "{} agent removals or messages dropped for lack of targets",
            ensemble.mean.meta.clamp_events
        ));
    }
    if ensemble.mean.meta.substeps > 0 {
        warnings.push(format!("rate guard inserted {} extra sub-steps", ensemble.mean.meta.substeps));
    }
    if !options.keep_runs {
        ensemble.runs.clear();
    }

    Ok(ExperimentResult {
        scenario,
        base_seed,
        model,
        ode,
        ensemble,
        report,
        census,
        warnings,
        wall_clock: started.elapsed(),
    })
}

/// Seed for scenario `id` inside a sweep: `base_seed` XOR a SplitMix64 mix
/// of the FNV-1a hash of the id. Depends on the id, not on list position.
pub fn derive_seed(base_seed: u64, id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    base_seed ^ splitmix64(h)
}

/// Run each scenario independently with its derived seed. A failing
/// scenario yields an error entry and does not stop the others.
pub fn sweep(configs: &[ScenarioConfig], base_seed: u64) -> Vec<Result<ExperimentResult, ExperimentError>> {
    configs.iter().map(|c| run_experiment(c, derive_seed(base_seed, &c.id))).collect()
}
