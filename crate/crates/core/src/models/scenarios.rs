use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{build_model, ModelSpec};
use crate::abm::EngineConfig;
use crate::error::ModelError;
use crate::params::{Case0Params, Case1Params, Case2Params, Case3Params, CaseParams};
use crate::types::PopulationState;

/// What a scenario simulates.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioModel {
    /// One of the built-in case models.
    Case(CaseParams),
    /// A model assembled from a user transition table.
    Custom(ModelSpec),
}

/// Everything needed to run one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Registry name, e.g. `case1-s2`.
    pub id: String,
    /// Model and its parameters.
    pub model: ScenarioModel,
    /// Initial counts, in the model's species order.
    pub init: Vec<u64>,
    /// Simulated days.
    pub horizon: f64,
    /// Agent engine settings.
    pub engine: EngineConfig,
    /// Replications per ensemble.
    pub n_reps: usize,
    /// Significance level for the paradigm comparison.
    pub alpha: f64,
}

impl ScenarioConfig {
    fn case(id: &str, params: CaseParams, init: Vec<u64>, horizon: f64) -> Self {
        ScenarioConfig {
            id: id.into(),
            model: ScenarioModel::Case(params),
            init,
            horizon,
            engine: EngineConfig::default(),
            n_reps: 50,
            alpha: 0.05,
        }
    }

    /// Build (or clone) the model.
    pub fn build_model(&self) -> Result<ModelSpec, ModelError> {
        match &self.model {
            ScenarioModel::Case(p) => build_model(p),
            ScenarioModel::Custom(m) => Ok(m.clone()),
        }
    }

    /// Initial agent counts at `t = 0`.
    pub fn initial_state(&self) -> PopulationState<u64> {
        PopulationState::initial(self.init.clone())
    }

    /// Case 2 started from populations two orders of magnitude smaller than
    /// the default. Not part of the registry; its behaviour has no
    /// published reference.
    pub fn small_case2() -> Self {
        Self::case("small-case2", CaseParams::Case2(Case2Params::default()), vec![100, 10, 10], 600.0)
    }
}

/// The built-in scenarios: a power-law demo, the four treatment scenarios
/// of the tumour / effector model, and the IL-2 and TGF-beta models.
///
/// Initial populations have no published values. Tumour / effector runs
/// start from 100 tumour cells and 5 effectors; the larger models from
/// 1e4 tumour cells, 1e3 effectors, 1e3 IL-2 and no TGF-beta.
pub fn scenario_registry() -> Vec<ScenarioConfig> {
    let mut out = vec![ScenarioConfig::case("case0-demo", CaseParams::Case0(Case0Params::default()), vec![10], 100.0)];
    for s in 1..=4u8 {
        let p = Case1Params::scenario(s).expect("scenarios 1-4 exist");
        out.push(ScenarioConfig::case(&alloc::format!("case1-s{s}"), CaseParams::Case1(p), vec![100, 5], 100.0));
    }
    out.push(ScenarioConfig::case(
        "case2",
        CaseParams::Case2(Case2Params::default()),
        vec![10_000, 1_000, 1_000],
        600.0,
    ));
    out.push(ScenarioConfig::case(
        "case3",
        CaseParams::Case3(Case3Params::default()),
        vec![10_000, 1_000, 1_000, 0],
        600.0,
    ));
    out
}

/// Registry entry by id.
pub fn find_scenario(id: &str) -> Result<ScenarioConfig, ModelError> {
    scenario_registry().into_iter().find(|s| s.id == id).ok_or_else(|| ModelError::UnknownScenario(id.into()))
}
