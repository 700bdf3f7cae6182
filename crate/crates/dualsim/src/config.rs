//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "scenario": "case1-s2",
//!   "params": { "b": 0.004 },
//!   "init": [100, 5],
//!   "engine": { "dt": 0.01, "backend": "tau-leap", "rate_policy": "live" },
//!   "n_reps": 50,
//!   "horizon": 100,
//!   "seed": 7,
//!   "outputs": { "dir": "out", "plot": true }
//! }
//! ```
//!
//! A custom model replaces `scenario` with `model`:
//!
//! ```json
//! {
//!   "model": {
//!     "name": "logistic",
//!     "species": ["Tumour"],
//!     "params": { "a": 0.5, "K": 200 },
//!     "transitions": [
//!       { "name": "growth", "source": "Tumour", "rate": "a*(1 - T/K)", "effect": "signed_branch" },
//!       { "name": "arrival", "source": "global", "rate": "0.1", "effect": { "spawn": "Tumour" } }
//!     ]
//!   },
//!   "init": { "Tumour": 10 },
//!   "horizon": 50
//! }
//! ```
//!
//! Custom models have no separate ODE; their deterministic trajectory is the
//! drift of the transition table.

use std::collections::BTreeMap;
use std::path::PathBuf;

use dualsim_core::abm::{Backend, Effect, EngineConfig, FiringLaw, Influx, RatePolicy, TransitionSpec};
use dualsim_core::models::{find_scenario, ModelSpec, ScenarioConfig, ScenarioModel};
use dualsim_core::rate::ParamTable;
use dualsim_core::stats::{Pairing, Predicate};
use dualsim_core::{ModelError, ParamError, SpeciesId};
use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

use crate::expr::{parse_rate_expr, ExprError};

/// Configuration failures.
#[derive(Debug, Error)]
pub enum ConfigError {
    /// Not valid JSON.
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        /// 1-based line.
        line: usize,
        /// 1-based column.
        column: usize,
        /// Parser message.
        message: String,
    },
    /// A key the schema does not define, as a dotted path.
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    /// A required key is absent.
    #[error("missing required key: {0}")]
    MissingRequired(&'static str),
    /// A value has the wrong type or is out of range.
    #[error("invalid value: {0}")]
    Invalid(String),
    /// A species name that the model does not declare.
    #[error("undeclared species `{0}`")]
    UndeclaredSpecies(String),
    /// A rate formula did not parse.
    #[error("transition `{transition}`: {source}")]
    Expr {
        /// Channel name.
        transition: String,
        /// Cause.
        source: ExprError,
    },
    /// Parameter override rejected.
    #[error(transparent)]
    Param(#[from] ParamError),
    /// Scenario lookup or model assembly failed.
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Where and what to write.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    /// Output directory; `None` leaves the choice to the caller.
    pub dir: Option<PathBuf>,
    /// Emit SVG charts.
    pub plot: bool,
    /// Write every replication's trajectory.
    pub per_rep: bool,
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDocument {
    /// The scenario to run, defaults filled in.
    pub scenario: ScenarioConfig,
    /// Base seed, if the file sets one.
    pub seed: Option<u64>,
    /// Output settings.
    pub outputs: Outputs,
    /// Rank-sum sample construction.
    pub pairing: Pairing,
    /// Census predicates; `None` means the defaults.
    pub census: Option<Vec<Predicate>>,
}

const TOP_KEYS: &[&str] = &[
    "scenario", "model", "params", "init", "engine", "n_reps", "horizon", "seed", "alpha", "outputs", "pairing",
    "census",
];
const ENGINE_KEYS: &[&str] = &["dt", "backend", "rate_policy", "max_rate_dt", "sample_every", "firing"];
const OUTPUT_KEYS: &[&str] = &["dir", "plot", "per_rep"];
const MODEL_KEYS: &[&str] = &["name", "species", "params", "transitions"];
const TRANSITION_KEYS: &[&str] = &["name", "source", "rate", "effect", "rate_policy"];

fn check_keys(value: &Value, allowed: &[&str], path: &str) -> Result<(), ConfigError> {
    if let Value::Object(map) = value {
        for key in map.keys() {
            if !allowed.contains(&key.as_str()) {
                let full = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
                return Err(ConfigError::UnknownKey(full));
            }
        }
    }
    Ok(())
}

fn check_all_keys(doc: &Value) -> Result<(), ConfigError> {
    check_keys(doc, TOP_KEYS, "")?;
    if let Some(engine) = doc.get("engine") {
        check_keys(engine, ENGINE_KEYS, "engine")?;
    }
    if let Some(outputs) = doc.get("outputs") {
        check_keys(outputs, OUTPUT_KEYS, "outputs")?;
    }
    if let Some(model) = doc.get("model") {
        check_keys(model, MODEL_KEYS, "model")?;
        if let Some(Value::Array(ts)) = model.get("transitions") {
            for (i, t) in ts.iter().enumerate() {
                check_keys(t, TRANSITION_KEYS, &format!("model.transitions[{i}]"))?;
            }
        }
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<String>,
    model: Option<RawModel>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    init: Option<RawInit>,
    engine: Option<RawEngine>,
    n_reps: Option<usize>,
    horizon: Option<f64>,
    seed: Option<u64>,
    alpha: Option<f64>,
    outputs: Option<RawOutputs>,
    pairing: Option<String>,
    census: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    name: Option<String>,
    species: Vec<String>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    transitions: Vec<RawTransition>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransition {
    name: String,
    source: String,
    rate: String,
    effect: RawEffect,
    rate_policy: Option<String>,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawEffect {
    Spawn(String),
    RemoveSelf,
    RemoveRandom(String),
    SignedBranch,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawInit {
    List(Vec<u64>),
    Named(BTreeMap<String, u64>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEngine {
    dt: Option<f64>,
    backend: Option<String>,
    rate_policy: Option<String>,
    max_rate_dt: Option<f64>,
    sample_every: Option<f64>,
    firing: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    dir: Option<PathBuf>,
    #[serde(default)]
    plot: bool,
    #[serde(default)]
    per_rep: bool,
}

/// Parse a backend name: `tau-leap` or `per-agent`.
pub fn parse_backend(s: &str) -> Result<Backend, ConfigError> {
    match s {
        "tau-leap" => Ok(Backend::TauLeap),
        "per-agent" => Ok(Backend::PerAgent),
        other => Err(ConfigError::Invalid(format!("backend `{other}` (expected tau-leap or per-agent)"))),
    }
}

fn parse_policy(s: &str) -> Result<RatePolicy, ConfigError> {
    match s {
        "live" => Ok(RatePolicy::Live),
        "frozen-at-birth" => Ok(RatePolicy::FrozenAtBirth),
        other => Err(ConfigError::Invalid(format!("rate_policy `{other}` (expected live or frozen-at-birth)"))),
    }
}

fn apply_engine(engine: &mut EngineConfig, raw: RawEngine) -> Result<(), ConfigError> {
    if let Some(dt) = raw.dt {
        engine.dt = dt;
    }
    if let Some(b) = raw.backend {
        engine.backend = parse_backend(&b)?;
    }
    if let Some(p) = raw.rate_policy {
        engine.rate_policy = parse_policy(&p)?;
    }
    if let Some(m) = raw.max_rate_dt {
        engine.max_rate_dt = m;
    }
    if let Some(s) = raw.sample_every {
        engine.sample_every = s;
    }
    if let Some(f) = raw.firing {
        engine.firing = match f.as_str() {
            "linear" => FiringLaw::Linear,
            "exponential" => FiringLaw::Exponential,
            other => return Err(ConfigError::Invalid(format!("firing `{other}` (expected linear or exponential)"))),
        };
    }
    engine.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(())
}

fn species_slot(species: &[SpeciesId], name: &str) -> Result<usize, ConfigError> {
    species.iter().position(|s| s.matches(name)).ok_or_else(|| ConfigError::UndeclaredSpecies(name.into()))
}

fn build_custom(raw: RawModel, overrides: &BTreeMap<String, f64>) -> Result<ModelSpec, ConfigError> {
    let species: Vec<SpeciesId> = raw.species.iter().map(|s| SpeciesId::parse(s)).collect();
    let mut params = raw.params;
    for (k, v) in overrides {
        match params.get_mut(k) {
            Some(slot) => *slot = *v,
            None => return Err(ParamError::UnknownParameter(k.clone()).into()),
        }
    }
    let table = ParamTable::from_pairs(params.iter().map(|(k, v)| (k.as_str(), *v)));
    let mut transitions = Vec::new();
    let mut influxes = Vec::new();
    for t in raw.transitions {
        let rate = parse_rate_expr(&t.rate, &table, &species)
            .map_err(|source| ConfigError::Expr { transition: t.name.clone(), source })?;
        if t.source == "global" {
            let RawEffect::Spawn(target) = &t.effect else {
                return Err(ConfigError::Invalid(format!("global transition `{}` must spawn", t.name)));
            };
            let target = species_slot(&species, target)?;
            influxes.push(Influx { name: t.name, target, rate });
            continue;
        }
        let source = species_slot(&species, &t.source)?;
        let effect = match &t.effect {
            RawEffect::Spawn(x) => Effect::Spawn(species_slot(&species, x)?),
            RawEffect::RemoveSelf => Effect::RemoveSelf,
            RawEffect::RemoveRandom(x) => Effect::RemoveRandom(species_slot(&species, x)?),
            RawEffect::SignedBranch => Effect::SignedBranch,
        };
        let mut spec = TransitionSpec::new(&t.name, source, rate, effect);
        spec.policy = t.rate_policy.as_deref().map(parse_policy).transpose()?;
        transitions.push(spec);
    }
    let name = raw.name.unwrap_or_else(|| "custom".into());
    Ok(ModelSpec::from_table(&name, species, table, transitions, influxes)?)
}

fn init_counts(init: RawInit, species: &[SpeciesId]) -> Result<Vec<u64>, ConfigError> {
    match init {
        RawInit::List(v) => {
            if v.len() != species.len() {
                return Err(ConfigError::Invalid(format!(
                    "init has {} values, model declares {} species",
                    v.len(),
                    species.len()
                )));
            }
            Ok(v)
        }
        RawInit::Named(map) => {
            let mut out = vec![0; species.len()];
            for (name, n) in map {
                out[species_slot(species, &name)?] = n;
            }
            Ok(out)
        }
    }
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<ConfigDocument, ConfigError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if !doc.is_object() {
        return Err(ConfigError::Invalid("top level must be an object".into()));
    }
    check_all_keys(&doc)?;
    let raw: RawConfig = serde_json::from_value(doc).map_err(|e| ConfigError::Invalid(e.to_string()))?;

    let mut scenario = match (raw.scenario, raw.model) {
        (_, Some(_)) if raw.init.is_none() => {
            return Err(ConfigError::MissingRequired("init (required for a custom model)"));
        }
        (id, Some(model)) => {
            let spec = build_custom(model, &raw.params)?;
            let base = find_scenario("case0-demo")?;
            ScenarioConfig {
                id: id.unwrap_or_else(|| spec.name.clone()),
                init: vec![0; spec.arity()],
                model: ScenarioModel::Custom(spec),
                ..base
            }
        }
        (Some(id), None) => {
            let mut sc = find_scenario(&id)?;
            if let ScenarioModel::Case(p) = &mut sc.model {
                for (k, v) in &raw.params {
                    p.set(k, *v)?;
                }
                *p = p.validate()?;
            }
            sc
        }
        (None, None) => return Err(ConfigError::MissingRequired("scenario or model")),
    };

    let species = scenario.build_model()?.species;
    if let Some(init) = raw.init {
        scenario.init = init_counts(init, &species)?;
    }
    if let Some(engine) = raw.engine {
        apply_engine(&mut scenario.engine, engine)?;
    }
    if let Some(n) = raw.n_reps {
        if n == 0 {
            return Err(ConfigError::Invalid("n_reps must be at least 1".into()));
        }
        scenario.n_reps = n;
    }
    if let Some(h) = raw.horizon {
        if !(h > 0.0 && h.is_finite()) {
            return Err(ConfigError::Invalid("horizon must be positive".into()));
        }
        scenario.horizon = h;
    }
    if let Some(a) = raw.alpha {
        if !(a > 0.0 && a < 1.0) {
            return Err(ConfigError::Invalid("alpha must lie in (0, 1)".into()));
        }
        scenario.alpha = a;
    }
    let pairing = match raw.pairing.as_deref() {
        None | Some("series") => Pairing::Series,
        Some("endpoints") => Pairing::Endpoints,
        Some(other) => return Err(ConfigError::Invalid(format!("pairing `{other}` (expected series or endpoints)"))),
    };
    let census = raw
        .census
        .map(|list| {
            list.iter()
                .map(|s| Predicate::parse(s).ok_or_else(|| ConfigError::Invalid(format!("census predicate `{s}`"))))
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    if let Some(preds) = &census {
        for p in preds {
            if let Predicate::SpeciesMaxBelow { species: s, .. } = p {
                if !species.contains(s) {
                    return Err(ConfigError::UndeclaredSpecies(s.name().into()));
                }
            }
        }
    }
    let outputs = raw.outputs.map(|o| Outputs { dir: o.dir, plot: o.plot, per_rep: o.per_rep }).unwrap_or_default();

    Ok(ConfigDocument { scenario, seed: raw.seed, outputs, pairing, census })
}

#[cfg(test)]
mod tests {
    use super::*;
    use dualsim_core::params::CaseParams;

    #[test]
    fn registry_scenario_with_seed() {
        let doc = parse_config(r#"{"scenario":"case1-s2","seed":7}"#).unwrap();
        assert_eq!(doc.seed, Some(7));
        let ScenarioModel::Case(CaseParams::Case1(p)) = doc.scenario.model else { panic!() };
        assert_eq!((p.b, p.d), (0.004, 2.0));
    }

    #[test]
    fn empty_document_needs_a_model() {
        assert!(matches!(parse_config("{}"), Err(ConfigError::MissingRequired(_))));
    }

    #[test]
    fn case2_defaults() {
        let doc = parse_config(r#"{"scenario":"case2","n_reps":50}"#).unwrap();
        assert_eq!(doc.scenario.horizon, 600.0);
        assert_eq!(doc.scenario.engine.dt, 0.01);
        assert_eq!(doc.scenario.alpha, 0.05);
        assert_eq!(doc.scenario.n_reps, 50);
    }

    #[test]
    fn syntax_error_has_position() {
        match parse_config("{\n  \"scenario\": ,\n}") {
            Err(ConfigError::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 15)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected_at_any_depth() {
        let e = parse_config(r#"{"scenario":"case2","nreps":5}"#).unwrap_err();
        assert!(matches!(e, ConfigError::UnknownKey(ref k) if k == "nreps"));
        let e = parse_config(r#"{"scenario":"case2","engine":{"step":0.1}}"#).unwrap_err();
        assert!(matches!(e, ConfigError::UnknownKey(ref k) if k == "engine.step"));
    }

    #[test]
    fn overrides_and_engine() {
        let doc = parse_config(
            r#"{"scenario":"case1-s1","params":{"d":0.5},"init":{"T":20},
                "engine":{"backend":"per-agent","rate_policy":"frozen-at-birth","dt":0.005},
                "outputs":{"dir":"o","plot":true},"pairing":"endpoints","census":["tumour-extinct-by(50)"]}"#,
        )
        .unwrap();
        let ScenarioModel::Case(CaseParams::Case1(p)) = doc.scenario.model else { panic!() };
        assert_eq!(p.d, 0.5);
        assert_eq!(doc.scenario.init, [20, 0]);
        assert_eq!(doc.scenario.engine.backend, Backend::PerAgent);
        assert_eq!(doc.scenario.engine.rate_policy, RatePolicy::FrozenAtBirth);
        assert!(doc.outputs.plot);
        assert_eq!(doc.pairing, Pairing::Endpoints);
        assert_eq!(doc.census, Some(vec![Predicate::TumourExtinctBy(50.0)]));
    }

    #[test]
    fn bad_override_and_values() {
        assert!(matches!(
            parse_config(r#"{"scenario":"case2","params":{"zz":1}}"#),
            Err(ConfigError::Param(ParamError::UnknownParameter(_)))
        ));
        assert!(matches!(parse_config(r#"{"scenario":"case2","init":[1,2]}"#), Err(ConfigError::Invalid(_))));
        assert!(matches!(
            parse_config(r#"{"scenario":"case2","engine":{"backend":"gillespie"}}"#),
            Err(ConfigError::Invalid(_))
        ));
        assert!(matches!(parse_config(r#"{"scenario":"nope"}"#), Err(ConfigError::Model(_))));
    }

    const CUSTOM: &str = r#"{
        "model": {
            "name": "logistic",
            "species": ["Tumour"],
            "params": {"a": 0.5, "K": 200},
            "transitions": [
                {"name": "growth", "source": "Tumour", "rate": "a*(1 - T/K)", "effect": "signed_branch"},
                {"name": "arrival", "source": "global", "rate": "0.1", "effect": {"spawn": "Tumour"}}
            ]
        },
        "init": {"Tumour": 10},
        "horizon": 50
    }"#;

    #[test]
    fn custom_model() {
        let doc = parse_config(CUSTOM).unwrap();
        assert_eq!(doc.scenario.id, "logistic");
        assert_eq!(doc.scenario.init, [10]);
        let ScenarioModel::Custom(m) = &doc.scenario.model else { panic!() };
        assert_eq!(m.transitions.len(), 1);
        assert_eq!(m.influxes.len(), 1);
        let drift = m.drift(&[100.0]).unwrap();
        assert!((drift[0] - (0.5 * 100.0 * 0.5 + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn custom_model_errors() {
        let no_init = CUSTOM.replace(r#""init": {"Tumour": 10},"#, "");
        assert!(matches!(parse_config(&no_init), Err(ConfigError::MissingRequired(_))));
        let undeclared = CUSTOM.replace(r#"{"spawn": "Tumour"}"#, r#"{"spawn": "Effector"}"#);
        assert!(matches!(parse_config(&undeclared), Err(ConfigError::UndeclaredSpecies(ref s)) if s == "Effector"));
        let bad_rate = CUSTOM.replace("a*(1 - T/K)", "a*/T");
        assert!(matches!(
            parse_config(&bad_rate),
            Err(ConfigError::Expr { source: ExprError::Syntax { column: 3, .. }, .. })
        ));
        let extra = CUSTOM.replace(r#""effect": "signed_branch""#, r#""effect": "signed_branch", "x": 1"#);
        assert!(matches!(parse_config(&extra), Err(ConfigError::UnknownKey(ref k)) if k == "model.transitions[0].x"));
    }
}
