//! Model definitions: one species list, one ODE right-hand side, and one
//! agent transition table per model, checked against each other.
//!
//! Builders for the four case models live here together with the registry
//! of named scenarios.

mod cases;
mod scenarios;

pub use cases::{
    build_case0, build_case1, build_case1_with, build_case2, build_case2_with, build_case3, build_case3_with,
    build_model,
};
pub use scenarios::{find_scenario, scenario_registry, ScenarioConfig, ScenarioModel};

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::abm::{channel_rates, Influx, TransitionSpec};
use crate::error::{ModelError, RateError};
use crate::ode::RhsFunction;
use crate::params::{Case0Params, Case1Params, Case2Params, Case3Params};
use crate::rate::{eval_rate, ParamTable};
use crate::rng::SeededStream;
use crate::types::SpeciesId;

/// Largest relative drift error accepted at construction.
pub const DRIFT_TOLERANCE: f64 = 1e-9;

/// Number of random states probed by the drift check.
pub const DRIFT_PROBES: usize = 100;

/// Where a model's ODE right-hand side comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelRhs {
    /// Closed-form power-law growth.
    Case0(Case0Params),
    /// Closed-form tumour / effector system.
    Case1(Case1Params),
    /// Closed-form tumour / effector / IL-2 system.
    Case2(Case2Params),
    /// Closed-form tumour / effector / IL-2 / TGF-beta system.
    Case3(Case3Params),
    /// No closed form: the right-hand side is the table's mean drift.
    FromTable,
}

/// A model usable by both engines.
///
/// Construct through the builders or [`ModelSpec::from_table`]; both
/// guarantee that the transition table's mean drift equals the right-hand
/// side.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    /// Short identifier.
    pub name: String,
    /// Species in declaration order.
    pub species: Vec<SpeciesId>,
    /// Parameters referenced by the rate expressions.
    pub params: ParamTable,
    /// ODE right-hand side.
    pub rhs: ModelRhs,
    /// Per-agent channels.
    pub transitions: Vec<TransitionSpec>,
    /// Global arrivals.
    pub influxes: Vec<Influx>,
    /// Where the table departs from the printed model description, and why.
    pub notes: Vec<String>,
}

impl ModelSpec {
    /// Model defined by its transition table alone; its ODE is the table's
    /// mean drift.
    pub fn from_table(
        name: &str,
        species: Vec<SpeciesId>,
        params: ParamTable,
        transitions: Vec<TransitionSpec>,
        influxes: Vec<Influx>,
    ) -> Result<Self, ModelError> {
        Self::assemble(name, species, params, ModelRhs::FromTable, transitions, influxes, Vec::new())
    }

    /// Check references, then run the drift check against `rhs`.
    pub(crate) fn assemble(
        name: &str,
        species: Vec<SpeciesId>,
        params: ParamTable,
        rhs: ModelRhs,
        transitions: Vec<TransitionSpec>,
        influxes: Vec<Influx>,
        notes: Vec<String>,
    ) -> Result<Self, ModelError> {
        for (i, s) in species.iter().enumerate() {
            if species[..i].iter().any(|o| o.name() == s.name()) {
                return Err(ModelError::DuplicateSpecies(s.name().into()));
            }
        }
        let n = species.len();
        for t in &transitions {
            let target_ok = match t.effect {
                crate::abm::Effect::Spawn(j) | crate::abm::Effect::RemoveRandom(j) => j < n,
                _ => true,
            };
            if t.source >= n || !target_ok || t.rate.max_species_ref().is_some_and(|i| i >= n) {
                return Err(ModelError::BadSpeciesRef(t.name.clone()));
            }
        }
        for inf in &influxes {
            if inf.target >= n || inf.rate.max_species_ref().is_some_and(|i| i >= n) {
                return Err(ModelError::BadSpeciesRef(inf.name.clone()));
            }
        }
        let spec = ModelSpec { name: name.into(), species, params, rhs, transitions, influxes, notes };
        spec.check_drift()?;
        Ok(spec)
    }

    /// Number of species.
    pub fn arity(&self) -> usize {
        self.species.len()
    }

    /// Index of a species by name or symbol.
    pub fn species_index(&self, ident: &str) -> Option<usize> {
        self.species.iter().position(|s| s.matches(ident))
    }

    /// Expected change per unit time implied by the table at real-valued
    /// totals `counts`: every channel contributes `count(source) * rate`
    /// along its effect, every influx its rate. Channels whose source is
    /// empty contribute nothing.
    pub fn drift(&self, counts: &[f64]) -> Result<Vec<f64>, RateError> {
        Ok(self.drift_with_scale(counts)?.0)
    }

    /// Drift plus, per species, the sum of absolute contributions (the scale
    /// against which rounding in the drift is judged).
    fn drift_with_scale(&self, counts: &[f64]) -> Result<(Vec<f64>, Vec<f64>), RateError> {
        let mut rates = vec![0.0; self.transitions.len()];
        channel_rates(self, counts, &mut rates)?;
        let mut out = vec![0.0; self.arity()];
        let mut scale = vec![0.0; self.arity()];
        let mut one = vec![0.0; self.arity()];
        for (t, &r) in self.transitions.iter().zip(&rates) {
            let n = counts[t.source];
            if n == 0.0 {
                continue;
            }
            one.iter_mut().for_each(|v| *v = 0.0);
            t.add_drift(n, r, &mut one);
            for ((o, s), v) in out.iter_mut().zip(scale.iter_mut()).zip(&one) {
                *o += v;
                *s += v.abs();
            }
        }
        for inf in &self.influxes {
            let s = eval_rate(&inf.rate, counts, &self.params)?.max(0.0);
            out[inf.target] += s;
            scale[inf.target] += s;
        }
        Ok((out, scale))
    }

    /// Compare the table's drift with the right-hand side at
    /// [`DRIFT_PROBES`] pseudo-random non-negative states.
    ///
    /// States mix exact zeros with magnitudes spread log-uniformly over
    /// `[1e-2, 1e7]`. The relative error per species is
    /// `|a - b| / max(|a|, |b|)`, with the denominator floored at `1e-12`
    /// times the summed magnitude of the individual contributions so that
    /// near-cancellation is not mistaken for a mismatch.
    pub fn check_drift(&self) -> Result<(), ModelError> {
        if self.rhs == ModelRhs::FromTable {
            return Ok(());
        }
        let mut rng = SeededStream::new(0x0d21_f7c4);
        let n = self.arity();
        let mut state = vec![0.0; n];
        let mut dy = vec![0.0; n];
        let mut worst = (0usize, 0.0f64);
        for _ in 0..DRIFT_PROBES {
            for v in state.iter_mut() {
                *v = if rng.random::<f64>() < 0.1 { 0.0 } else { crate::math::powf(10.0, rng.random_range(-2.0..7.0)) };
            }
            self.eval(0.0, &state, &mut dy);
            let (drift, scale) = self.drift_with_scale(&state)?;
            for s in 0..n {
                let (a, b) = (dy[s], drift[s]);
                let den = a.abs().max(b.abs()).max(1e-12 * scale[s]);
                let err = if den == 0.0 { 0.0 } else { (a - b).abs() / den };
                if !(err <= worst.1) {
                    worst = (s, err);
                }
            }
        }
        if !(worst.1 < DRIFT_TOLERANCE) {
            return Err(ModelError::DriftMismatch { species: worst.0, rel_error: worst.1 });
        }
        Ok(())
    }
}

impl RhsFunction for ModelSpec {
    fn arity(&self) -> usize {
        self.species.len()
    }

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        match &self.rhs {
            ModelRhs::Case0(p) => p.eval(t, y, dy),
            ModelRhs::Case1(p) => p.eval(t, y, dy),
            ModelRhs::Case2(p) => p.eval(t, y, dy),
            ModelRhs::Case3(p) => p.eval(t, y, dy),
            ModelRhs::FromTable => {
                let clipped: Vec<f64> = y.iter().map(|v| v.max(0.0)).collect();
                match self.drift(&clipped) {
                    Ok(d) => dy.copy_from_slice(&d),
                    Err(_) => dy.iter_mut().for_each(|v| *v = f64::NAN),
                }
            }
        }
    }
}
