//! Value types shared by the ODE and agent engines.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Name of one population in a model. Declaration order fixes the column
/// order of every trajectory produced from that model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpeciesId {
    /// Tumour cells, `T`.
    Tumour,
    /// Immune effector cells, `E`.
    Effector,
    /// Interleukin-2 molecules, `I`.
    IL2,
    /// TGF-beta molecules, `S`.
    TGFBeta,
    /// Any model-scoped extra population.
    Other(String),
}

impl SpeciesId {
    /// Column name used in CSV headers and reports.
    pub fn name(&self) -> &str {
        match self {
            SpeciesId::Tumour => "Tumour",
            SpeciesId::Effector => "Effector",
            SpeciesId::IL2 => "IL2",
            SpeciesId::TGFBeta => "TGFBeta",
            SpeciesId::Other(name) => name,
        }
    }

    /// Single-letter symbol used in rate formulas (`T`, `E`, `I`, `S`).
    pub fn symbol(&self) -> &str {
        match self {
            SpeciesId::Tumour => "T",
            SpeciesId::Effector => "E",
            SpeciesId::IL2 => "I",
            SpeciesId::TGFBeta => "S",
            SpeciesId::Other(name) => name,
        }
    }

    /// Resolve a name or symbol back to an id. Unknown names become `Other`.
    pub fn parse(name: &str) -> SpeciesId {
        match name {
            "Tumour" | "Tumor" | "T" => SpeciesId::Tumour,
            "Effector" | "E" => SpeciesId::Effector,
            "IL2" | "IL-2" | "I" => SpeciesId::IL2,
            "TGFBeta" | "TGF-beta" | "S" => SpeciesId::TGFBeta,
            other => SpeciesId::Other(other.into()),
        }
    }

    /// True if `ident` is this species' name or symbol.
    pub fn matches(&self, ident: &str) -> bool {
        self.name() == ident || self.symbol() == ident
    }
}

impl fmt::Display for SpeciesId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Quantities of every species at one instant. `V = f64` for ODE states,
/// `V = u64` for agent counts.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationState<V> {
    /// Time in days.
    pub time: f64,
    /// One entry per species, in declaration order.
    pub values: Vec<V>,
}

impl<V> PopulationState<V> {
    /// State at `t = 0`.
    pub fn initial(values: Vec<V>) -> Self {
        PopulationState { time: 0.0, values }
    }
}

impl PopulationState<u64> {
    /// Real-valued copy, e.g. for seeding an ODE run from agent counts.
    pub fn to_real(&self) -> PopulationState<f64> {
        PopulationState { time: self.time, values: self.values.iter().map(|&v| v as f64).collect() }
    }
}

/// Which engine produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryMode {
    /// Deterministic integration; real values.
    Ode,
    /// One stochastic replication; whole agents only.
    Abm,
    /// Pointwise mean over stochastic replications; real values.
    AbmMean,
}

/// Counters collected while a trajectory was produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunMeta {
    /// Number of times a component was clamped at zero (ODE) or a removal
    /// was truncated to keep a count non-negative (agents).
    pub clamp_events: u64,
    /// Number of extra sub-steps inserted by the rate guard.
    pub substeps: u64,
    /// Largest value each species reached at any internal step, not just at
    /// sample times. Empty when not tracked.
    pub peaks: Vec<f64>,
    /// Seed of the stream that drove the run, if stochastic.
    pub seed: Option<u64>,
}

/// A sampled time series for every species of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Column names, in model declaration order.
    pub species: Vec<SpeciesId>,
    /// Sample times in days, strictly increasing.
    pub times: Vec<f64>,
    /// `columns[s][k]` is species `s` at `times[k]`.
    pub columns: Vec<Vec<f64>>,
    /// Producer tag.
    pub mode: TrajectoryMode,
    /// Run counters.
    pub meta: RunMeta,
}

impl Trajectory {
    /// Empty trajectory with preallocated columns.
    pub fn with_capacity(species: Vec<SpeciesId>, mode: TrajectoryMode, samples: usize) -> Self {
        let columns = species.iter().map(|_| Vec::with_capacity(samples)).collect();
        Trajectory { species, times: Vec::with_capacity(samples), columns, mode, meta: RunMeta::default() }
    }

    /// Append one sample row.
    pub fn push(&mut self, time: f64, values: impl IntoIterator<Item = f64>) {
        self.times.push(time);
        for (col, v) in self.columns.iter_mut().zip(values) {
            col.push(v);
        }
    }

    /// Number of sample times.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// True when there are no samples.
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Column index of a species.
    pub fn species_index(&self, id: &SpeciesId) -> Option<usize> {
        self.species.iter().position(|s| s == id)
    }

    /// Column for a species, if present.
    pub fn column(&self, id: &SpeciesId) -> Option<&[f64]> {
        self.species_index(id).map(|i| self.columns[i].as_slice())
    }

    /// All species at sample `k`.
    pub fn row(&self, k: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[k]).collect()
    }

    /// Last sampled row, if any.
    pub fn final_row(&self) -> Option<Vec<f64>> {
        (!self.is_empty()).then(|| self.row(self.len() - 1))
    }

    /// Value of species `s` at the latest sample with time `<= t`.
    pub fn value_at(&self, s: usize, t: f64) -> Option<f64> {
        let k = self.times.iter().rposition(|&x| x <= t + 1e-9)?;
        Some(self.columns[s][k])
    }
}

/// Uniform sample grid `0, h, 2h, ...` up to and including `t_end` (within
/// a relative slack of 1e-9 steps). Each time is computed as `k * h`.
pub fn sample_grid(t_end: f64, every: f64) -> Vec<f64> {
    let n = crate::math::floor(t_end / every + 1e-9) as usize;
    (0..=n).map(|k| k as f64 * every).collect()
}

/// `Some(n)` if `outer` is an integer multiple `n >= 1` of `inner`.
pub(crate) fn integer_ratio(outer: f64, inner: f64) -> Option<usize> {
    let r = outer / inner;
    let n = crate::math::round(r);
    (n >= 1.0 && (r - n).abs() <= 1e-9 * n.max(1.0)).then_some(n as usize)
}
