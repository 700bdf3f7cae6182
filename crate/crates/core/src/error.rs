//! Error types, one enum per subsystem.

use alloc::string::String;
use thiserror::Error;

/// Parameter validation failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    /// A field that must be non-negative (or positive) is negative or not finite.
    #[error("parameter `{0}` must be a finite non-negative number")]
    NegativeParameter(&'static str),
    /// An exponent that must be strictly positive is zero or negative.
    #[error("parameter `{0}` must be strictly positive")]
    NonPositiveParameter(&'static str),
    /// A half-saturation constant or scale (g, K, theta, ...) is zero.
    #[error("parameter `{0}` is used as a denominator and must be positive")]
    ZeroDenominator(&'static str),
    /// Name lookup for an override failed.
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
}

/// ODE evaluation and integration failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    /// A state component handed to a right-hand side was negative.
    #[error("state component {index} is negative ({value})")]
    NegativeState {
        /// Species index.
        index: usize,
        /// Offending value.
        value: f64,
    },
    /// The state length does not match the system arity.
    #[error("expected {expected} state components, got {got}")]
    ArityMismatch {
        /// Species count of the system.
        expected: usize,
        /// Length that was supplied.
        got: usize,
    },
    /// NaN or infinity appeared; usually means the step is too large.
    #[error("non-finite state at t = {time}; try a smaller step")]
    NonFiniteState {
        /// Time at which the bad value was detected.
        time: f64,
    },
    /// Adaptive step size collapsed.
    #[error("step size underflow at t = {time}")]
    StepUnderflow {
        /// Time at which the step became too small.
        time: f64,
    },
    /// Bad step, horizon, sampling interval, or tolerance.
    #[error("invalid integrator setting: {0}")]
    InvalidSetting(&'static str),
}

/// Rate expression evaluation failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateError {
    /// A denominator evaluated to exactly zero.
    #[error("division by zero while evaluating a rate")]
    DivisionByZero,
    /// Expression references a parameter or species slot that does not exist.
    #[error("rate expression references missing slot {0}")]
    MissingSlot(usize),
}

/// Agent engine failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AbmError {
    /// Engine configuration is out of range.
    #[error("invalid engine setting: {0}")]
    InvalidConfig(&'static str),
    /// Initial population has the wrong number of species.
    #[error("initial state has {got} species, model declares {expected}")]
    ArityMismatch {
        /// Species count declared by the model.
        expected: usize,
        /// Length that was supplied.
        got: usize,
    },
    /// A rate could not be evaluated.
    #[error(transparent)]
    Rate(#[from] RateError),
}

/// Model construction failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// Parameters failed validation.
    #[error(transparent)]
    Param(#[from] ParamError),
    /// The transition table does not reproduce the ODE right-hand side.
    #[error("drift mismatch for species {species}: relative error {rel_error:e}")]
    DriftMismatch {
        /// Species index with the worst discrepancy.
        species: usize,
        /// Observed relative error.
        rel_error: f64,
    },
    /// Scenario number outside the defined range.
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    /// A transition refers to a species index the model does not declare.
    #[error("transition `{0}` references an undeclared species")]
    BadSpeciesRef(String),
    /// Duplicate species names.
    #[error("species `{0}` is declared twice")]
    DuplicateSpecies(String),
    /// Rate evaluation failed during the drift check.
    #[error(transparent)]
    Rate(#[from] RateError),
}

/// Statistics failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    /// One of the samples is empty.
    #[error("rank-sum test needs at least one observation in each sample")]
    EmptySample,
    /// Trajectories to compare are not on the same grid or species set.
    #[error("trajectories differ in {0}")]
    GridMismatch(&'static str),
    /// A sample contains NaN.
    #[error("sample contains NaN")]
    NotANumber,
}
