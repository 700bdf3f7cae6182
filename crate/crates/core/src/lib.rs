//! Paired deterministic / stochastic simulation of tumour–immune population
//! models.
//!
//! Every model is described once, as a [`models::ModelSpec`]: an ODE
//! right-hand side together with a table of rate-triggered agent transitions
//! whose expected drift reproduces that right-hand side. The same model can
//! then be integrated numerically ([`ode`]) or simulated as a population of
//! discrete agents ([`abm`]), and the two outputs compared with rank-sum
//! statistics ([`stats`]).
//!
//! The crate is `no_std` (with `alloc`). The default `std` feature enables
//! parallel ensembles through rayon; results are identical either way.
#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_docs)]
// 0.318 is a published rate, not 1/pi; `!(a < b)` is deliberate, it also
// rejects NaN; index loops mirror the Runge-Kutta stage formulas.
#![allow(clippy::approx_constant, clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod abm;
pub mod error;
mod math;
pub mod models;
pub mod ode;
pub mod params;
pub mod rate;
pub mod rng;
pub mod stats;
pub mod types;

pub use error::{AbmError, ModelError, OdeError, ParamError, RateError, StatsError};
pub use params::{Case0Params, Case1Params, Case2Params, Case3Params, CaseParams};
pub use rng::SeededStream;
pub use types::{PopulationState, RunMeta, SpeciesId, Trajectory, TrajectoryMode};
