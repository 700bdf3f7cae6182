//! Experiment runner for paired ODE / agent-based tumour-immune models:
//! JSON configuration, rate-formula parsing, CSV tables and SVG charts.

pub mod config;
pub mod experiment;
pub mod expr;
pub mod plot;
pub mod tables;
