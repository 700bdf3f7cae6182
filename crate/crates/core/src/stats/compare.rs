use alloc::string::String;
use alloc::vec::Vec;

use super::wilcoxon::wilcoxon_rank_sum;
use crate::error::StatsError;
use crate::types::{SpeciesId, Trajectory};

/// Default significance level.
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Test decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// `p < alpha`.
    Reject,
    /// `p >= alpha`.
    FailToReject,
}

impl Decision {
    /// Decision for `p` at level `alpha`.
    pub fn from_p(p: f64, alpha: f64) -> Self {
        if p < alpha {
            Decision::Reject
        } else {
            Decision::FailToReject
        }
    }

    /// `"reject"` or `"fail to reject"`.
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Reject => "reject",
            Decision::FailToReject => "fail to reject",
        }
    }
}

/// How the two samples handed to the rank-sum test were formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pairing {
    /// Sampled ODE series against sampled ensemble-mean series.
    #[default]
    Series,
    /// ODE endpoint against per-replication endpoints.
    Endpoints,
}

/// Result for one species.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesComparison {
    /// Species compared.
    pub species: SpeciesId,
    /// Mann-Whitney `U` of the ODE sample.
    pub u: f64,
    /// Two-sided p-value.
    pub p: f64,
    /// Decision at the report's `alpha`.
    pub decision: Decision,
    /// Size of the ODE sample.
    pub n_ode: usize,
    /// Size of the agent sample.
    pub n_abm: usize,
}

/// Per-species rank-sum comparison of the two paradigms.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// One entry per species, in model order.
    pub rows: Vec<SpeciesComparison>,
    /// Significance level.
    pub alpha: f64,
    /// Sample construction.
    pub pairing: Pairing,
    /// Scenario label, when known.
    pub scenario: Option<String>,
    /// Replication seeds behind the agent sample.
    pub seeds: Vec<u64>,
}

impl ComparisonReport {
    /// Number of species where the null was rejected.
    pub fn rejections(&self) -> usize {
        self.rows.iter().filter(|r| r.decision == Decision::Reject).count()
    }

    /// One-line verdict, e.g. `fail to reject (3/3 species)` or
    /// `reject (1/3 species)`.
    pub fn summary(&self) -> String {
        let k = self.rejections();
        let n = self.rows.len();
        if k == 0 {
            alloc::format!("fail to reject ({n}/{n} species)")
        } else {
            alloc::format!("reject ({k}/{n} species)")
        }
    }
}

fn check_alpha(alpha: f64) -> Result<(), StatsError> {
    if alpha.is_nan() {
        return Err(StatsError::NotANumber);
    }
    Ok(())
}

fn same_species(a: &Trajectory, b: &Trajectory) -> Result<(), StatsError> {
    if a.species != b.species {
        return Err(StatsError::GridMismatch("species"));
    }
    Ok(())
}

/// Rank-sum test per species between two trajectories on the same grid,
/// each sampled series treated as one sample.
pub fn compare_trajectories(ode: &Trajectory, abm: &Trajectory, alpha: f64) -> Result<ComparisonReport, StatsError> {
    check_alpha(alpha)?;
    same_species(ode, abm)?;
    if ode.times.len() != abm.times.len()
        || ode.times.iter().zip(&abm.times).any(|(a, b)| (a - b).abs() > 1e-9 * a.abs().max(1.0))
    {
        return Err(StatsError::GridMismatch("time grid"));
    }
    let mut rows = Vec::with_capacity(ode.species.len());
    for (s, id) in ode.species.iter().enumerate() {
        let r = wilcoxon_rank_sum(&ode.columns[s], &abm.columns[s])?;
        rows.push(SpeciesComparison {
            species: id.clone(),
            u: r.u,
            p: r.p,
            decision: Decision::from_p(r.p, alpha),
            n_ode: ode.columns[s].len(),
            n_abm: abm.columns[s].len(),
        });
    }
    Ok(ComparisonReport { rows, alpha, pairing: Pairing::Series, scenario: None, seeds: Vec::new() })
}

/// Rank-sum test per species between the ODE's final value (a sample of
/// one) and the final values of every replication.
pub fn compare_endpoints(ode: &Trajectory, runs: &[Trajectory], alpha: f64) -> Result<ComparisonReport, StatsError> {
    check_alpha(alpha)?;
    let first = runs.first().ok_or(StatsError::EmptySample)?;
    for r in runs {
        same_species(ode, r)?;
    }
    let ode_end = ode.final_row().ok_or(StatsError::EmptySample)?;
    let mut rows = Vec::with_capacity(ode.species.len());
    for (s, id) in first.species.iter().enumerate() {
        let ends: Vec<f64> = runs
            .iter()
            .map(|r| r.columns[s].last().copied().ok_or(StatsError::EmptySample))
            .collect::<Result<_, _>>()?;
        let r = wilcoxon_rank_sum(&[ode_end[s]], &ends)?;
        rows.push(SpeciesComparison {
            species: id.clone(),
            u: r.u,
            p: r.p,
            decision: Decision::from_p(r.p, alpha),
            n_ode: 1,
            n_abm: ends.len(),
        });
    }
    Ok(ComparisonReport {
        rows,
        alpha,
        pairing: Pairing::Endpoints,
        scenario: None,
        seeds: runs.iter().filter_map(|r| r.meta.seed).collect(),
    })
}
