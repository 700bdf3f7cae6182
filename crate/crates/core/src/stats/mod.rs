//! Comparing the two paradigms: rank-sum tests, trajectory comparison,
//! extreme-case counts, and a two-sample KS test for distribution checks.

mod census;
mod compare;
mod ks;
mod wilcoxon;

pub use census::{extreme_case_census, CensusRow, Predicate};
pub use compare::{
    compare_endpoints, compare_trajectories, ComparisonReport, Decision, Pairing, SpeciesComparison, DEFAULT_ALPHA,
};
pub use ks::{ks_two_sample, KsResult};
pub use wilcoxon::{
    midranks, rank_sum_exact, rank_sum_normal, rank_sum_test, wilcoxon_rank_sum, Alternative, PMethod, RankSum,
    EXACT_LIMIT,
};

use crate::error::StatsError;
use crate::math::sqrt;
use alloc::vec::Vec;

/// Location and spread of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    /// Sample size.
    pub n: usize,
    /// Arithmetic mean.
    pub mean: f64,
    /// Sample standard deviation (0 for a single value).
    pub sd: f64,
    /// Smallest value.
    pub min: f64,
    /// Median.
    pub median: f64,
    /// Largest value.
    pub max: f64,
}

/// Summary statistics of `values`.
pub fn summarize(values: &[f64]) -> Result<Summary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(StatsError::NotANumber);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd =
        if n > 1 { sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64) } else { 0.0 };
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 { sorted[n / 2] } else { (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0 };
    Ok(Summary { n, mean, sd, min: sorted[0], median, max: sorted[n - 1] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_small_sample() {
        let s = summarize(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((s.n, s.mean, s.min, s.median, s.max), (4, 2.5, 1.0, 2.5, 4.0));
        assert!((s.sd - 1.290_994_448_735_805_6).abs() < 1e-12);
        assert_eq!(summarize(&[7.0]).unwrap().sd, 0.0);
        assert_eq!(summarize(&[]), Err(StatsError::EmptySample));
    }
}
