use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::StatsError;
use crate::types::{SpeciesId, Trajectory};

/// Named outcome classifier for a single replication.
#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    /// Tumour count is zero at some sample time `<= t`.
    TumourExtinctBy(f64),
    /// Effector count is zero at some sample time `<= t`.
    EffectorExtinctBy(f64),
    /// The species never reaches `bound`. Uses the run's recorded peaks when
    /// available, so excursions between samples count.
    SpeciesMaxBelow {
        /// Species inspected.
        species: SpeciesId,
        /// Exclusive upper bound.
        bound: f64,
    },
}

impl Predicate {
    /// True if `run` satisfies the predicate. A species missing from the
    /// run never satisfies it.
    pub fn holds(&self, run: &Trajectory) -> bool {
        match self {
            Predicate::TumourExtinctBy(t) => extinct_by(run, &SpeciesId::Tumour, *t),
            Predicate::EffectorExtinctBy(t) => extinct_by(run, &SpeciesId::Effector, *t),
            Predicate::SpeciesMaxBelow { species, bound } => {
                let Some(s) = run.species_index(species) else {
                    return false;
                };
                let sampled = run.columns[s].iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let peak = run.meta.peaks.get(s).map_or(sampled, |&p| p.max(sampled));
                peak < *bound
            }
        }
    }

    /// Parse `tumour-extinct-by(T)`, `effector-extinct-by(T)` or
    /// `species-max-below(SPECIES,V)`.
    pub fn parse(text: &str) -> Option<Predicate> {
        let text = text.trim();
        let open = text.find('(')?;
        let inner = text[open + 1..].strip_suffix(')')?;
        let number = |s: &str| s.trim().parse::<f64>().ok().filter(|v| !v.is_nan());
        match text[..open].trim() {
            "tumour-extinct-by" | "tumor-extinct-by" => number(inner).map(Predicate::TumourExtinctBy),
            "effector-extinct-by" => number(inner).map(Predicate::EffectorExtinctBy),
            "species-max-below" => {
                let (species, bound) = inner.split_once(',')?;
                Some(Predicate::SpeciesMaxBelow { species: SpeciesId::parse(species.trim()), bound: number(bound)? })
            }
            _ => None,
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::TumourExtinctBy(t) => write!(f, "tumour-extinct-by({t})"),
            Predicate::EffectorExtinctBy(t) => write!(f, "effector-extinct-by({t})"),
            Predicate::SpeciesMaxBelow { species, bound } => write!(f, "species-max-below({species},{bound})"),
        }
    }
}

fn extinct_by(run: &Trajectory, species: &SpeciesId, t: f64) -> bool {
    let Some(s) = run.species_index(species) else {
        return false;
    };
    run.times.iter().zip(&run.columns[s]).take_while(|(&time, _)| time <= t + 1e-9).any(|(_, &v)| v == 0.0)
}

/// How many replications satisfied one predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct CensusRow {
    /// Predicate label.
    pub predicate: String,
    /// Replications satisfying it.
    pub count: usize,
    /// Replications inspected.
    pub total: usize,
    /// `count / total`.
    pub frequency: f64,
}

/// Count, per predicate, the replications that satisfy it.
pub fn extreme_case_census(runs: &[Trajectory], predicates: &[Predicate]) -> Result<Vec<CensusRow>, StatsError> {
    if runs.is_empty() {
        return Err(StatsError::EmptySample);
    }
    Ok(predicates
        .iter()
        .map(|p| {
            let count = runs.iter().filter(|r| p.holds(r)).count();
            CensusRow {
                predicate: alloc::format!("{p}"),
                count,
                total: runs.len(),
                frequency: count as f64 / runs.len() as f64,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::TrajectoryMode;
    use alloc::vec;

    fn run(t: &[f64], e: &[f64]) -> Trajectory {
        let mut tr =
            Trajectory::with_capacity(vec![SpeciesId::Tumour, SpeciesId::Effector], TrajectoryMode::Abm, t.len());
        for (k, (&a, &b)) in t.iter().zip(e).enumerate() {
            tr.push(k as f64, [a, b]);
        }
        tr
    }

    #[test]
    fn all_zero_ensemble() {
        let runs = vec![run(&[0.0, 0.0], &[0.0, 0.0]); 5];
        let rows = extreme_case_census(&runs, &[Predicate::TumourExtinctBy(0.0)]).unwrap();
        assert_eq!(rows[0].frequency, 1.0);
        assert_eq!(rows[0].predicate, "tumour-extinct-by(0)");
    }

    #[test]
    fn extinction_respects_deadline() {
        let r = run(&[5.0, 3.0, 0.0, 2.0], &[1.0, 1.0, 1.0, 1.0]);
        assert!(!Predicate::TumourExtinctBy(1.0).holds(&r));
        assert!(Predicate::TumourExtinctBy(2.0).holds(&r));
        assert!(!Predicate::EffectorExtinctBy(3.0).holds(&r));
    }

    #[test]
    fn max_below_uses_peaks() {
        let mut r = run(&[1.0, 1.0], &[0.0, 0.0]);
        let p = Predicate::SpeciesMaxBelow { species: SpeciesId::Effector, bound: 1.0 };
        assert!(p.holds(&r));
        r.meta.peaks = vec![1.0, 2.0];
        assert!(!p.holds(&r));
        let missing = Predicate::SpeciesMaxBelow { species: SpeciesId::TGFBeta, bound: 1.0 };
        assert!(!missing.holds(&r));
    }

    #[test]
    fn parse_round_trips() {
        for p in [
            Predicate::TumourExtinctBy(200.0),
            Predicate::EffectorExtinctBy(12.5),
            Predicate::SpeciesMaxBelow { species: SpeciesId::TGFBeta, bound: 3.0 },
        ] {
            assert_eq!(Predicate::parse(&alloc::format!("{p}")), Some(p));
        }
        assert_eq!(
            Predicate::parse("species-max-below(S, 1)"),
            Some(Predicate::SpeciesMaxBelow { species: SpeciesId::TGFBeta, bound: 1.0 })
        );
        assert_eq!(Predicate::parse("tumour-extinct-by(x)"), None);
        assert_eq!(Predicate::parse("bogus(1)"), None);
    }

    #[test]
    fn empty_ensemble_is_an_error() {
        assert_eq!(extreme_case_census(&[], &[]), Err(StatsError::EmptySample));
    }
}
