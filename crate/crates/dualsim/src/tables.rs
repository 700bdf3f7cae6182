//! CSV output and input.
//!
//! Trajectories are written as a `t,<species...>` header and one row per
//! sample. Numbers use the shortest representation that parses back to the
//! same `f64`, so whole agent counts print as integers and ODE values keep
//! full precision. Records are separated by `\n` with no trailing newline.

use dualsim_core::stats::{CensusRow, ComparisonReport};
use dualsim_core::{SpeciesId, Trajectory, TrajectoryMode};
use thiserror::Error;

use crate::experiment::ExperimentResult;

/// CSV failures.
#[derive(Debug, Error)]
pub enum CsvError {
    /// The requested series is not part of the result.
    #[error("no such series: {0}")]
    NoSuchSeries(String),
    /// Reading failed or a field is not a number.
    #[error("malformed CSV: {0}")]
    Malformed(String),
    /// Underlying CSV library error.
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Which table of an experiment to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    /// ODE trajectory.
    Ode,
    /// Pointwise ensemble mean.
    AbmMean,
    /// Replication `k` (0-based).
    AbmRep(usize),
    /// Per-species rank-sum results.
    Report,
    /// Extreme-case frequencies.
    Census,
}

impl std::str::FromStr for Series {
    type Err = CsvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ode" => Ok(Series::Ode),
            "abm-mean" => Ok(Series::AbmMean),
            "report" => Ok(Series::Report),
            "census" => Ok(Series::Census),
            other => other
                .strip_prefix("abm-rep-")
                .and_then(|k| k.parse().ok())
                .map(Series::AbmRep)
                .ok_or_else(|| CsvError::NoSuchSeries(other.into())),
        }
    }
}

fn write_rows<I, R>(rows: I) -> Result<String, CsvError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CsvError::Malformed(e.to_string()))?;
    let mut text = String::from_utf8(bytes).map_err(|e| CsvError::Malformed(e.to_string()))?;
    if text.ends_with('\n') {
        text.pop();
    }
    Ok(text)
}

/// A trajectory as CSV.
pub fn trajectory_csv(traj: &Trajectory) -> Result<String, CsvError> {
    let header: Vec<String> =
        std::iter::once("t".to_string()).chain(traj.species.iter().map(|s| s.name().to_string())).collect();
    let rows = (0..traj.len()).map(|k| {
        std::iter::once(traj.times[k])
            .chain(traj.columns.iter().map(|c| c[k]))
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
    });
    write_rows(std::iter::once(header).chain(rows))
}

/// Rank-sum results as `species,U,p,decision` rows.
pub fn report_csv(report: &ComparisonReport) -> Result<String, CsvError> {
    let header = ["species", "U", "p", "decision"].map(String::from).to_vec();
    let rows = report.rows.iter().map(|r| {
        vec![r.species.name().to_string(), format!("{}", r.u), format!("{}", r.p), r.decision.as_str().to_string()]
    });
    write_rows(std::iter::once(header).chain(rows))
}

/// Census rows as `predicate,count,total,frequency`.
pub fn census_csv(rows: &[CensusRow]) -> Result<String, CsvError> {
    let header = ["predicate", "count", "total", "frequency"].map(String::from).to_vec();
    let body = rows
        .iter()
        .map(|r| vec![r.predicate.clone(), r.count.to_string(), r.total.to_string(), format!("{}", r.frequency)]);
    write_rows(std::iter::once(header).chain(body))
}

/// One table of an experiment result.
pub fn emit_csv(result: &ExperimentResult, which: Series) -> Result<String, CsvError> {
    match which {
        Series::Ode => trajectory_csv(&result.ode),
        Series::AbmMean => trajectory_csv(&result.ensemble.mean),
        Series::AbmRep(k) => match result.ensemble.runs.get(k) {
            Some(run) => trajectory_csv(run),
            None => Err(CsvError::NoSuchSeries(format!("abm-rep-{k}"))),
        },
        Series::Report => report_csv(&result.report),
        Series::Census => census_csv(&result.census),
    }
}

/// Read a trajectory CSV written by [`trajectory_csv`].
pub fn parse_trajectory_csv(text: &str, mode: TrajectoryMode) -> Result<Trajectory, CsvError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    if headers.get(0) != Some("t") {
        return Err(CsvError::Malformed("first column must be `t`".into()));
    }
    let species: Vec<SpeciesId> = headers.iter().skip(1).map(SpeciesId::parse).collect();
    let mut traj = Trajectory::with_capacity(species, mode, 0);
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let values: Vec<f64> = rec
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|_| CsvError::Malformed(format!("row {}: `{f}` is not a number", line + 2)))
            })
            .collect::<Result<_, _>>()?;
        if values.len() != headers.len() {
            return Err(CsvError::Malformed(format!("row {} has {} fields", line + 2, values.len())));
        }
        traj.push(values[0], values[1..].iter().copied());
    }
    Ok(traj)
}
