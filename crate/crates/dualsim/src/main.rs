use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use dualsim::config::{parse_backend, parse_config, ConfigDocument, Outputs};
use dualsim::experiment::{run_experiment_with, ExperimentOptions, ExperimentResult};
use dualsim::plot::{comparison_charts, line_chart, Line};
use dualsim::tables::{census_csv, emit_csv, report_csv, trajectory_csv, Series};
use dualsim_core::abm::run_ensemble;
use dualsim_core::models::{find_scenario, scenario_registry, ScenarioModel};
use dualsim_core::ode::integrate_fixed;
use dualsim_core::stats::{Pairing, Predicate};
use dualsim_core::Trajectory;

const DEFAULT_SEED: u64 = 42;
const DEFAULT_OUT: &str = "dualsim-out";

/// Paired ODE / agent-based simulation of tumour-immune models.
#[derive(Parser)]
#[command(name = "dualsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the ODE and write ode.csv.
    RunOde(Common),
    /// Run the agent ensemble and write abm-mean.csv.
    RunAbm(Common),
    /// Run both paradigms and compare them species by species.
    Compare(Common),
    /// Run the ensemble and count extreme outcomes.
    Census {
        #[command(flatten)]
        common: Common,
        /// Predicate such as `tumour-extinct-by(200)`; repeatable.
        #[arg(long = "predicate")]
        predicates: Vec<String>,
    },
    /// Print the built-in scenarios.
    ListScenarios,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long, conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Built-in scenario id (see list-scenarios).
    #[arg(long)]
    scenario: Option<String>,
    /// Base seed. Falls back to the config, then DUALSIM_SEED, then 42.
    #[arg(long)]
    seed: Option<u64>,
    /// Replications per ensemble.
    #[arg(long)]
    n_reps: Option<usize>,
    /// Simulated days.
    #[arg(long)]
    horizon: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one SVG chart per species.
    #[arg(long)]
    plot: bool,
    /// Agent backend: tau-leap or per-agent.
    #[arg(long)]
    backend: Option<String>,
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

struct Job {
    doc: ConfigDocument,
    seed: u64,
    out: PathBuf,
    plot: bool,
}

fn resolve(common: &Common) -> Result<Job, Failure> {
    let mut doc = match (&common.config, &common.scenario) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))
                .map_err(Failure::Usage)?;
            parse_config(&text).with_context(|| format!("in {}", path.display())).map_err(Failure::Usage)?
        }
        (None, Some(id)) => ConfigDocument {
            scenario: find_scenario(id).map_err(|e| Failure::Usage(e.into()))?,
            seed: None,
            outputs: Outputs::default(),
            pairing: Pairing::Series,
            census: None,
        },
        (None, None) => return Err(Failure::Usage(anyhow!("one of --config or --scenario is required"))),
    };
    if let Some(n) = common.n_reps {
        if n == 0 {
            return Err(Failure::Usage(anyhow!("--n-reps must be at least 1")));
        }
        doc.scenario.n_reps = n;
    }
    if let Some(h) = common.horizon {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Failure::Usage(anyhow!("--horizon must be positive")));
        }
        doc.scenario.horizon = h;
    }
    if let Some(b) = &common.backend {
        doc.scenario.engine.backend = parse_backend(b).map_err(|e| Failure::Usage(e.into()))?;
    }
    let env_seed = match std::env::var("DUALSIM_SEED") {
        Ok(s) => Some(
            s.trim()
                .parse::<u64>()
                .map_err(|_| Failure::Usage(anyhow!("DUALSIM_SEED `{s}` is not an unsigned integer")))?,
        ),
        Err(_) => None,
    };
    let seed = common.seed.or(doc.seed).or(env_seed).unwrap_or(DEFAULT_SEED);
    let out = common.out.clone().or_else(|| doc.outputs.dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let plot = common.plot || doc.outputs.plot;
    Ok(Job { doc, seed, out, plot })
}

fn write(dir: &Path, name: &str, mut text: String) -> anyhow::Result<()> {
    if !text.ends_with('\n') {
        text.push('\n');
    }
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn prepare(job: &Job) -> anyhow::Result<()> {
    fs::create_dir_all(&job.out).with_context(|| format!("cannot create {}", job.out.display()))
}

fn print_tail(traj: &Trajectory, rows: usize) {
    let header: Vec<&str> = traj.species.iter().map(|s| s.name()).collect();
    println!("t\t{}", header.join("\t"));
    for k in traj.len().saturating_sub(rows)..traj.len() {
        let vals: Vec<String> = traj.row(k).iter().map(|v| format!("{v:.4}")).collect();
        println!("{}\t{}", traj.times[k], vals.join("\t"));
    }
}

fn run_ode(job: &Job) -> Result<(), Failure> {
    let sc = &job.doc.scenario;
    let model = sc.build_model().map_err(anyhow::Error::from)?;
    if sc.init.len() != model.arity() {
        return Err(Failure::Usage(anyhow!("initial state does not match the model's species")));
    }
    let ode = integrate_fixed(
        &model,
        &model.species,
        &sc.initial_state().to_real(),
        sc.horizon,
        sc.engine.dt,
        sc.engine.sample_every,
    )
    .map_err(anyhow::Error::from)?;
    prepare(job)?;
    write(&job.out, "ode.csv", trajectory_csv(&ode).map_err(anyhow::Error::from)?)?;
    if job.plot {
        for (s, id) in ode.species.iter().enumerate() {
            let line = Line { label: "ODE", color: "#1f77b4", x: &ode.times, y: &ode.columns[s] };
            let svg = line_chart(&format!("{}: {}", sc.id, id.name()), "time (days)", id.name(), &[line]);
            write(&job.out, &format!("{}.svg", id.name()), svg)?;
        }
    }
    println!("{}: ODE, {} days, dt {}", sc.id, sc.horizon, sc.engine.dt);
    print_tail(&ode, 5);
    Ok(())
}

fn run_abm(job: &Job) -> Result<(), Failure> {
    let sc = &job.doc.scenario;
    let model = sc.build_model().map_err(anyhow::Error::from)?;
    if sc.init.len() != model.arity() {
        return Err(Failure::Usage(anyhow!("initial state does not match the model's species")));
    }
    let ens = run_ensemble(&model, &sc.initial_state(), &sc.engine, sc.horizon, sc.n_reps, job.seed)
        .map_err(anyhow::Error::from)?;
    prepare(job)?;
    write(&job.out, "abm-mean.csv", trajectory_csv(&ens.mean).map_err(anyhow::Error::from)?)?;
    if job.doc.outputs.per_rep {
        for (k, run) in ens.runs.iter().enumerate() {
            write(&job.out, &format!("abm-rep-{k}.csv"), trajectory_csv(run).map_err(anyhow::Error::from)?)?;
        }
    }
    if job.plot {
        for (s, id) in ens.mean.species.iter().enumerate() {
            let line = Line { label: "ABM mean", color: "#d62728", x: &ens.mean.times, y: &ens.mean.columns[s] };
            let svg = line_chart(&format!("{}: {}", sc.id, id.name()), "time (days)", id.name(), &[line]);
            write(&job.out, &format!("{}.svg", id.name()), svg)?;
        }
    }
    println!("{}: {} replications, seeds {}..", sc.id, sc.n_reps, job.seed);
    print_tail(&ens.mean, 5);
    Ok(())
}

fn experiment(job: &Job, predicates: Option<Vec<Predicate>>) -> Result<ExperimentResult, Failure> {
    let options = ExperimentOptions {
        pairing: job.doc.pairing,
        predicates: predicates.or_else(|| job.doc.census.clone()),
        keep_runs: true,
    };
    let result = run_experiment_with(&job.doc.scenario, job.seed, &options).map_err(anyhow::Error::from)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    Ok(result)
}

fn write_runs(job: &Job, result: &ExperimentResult) -> anyhow::Result<()> {
    if job.doc.outputs.per_rep {
        for k in 0..result.ensemble.runs.len() {
            write(&job.out, &format!("abm-rep-{k}.csv"), emit_csv(result, Series::AbmRep(k))?)?;
        }
    }
    Ok(())
}

fn compare(job: &Job) -> Result<(), Failure> {
    let result = experiment(job, None)?;
    prepare(job)?;
    write(&job.out, "ode.csv", emit_csv(&result, Series::Ode).map_err(anyhow::Error::from)?)?;
    write(&job.out, "abm-mean.csv", emit_csv(&result, Series::AbmMean).map_err(anyhow::Error::from)?)?;
    write(&job.out, "report.csv", report_csv(&result.report).map_err(anyhow::Error::from)?)?;
    write(&job.out, "census.csv", census_csv(&result.census).map_err(anyhow::Error::from)?)?;
    write_runs(job, &result)?;
    if job.plot {
        for (name, svg) in comparison_charts(&result.scenario, &result.ode, &result.ensemble.mean) {
            write(&job.out, &format!("{name}.svg"), svg)?;
        }
    }
    println!(
        "{}: {} replications, base seed {}, alpha {}",
        result.scenario, job.doc.scenario.n_reps, job.seed, job.doc.scenario.alpha
    );
    println!("{:<10} {:>12} {:>10}  decision", "species", "U", "p");
    for row in &result.report.rows {
        println!("{:<10} {:>12} {:>10.4}  {}", row.species.name(), row.u, row.p, row.decision.as_str());
    }
    println!("{}", result.report.summary());
    Ok(())
}

fn census(job: &Job, predicates: &[String]) -> Result<(), Failure> {
    let parsed = if predicates.is_empty() {
        None
    } else {
        let list = predicates
            .iter()
            .map(|p| Predicate::parse(p).ok_or_else(|| Failure::Usage(anyhow!("cannot parse predicate `{p}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        Some(list)
    };
    let result = experiment(job, parsed)?;
    prepare(job)?;
    write(&job.out, "census.csv", census_csv(&result.census).map_err(anyhow::Error::from)?)?;
    write_runs(job, &result)?;
    println!("{}: {} replications, base seed {}", result.scenario, job.doc.scenario.n_reps, job.seed);
    for row in &result.census {
        println!("{:<32} {:>4}/{:<4} {:.3}", row.predicate, row.count, row.total, row.frequency);
    }
    Ok(())
}

fn list_scenarios() {
    for sc in scenario_registry() {
        let kind = match &sc.model {
            ScenarioModel::Case(p) => format!("case {}", p.case()),
            ScenarioModel::Custom(m) => m.name.clone(),
        };
        let init: Vec<String> = sc.init.iter().map(u64::to_string).collect();
        println!("{:<11} {:<7} init [{}], {} days", sc.id, kind, init.join(", "), sc.horizon);
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::RunOde(c) => run_ode(&resolve(&c)?),
        Command::RunAbm(c) => run_abm(&resolve(&c)?),
        Command::Compare(c) => compare(&resolve(&c)?),
        Command::Census { common, predicates } => census(&resolve(&common)?, &predicates),
        Command::ListScenarios => {
            list_scenarios();
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
