//! Benchmark harness: sample sizing, solver × size experiments, reporting.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gen::{gen_critical, CriticalRegimeSpec};
use crate::model::{load_checkpoint, GnnModel, ModelError};
use crate::rng::mix;
use crate::solvers::{beam_decode, exact_solve, greedy_decode, least_degree_first, GnnScorer, SolveResult};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("probability must lie in (0, 1), got {0}")]
    InvalidProbability(f64),
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error("unknown solver `{0}`")]
    UnknownSolver(String),
    #[error("checkpoint: {0}")]
    Checkpoint(#[source] ModelError),
    #[error("instance with seed {seed} failed: {message}")]
    Instance { seed: u64, message: String },
    #[error("no reports to write")]
    EmptyReport,
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("malformed csv line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Instances needed so the empirical solved fraction is within `epsilon`
/// of the true one with probability at least `1 - p`.
pub fn required_sample_size(epsilon: f64, p: f64) -> Result<u64, EvalError> {
    for x in [epsilon, p] {
        if !(x > 0.0 && x < 1.0) {
            return Err(EvalError::InvalidProbability(x));
        }
    }
    Ok(((2.0 / p).ln() / (2.0 * epsilon * epsilon)).ceil() as u64)
}

/// Half-width of the confidence interval that `count` instances buy at tail
/// probability `p`.
pub fn confidence_radius(count: u64, p: f64) -> f64 {
    ((2.0 / p).ln() / (2.0 * count as f64)).sqrt()
}

pub const DEFAULT_EXACT_BUDGET: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverKind {
    GnnGreedy,
    GnnBeam(usize),
    LeastDegree,
    Exact,
}

impl SolverKind {
    pub fn needs_model(self) -> bool {
        matches!(self, SolverKind::GnnGreedy | SolverKind::GnnBeam(_))
    }

    /// Parses a solver name; a bare `gnn-beam` takes `beam_width`.
    pub fn parse_with_width(name: &str, beam_width: usize) -> Result<Self, EvalError> {
        match name {
            "gnn-beam" => Ok(SolverKind::GnnBeam(beam_width)),
            other => other.parse(),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverKind::GnnGreedy => f.write_str("gnn-greedy"),
            SolverKind::GnnBeam(b) => write!(f, "gnn-beam-{b}"),
            SolverKind::LeastDegree => f.write_str("least-degree"),
            SolverKind::Exact => f.write_str("exact"),
        }
    }
}

impl FromStr for SolverKind {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, EvalError> {
        match s {
            "gnn-greedy" => Ok(SolverKind::GnnGreedy),
            "gnn-beam" => Ok(SolverKind::GnnBeam(1)),
            "least-degree" => Ok(SolverKind::LeastDegree),
            "exact" => Ok(SolverKind::Exact),
            _ => s
                .strip_prefix("gnn-beam-")
                .and_then(|b| b.parse().ok())
                .filter(|&b| b >= 1)
                .map(SolverKind::GnnBeam)
                .ok_or_else(|| EvalError::UnknownSolver(s.to_string())),
        }
    }
}

/// Runs one solver on one graph. GNN solvers need `model`.
pub fn solve_with(
    kind: SolverKind,
    g: &crate::graph::Graph,
    model: Option<&GnnModel>,
    seed: u64,
    exact_budget: u64,
) -> Result<SolveResult, String> {
    let need = || model.ok_or_else(|| format!("solver {kind} needs a checkpoint"));
    match kind {
        SolverKind::GnnGreedy => greedy_decode(g, &GnnScorer::new(need()?), seed).map_err(|e| e.to_string()),
        SolverKind::GnnBeam(b) => beam_decode(g, &GnnScorer::new(need()?), b, seed).map_err(|e| e.to_string()),
        SolverKind::LeastDegree => Ok(least_degree_first(g)),
        SolverKind::Exact => Ok(exact_solve(g, exact_budget)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub solvers: Vec<SolverKind>,
    pub sizes: Vec<usize>,
    pub p_hamilton: f64,
    pub count: usize,
    pub seed: u64,
    pub jobs: usize,
    pub checkpoint: Option<PathBuf>,
    pub exact_budget: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            solvers: vec![SolverKind::LeastDegree],
            sizes: vec![25],
            p_hamilton: 0.8,
            count: 1000,
            seed: 0,
            jobs: 1,
            checkpoint: None,
            exact_budget: DEFAULT_EXACT_BUDGET,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |msg: String| Err(EvalError::InvalidSpec(msg));
        if self.count == 0 {
            return bad("instance count must be at least 1".into());
        }
        if self.solvers.is_empty() {
            return bad("no solvers given".into());
        }
        if self.sizes.is_empty() {
            return bad("no sizes given".into());
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n < 3) {
            return bad(format!("graph size {n} is below 3"));
        }
        if !(self.p_hamilton > 0.0 && self.p_hamilton < 1.0) {
            return Err(EvalError::InvalidProbability(self.p_hamilton));
        }
        if self.jobs == 0 {
            return bad("jobs must be at least 1".into());
        }
        if let Some(s) = self.solvers.iter().find(|s| matches!(s, SolverKind::GnnBeam(0))) {
            return bad(format!("{s} has zero beam width"));
        }
        Ok(())
    }

    /// Seed of instance `i` at `size`; shared by every solver.
    pub fn instance_seed(&self, size: usize, i: usize) -> u64 {
        mix(self.seed, &[size as u64, i as u64])
    }

    /// Reads a flat `key = value` file. Unknown keys are errors; `#` starts
    /// a comment.
    pub fn from_config_str(text: &str) -> Result<Self, EvalError> {
        let mut spec = ExperimentSpec::default();
        let mut beam_width = 1;
        let mut solver_names: Option<Vec<String>> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |msg: String| EvalError::Config { line, msg };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| v.parse::<u64>().map_err(|e| err(format!("{key}: {e}")));
            match key {
                "solvers" => solver_names = Some(split_list(value)),
                "sizes" => {
                    spec.sizes = split_list(value)
                        .iter()
                        .map(|s| num(s).map(|n| n as usize))
                        .collect::<Result<_, _>>()?
                }
                "p_hamilton" => spec.p_hamilton = value.parse().map_err(|e| err(format!("{key}: {e}")))?,
                "count" => spec.count = num(value)? as usize,
                "seed" => spec.seed = num(value)?,
                "jobs" => spec.jobs = num(value)? as usize,
                "beam_width" => beam_width = num(value)? as usize,
                "exact_budget" => spec.exact_budget = num(value)?,
                "checkpoint" => spec.checkpoint = Some(PathBuf::from(value)),
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        if let Some(names) = solver_names {
            spec.solvers = names
                .iter()
                .map(|s| SolverKind::parse_with_width(s, beam_width))
                .collect::<Result<_, _>>()?;
        }
        Ok(spec)
    }
}

/// Splits a comma-separated list, ignoring blanks.
pub fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(String::from).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub solver: String,
    pub graph_size: usize,
    pub instances: usize,
    pub solved: usize,
    pub solved_fraction: f64,
    pub avg_time_ms: f64,
    pub median_time_ms: f64,
    pub seed: u64,
    pub p_hamilton: f64,
    pub edge_probability: f64,
    /// Per-instance outcome, in instance order.
    #[serde(skip)]
    pub outcomes: Vec<bool>,
}

/// Runs every solver on `count` critical-regime graphs of every size.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ExperimentReport>, EvalError> {
    spec.validate()?;
    let model = match (&spec.checkpoint, spec.solvers.iter().any(|s| s.needs_model())) {
        (Some(path), true) => Some(load_checkpoint(path).map_err(EvalError::Checkpoint)?.0),
        (None, true) => {
            return Err(EvalError::InvalidSpec("GNN solvers need a checkpoint".into()));
        }
        (_, false) => None,
    };
    run_experiment_with_model(spec, model.as_ref())
}

/// [`run_experiment`] with an already loaded model.
pub fn run_experiment_with_model(
    spec: &ExperimentSpec,
    model: Option<&GnnModel>,
) -> Result<Vec<ExperimentReport>, EvalError> {
    spec.validate()?;
    if model.is_none() && spec.solvers.iter().any(|s| s.needs_model()) {
        return Err(EvalError::InvalidSpec("GNN solvers need a model".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| EvalError::ThreadPool(e.to_string()))?;
    let mut reports = Vec::new();
    for &size in &spec.sizes {
        let regime = CriticalRegimeSpec::new(size, spec.p_hamilton).map_err(|e| EvalError::InvalidSpec(e.to_string()))?;
        // (instance seed, per-solver outcome and time)
        let rows: Vec<Vec<(bool, Duration)>> = pool.install(|| {
            (0..spec.count)
                .into_par_iter()
                .map(|i| {
                    let seed = spec.instance_seed(size, i);
                    let fail = |message: String| EvalError::Instance { seed, message };
                    let g = gen_critical(size, spec.p_hamilton, seed).map_err(|e| fail(e.to_string()))?;
                    spec.solvers
                        .iter()
                        .map(|&kind| {
                            let res = solve_with(kind, &g, model, seed, spec.exact_budget).map_err(fail)?;
                            Ok((res.is_solution, res.elapsed))
                        })
                        .collect()
                })
                .collect::<Result<_, EvalError>>()
        })?;
        for (s, kind) in spec.solvers.iter().enumerate() {
            let outcomes: Vec<bool> = rows.iter().map(|r| r[s].0).collect();
            let mut times: Vec<f64> = rows.iter().map(|r| r[s].1.as_secs_f64() * 1e3).collect();
            let solved = outcomes.iter().filter(|&&o| o).count();
            times.sort_by(f64::total_cmp);
            reports.push(ExperimentReport {
                solver: kind.to_string(),
                graph_size: size,
                instances: spec.count,
                solved,
                solved_fraction: solved as f64 / spec.count as f64,
                avg_time_ms: times.iter().sum::<f64>() / spec.count as f64,
                median_time_ms: median(&times),
                seed: spec.seed,
                p_hamilton: spec.p_hamilton,
                edge_probability: regime.edge_probability(),
                outcomes,
            });
        }
    }
    Ok(reports)
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

pub const CSV_HEADER: &str = "solver,graph_size,instances,solved_fraction,avg_time_ms,seed";

/// One line per (solver, size), sorted by solver name then size.
pub fn report_to_csv(reports: &[ExperimentReport]) -> Result<String, EvalError> {
    if reports.is_empty() {
        return Err(EvalError::EmptyReport);
    }
    let mut sorted: Vec<&ExperimentReport> = reports.iter().collect();
    sorted.sort_by(|a, b| a.solver.cmp(&b.solver).then(a.graph_size.cmp(&b.graph_size)));
    let mut out = format!("{CSV_HEADER}\n");
    for r in sorted {
        let _ = writeln!(
            out,
            "{},{},{},{:.4},{:.3},{}",
            r.solver, r.graph_size, r.instances, r.solved_fraction, r.avg_time_ms, r.seed
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub solver: String,
    pub graph_size: usize,
    pub instances: usize,
    pub solved_fraction: f64,
    pub avg_time_ms: f64,
    pub seed: u64,
}

pub fn parse_report_csv(text: &str) -> Result<Vec<CsvRow>, EvalError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => {
            return Err(EvalError::Csv {
                line: 1,
                msg: "missing header".into(),
            })
        }
    }
    lines
        .map(|(idx, line)| {
            let err = |msg: String| EvalError::Csv { line: idx + 1, msg };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(err(format!("expected 6 fields, got {}", f.len())));
            }
            let e = |e: &dyn fmt::Display| err(e.to_string());
            Ok(CsvRow {
                solver: f[0].to_string(),
                graph_size: f[1].parse().map_err(|x| e(&x))?,
                instances: f[2].parse().map_err(|x| e(&x))?,
                solved_fraction: f[3].parse().map_err(|x| e(&x))?,
                avg_time_ms: f[4].parse().map_err(|x| e(&x))?,
                seed: f[5].parse().map_err(|x| e(&x))?,
            })
        })
        .collect()
}

/// Reports as a pretty JSON array.
pub fn report_to_json(reports: &[ExperimentReport]) -> Result<String, EvalError> {
    if reports.is_empty() {
        return Err(EvalError::EmptyReport);
    }
    Ok(serde_json::to_string_pretty(reports).expect("reports serialize"))
}
