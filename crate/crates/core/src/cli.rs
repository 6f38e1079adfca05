//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code.

use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::eval::{
    report_to_csv, report_to_json, run_experiment, solve_with, split_list, ExperimentSpec, SolverKind,
    DEFAULT_EXACT_BUDGET,
};
use crate::gen::{read_graphs, Dataset, GeneratorParams};
use crate::graph::{Graph, Walk};
use crate::model::{
    checkpoint_to_string, gradcheck, load_checkpoint, train_with_progress, CheckpointMeta, GnnModel,
    GradcheckConfig, HyperParams, TrainConfig, TrainEvent,
};
use crate::reductions::{hcp_to_tsp, pad_hcp};
use crate::rng::mix;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;

/// Largest relative error `gradcheck` accepts.
pub const GRADCHECK_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(name = "hamlab", version, about = "Hamiltonian cycle search with graph neural networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a JSON-lines graph dataset.
    Gen(GenArgs),
    /// Train a model on planted-cycle graphs and write a checkpoint.
    Train(TrainArgs),
    /// Solve every graph of an input file.
    Solve(SolveArgs),
    /// Benchmark solvers on critical-regime graphs.
    Eval(EvalArgs),
    /// Apply a reduction to every graph of an input file.
    Reduce(ReduceArgs),
    /// Check training gradients against finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorKind {
    Critical,
    Er,
    Planted,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 25)]
    pub size: usize,
    #[arg(long, value_enum, default_value_t = GeneratorKind::Critical)]
    pub generator: GeneratorKind,
    /// Target Hamiltonicity probability of the critical generator.
    #[arg(long, default_value_t = 0.8)]
    pub p_hamilton: f64,
    /// Edge probability of the plain Erdős–Rényi generator.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Extra-edge probability of the planted generator.
    #[arg(long, default_value_t = 0.125)]
    pub p_edge: f64,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, env = "HAMLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 25)]
    pub size: usize,
    #[arg(long, default_value_t = 0.125)]
    pub p_edge: f64,
    #[arg(long, default_value_t = 20_000)]
    pub updates: usize,
    #[arg(long, default_value_t = 8)]
    pub batch: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub lr: f64,
    #[arg(long, env = "HAMLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Updates between validation runs.
    #[arg(long, default_value_t = 1000)]
    pub val_every: usize,
    /// Validation graphs per run.
    #[arg(long, default_value_t = 200)]
    pub val_size: usize,
    #[arg(long)]
    pub out: String,
    /// Disable persistent node features.
    #[arg(long)]
    pub no_persistent: bool,
    /// Disable random node features.
    #[arg(long)]
    pub no_random_features: bool,
    /// Suppress progress lines.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverName {
    GnnGreedy,
    GnnBeam,
    LeastDegree,
    Exact,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub solver: SolverName,
    #[arg(long, default_value_t = 1)]
    pub beam_width: usize,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Graph file: plain edge list or JSON-lines dataset.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Write the graphs with their found cycles as DOT.
    #[arg(long)]
    pub dot: Option<String>,
    /// Search-node limit of the exact solver.
    #[arg(long, default_value_t = DEFAULT_EXACT_BUDGET)]
    pub exact_budget: u64,
    #[arg(long, env = "HAMLAB_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Comma-separated solver names, e.g. `least-degree,gnn-greedy,gnn-beam-3`.
    #[arg(long)]
    pub solvers: Option<String>,
    /// Comma-separated graph sizes.
    #[arg(long)]
    pub sizes: Option<String>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, env = "HAMLAB_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub p_hamilton: Option<f64>,
    /// Width used by a bare `gnn-beam`.
    #[arg(long)]
    pub beam_width: Option<usize>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub exact_budget: Option<u64>,
    /// Flat key=value experiment file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "-")]
    pub csv: String,
    #[arg(long)]
    pub json: Option<String>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("reduction").required(true).args(["pad", "to_tsp"])))]
pub struct ReduceArgs {
    /// Replace node V by a chain of K+1 nodes, given as `V,K`.
    #[arg(long, value_name = "V,K")]
    pub pad: Option<String>,
    /// Emit the weighted complete graph of the TSP reduction.
    #[arg(long)]
    pub to_tsp: bool,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, env = "HAMLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub coordinates: usize,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or input files.
    Invalid(String),
    Internal(String),
}

impl CliError {
    fn invalid(e: impl Display) -> Self {
        CliError::Invalid(e.to_string())
    }

    fn internal(e: impl Display) -> Self {
        CliError::Internal(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

type CliResult = Result<(), CliError>;

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code. Primary output goes to `stdout` unless redirected to a file;
/// diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_INVALID
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "hamlab: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    match command {
        Command::Gen(a) => gen(a, stdout),
        Command::Train(a) => train(a, stdout, stderr),
        Command::Solve(a) => solve(a, stdout),
        Command::Eval(a) => eval(a, stdout),
        Command::Reduce(a) => reduce(a, stdout),
        Command::Gradcheck(a) => grad(a, stdout),
    }
}

/// Writes `content` to `path`, or to `stdout` for `-`.
fn emit(path: &str, content: &str, stdout: &mut dyn Write) -> CliResult {
    if path == "-" {
        stdout.write_all(content.as_bytes()).map_err(CliError::internal)
    } else {
        fs::write(path, content).map_err(|e| CliError::internal(format!("{path}: {e}")))
    }
}

fn read_input(path: &Path) -> Result<Vec<(Graph, Option<Walk>)>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    let graphs = read_graphs(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    if graphs.is_empty() {
        return Err(CliError::invalid(format!("{}: no graphs", path.display())));
    }
    Ok(graphs)
}

fn load_model(path: Option<&Path>) -> Result<GnnModel, CliError> {
    let path = path.ok_or_else(|| CliError::invalid("GNN solvers need --checkpoint"))?;
    load_checkpoint(path)
        .map(|(model, _)| model)
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

fn gen(a: GenArgs, stdout: &mut dyn Write) -> CliResult {
    let generator = match a.generator {
        GeneratorKind::Critical => GeneratorParams::Critical {
            p_hamilton: a.p_hamilton,
        },
        GeneratorKind::Er => GeneratorParams::Er { p: a.p },
        GeneratorKind::Planted => GeneratorParams::Planted { p_edge: a.p_edge },
    };
    let dataset = Dataset::generate(generator, a.size, a.count, a.seed).map_err(CliError::invalid)?;
    let mut buf = Vec::new();
    dataset.write_jsonl(&mut buf).map_err(CliError::internal)?;
    emit(&a.out, &String::from_utf8(buf).expect("json is utf-8"), stdout)
}

fn train(a: TrainArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    let cfg = TrainConfig {
        n: a.size,
        p_edge: a.p_edge,
        batch: a.batch,
        lr: a.lr,
        max_updates: a.updates,
        seed: a.seed,
        val_every: a.val_every,
        val_size: a.val_size,
        hyper: HyperParams {
            use_persistent_features: !a.no_persistent,
            use_random_features: !a.no_random_features,
            ..HyperParams::default()
        },
    };
    cfg.validate().map_err(CliError::invalid)?;
    let report = train_with_progress(&cfg, |event| {
        if a.quiet {
            return;
        }
        match event {
            TrainEvent::Update { update, loss } if update % 100 == 0 => {
                let _ = writeln!(stderr, "update {update} loss {loss:.4}");
            }
            TrainEvent::Validation { update, score, best } => {
                let mark = if *best { " best" } else { "" };
                let _ = writeln!(stderr, "update {update} validation {score:.4}{mark}");
            }
            _ => {}
        }
    })
        .map_err(CliError::internal)?;
    let meta = CheckpointMeta {
        seed: cfg.seed,
        updates: cfg.max_updates,
        val_score: report.best_score,
        parameter_count: report.model.params.parameter_count(),
        train_size: Some(cfg.n),
        p_edge: Some(cfg.p_edge),
        batch: Some(cfg.batch),
        lr: Some(cfg.lr),
    };
    emit(&a.out, &checkpoint_to_string(&report.model, &meta), stdout)
}

fn solve(a: SolveArgs, stdout: &mut dyn Write) -> CliResult {
    let kind = match a.solver {
        SolverName::GnnGreedy => SolverKind::GnnGreedy,
        SolverName::GnnBeam if a.beam_width == 0 => {
            return Err(CliError::invalid("--beam-width must be at least 1"));
        }
        SolverName::GnnBeam => SolverKind::GnnBeam(a.beam_width),
        SolverName::LeastDegree => SolverKind::LeastDegree,
        SolverName::Exact => SolverKind::Exact,
    };
    let model = if kind.needs_model() {
        Some(load_model(a.checkpoint.as_deref())?)
    } else {
        None
    };
    let graphs = read_input(&a.input)?;
    let mut out = String::new();
    let mut dot = String::new();
    let mut solved = 0;
    for (i, (g, _)) in graphs.iter().enumerate() {
        let res = solve_with(kind, g, model.as_ref(), mix(a.seed, &[i as u64]), a.exact_budget)
            .map_err(CliError::internal)?;
        solved += usize::from(res.is_solution);
        if res.walk.is_empty() {
            out.push_str("none\n");
        } else {
            out.push_str(&format!("{}\n", res.walk));
        }
        if a.dot.is_some() {
            dot.push_str(&g.to_dot(res.is_solution.then_some(&res.walk)));
        }
    }
    out.push_str(&format!("solved {solved} of {} with {kind}\n", graphs.len()));
    stdout.write_all(out.as_bytes()).map_err(CliError::internal)?;
    match &a.dot {
        Some(path) => emit(path, &dot, stdout),
        None => Ok(()),
    }
}

fn eval(a: EvalArgs, stdout: &mut dyn Write) -> CliResult {
    let mut spec = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
            ExperimentSpec::from_config_str(&text).map_err(CliError::invalid)?
        }
        None => ExperimentSpec::default(),
    };
    let beam_width = a.beam_width.unwrap_or(1);
    if let Some(list) = &a.solvers {
        spec.solvers = split_list(list)
            .iter()
            .map(|s| SolverKind::parse_with_width(s, beam_width))
            .collect::<Result<_, _>>()
            .map_err(CliError::invalid)?;
    }
    if let Some(list) = &a.sizes {
        spec.sizes = split_list(list)
            .iter()
            .map(|s| s.parse().map_err(|e| CliError::invalid(format!("size `{s}`: {e}"))))
            .collect::<Result<_, _>>()?;
    }
    if let Some(c) = a.count {
        spec.count = c;
    }
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    if let Some(p) = a.p_hamilton {
        spec.p_hamilton = p;
    }
    if let Some(j) = a.jobs {
        spec.jobs = j;
    }
    if let Some(b) = a.exact_budget {
        spec.exact_budget = b;
    }
    if a.checkpoint.is_some() {
        spec.checkpoint = a.checkpoint.clone();
    }
    spec.validate().map_err(CliError::invalid)?;
    if spec.solvers.iter().any(|s| s.needs_model()) {
        // Surface a bad checkpoint as an input error before any work.
        load_model(spec.checkpoint.as_deref())?;
    }
    let reports = run_experiment(&spec).map_err(CliError::internal)?;
    emit(&a.csv, &report_to_csv(&reports).map_err(CliError::internal)?, stdout)?;
    if let Some(path) = &a.json {
        let mut json = report_to_json(&reports).map_err(CliError::internal)?;
        json.push('\n');
        emit(path, &json, stdout)?;
    }
    Ok(())
}

fn reduce(a: ReduceArgs, stdout: &mut dyn Write) -> CliResult {
    let graphs = read_input(&a.input)?;
    let pad = match &a.pad {
        Some(spec) => {
            let (v, k) = spec
                .split_once(',')
                .ok_or_else(|| CliError::invalid(format!("--pad expects V,K, got `{spec}`")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|e| CliError::invalid(format!("--pad `{spec}`: {e}")))
            };
            Some((parse(v)?, parse(k)?))
        }
        None => None,
    };
    let mut out = String::new();
    for (g, _) in &graphs {
        let text = match pad {
            Some((v, k)) => pad_hcp(g, v, k).map_err(CliError::invalid)?.graph.serialize(),
            None => hcp_to_tsp(g).map_err(CliError::invalid)?.serialize(),
        };
        out.push_str(&text);
    }
    emit(&a.out, &out, stdout)
}

fn grad(a: GradcheckArgs, stdout: &mut dyn Write) -> CliResult {
    if a.coordinates == 0 {
        return Err(CliError::invalid("--coordinates must be at least 1"));
    }
    let cfg = GradcheckConfig {
        seed: a.seed,
        coordinates: a.coordinates,
        ..GradcheckConfig::default()
    };
    let report = gradcheck(&cfg).map_err(CliError::internal)?;
    writeln!(
        stdout,
        "checked {} coordinates, max relative error {:.3e}",
        report.checks.len(),
        report.max_rel_error
    )
    .map_err(CliError::internal)?;
    if report.max_rel_error > GRADCHECK_TOLERANCE {
        let worst = report.worst().expect("at least one coordinate");
        return Err(CliError::Internal(format!(
            "gradient mismatch at {}[{}]: analytic {:e}, numeric {:e}",
            worst.tensor, worst.index, worst.analytic, worst.numeric
        )));
    }
    Ok(())
}
