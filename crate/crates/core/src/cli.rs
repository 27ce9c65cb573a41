//! Command-line front end: scenario generation, clustering, reduction,
//! solving, evaluation, and the grid experiment harness.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 solver failure
//! (infeasible, unbounded, budget exhausted), 4 certificate violation. Code 4
//! is a soundness tripwire: every emitted metrics report re-validates its own
//! approximation certificate before it is written, and a violation aborts the
//! whole run.
//!
//! Reports are reproducible: the same configuration and seeds produce
//! byte-identical output apart from the dedicated timing columns. Every CSV
//! row starts with a `schema_version` field and ends with the RNG algorithm
//! identifier and the full configuration echo.

use crate::ambiguity::{from_samples, AmbiguityError, AmbiguitySet};
use crate::clustering::{
    hyperrect_bound, hyperrect_breakpoints, hyperrect_partition, kmeans_partition,
    optimal_partition, ClusterError,
};
use crate::dro::{
    evaluate_solution, reduce_and_solve_with, solve, solve_box_dual, solve_cutting_plane,
    AnyPartition, DroError, DroInstance, DroObjective, DroSolution, FeasibleSet, ReductionMethod,
};
use crate::lp::{LpError, Relation};
use crate::matrix_clustering::{frobenius_kmeans, optimal_matrix_partition, MatrixClusterError};
use crate::scenarios::{
    generate_perturbed, MatrixScenarioSet, PerturbationSpec, ScenarioError, ScenarioSet,
    RNG_ALGORITHM,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::collections::HashMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Version stamp of the CSV report schema, first column of every row.
pub const SCHEMA_VERSION: &str = "1";

/// Runs the CLI on `std::env::args` and returns the process exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Runs the CLI on an explicit argument vector (first element is the program
/// name) and returns the exit code; output goes to the real stdout/stderr.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprint!("{e}");
            return 2;
        }
    };
    let result = match cli.cmd {
        Cmd::Generate(a) => cmd_generate(a),
        Cmd::Cluster(a) => cmd_cluster(a),
        Cmd::Reduce(a) => cmd_reduce(a),
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Evaluate(a) => cmd_evaluate(a),
        Cmd::Experiment(a) => cmd_experiment(a),
        Cmd::Bound(a) => cmd_bound(a),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("error: {msg}");
            3
        }
        Err(Failure::Certificate(msg)) => {
            eprintln!("error: certificate violation: {msg}");
            4
        }
    }
}

#[derive(Parser)]
#[command(
    name = "scenred",
    version,
    about = "Scenario reduction with certified approximation guarantees for \
             distributionally robust optimization"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a scenario set by componentwise perturbation of a base vector
    Generate(GenerateArgs),
    /// Partition a scenario set and certify its approximation guarantee
    Cluster(ClusterArgs),
    /// Cluster and emit the reduced scenario set of representatives
    Reduce(ReduceArgs),
    /// Solve a DRO instance, optionally through scenario reduction
    Solve(SolveArgs),
    /// Worst-case expected objective of a fixed decision
    Evaluate(EvaluateArgs),
    /// Run the reduction pipeline over a (count x K x s_inc x seed) grid
    Experiment(ExperimentArgs),
    /// Hyperrectangle splitting bound and breakpoints for a box
    Bound(BoundArgs),
}

/// Failure with its exit code class.
enum Failure {
    /// Exit 2: bad flags, malformed files, invalid data.
    Usage(String),
    /// Exit 3: the instance or search defeated a solver.
    Solver(String),
    /// Exit 4: an emitted report failed its own certificate re-validation.
    Certificate(String),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<ClusterError> for Failure {
    fn from(e: ClusterError) -> Self {
        match e {
            ClusterError::SearchBudgetExceeded { .. } => Failure::Solver(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<MatrixClusterError> for Failure {
    fn from(e: MatrixClusterError) -> Self {
        match e {
            MatrixClusterError::Linalg(_) => Failure::Solver(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<LpError> for Failure {
    fn from(e: LpError) -> Self {
        match e {
            LpError::CycleDetected | LpError::Numerical(_) => Failure::Solver(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<AmbiguityError> for Failure {
    fn from(e: AmbiguityError) -> Self {
        match e {
            AmbiguityError::BoundsViolated { .. }
            | AmbiguityError::RankDeficient(_)
            | AmbiguityError::Linalg(_) => Failure::Solver(e.to_string()),
            AmbiguityError::Lp(lp) => lp.into(),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<DroError> for Failure {
    fn from(e: DroError) -> Self {
        match e {
            DroError::Infeasible
            | DroError::Unbounded
            | DroError::IterationLimit { .. }
            | DroError::NodeLimit { .. } => Failure::Solver(e.to_string()),
            DroError::Lp(lp) => lp.into(),
            DroError::Ambiguity(a) => a.into(),
            DroError::Cluster(c) => c.into(),
            DroError::MatrixCluster(m) => m.into(),
            DroError::Scenario(s) => s.into(),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn io_usage(path: &Path, e: std::io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MethodArg {
    /// Exact guarantee-optimal partition search
    Opt,
    /// Seeded k-means (Frobenius k-means for matrix sets)
    Kmeans,
    /// Geometric splitting of the bounding box
    Hyperrect,
}

impl MethodArg {
    fn name(self) -> &'static str {
        match self {
            MethodArg::Opt => "opt",
            MethodArg::Kmeans => "kmeans",
            MethodArg::Hyperrect => "hyperrect",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum SolverArg {
    /// Box dual for linear objectives over polytopal ambiguity, else cutting plane
    Auto,
    /// Force the box-dual reformulation
    Dual,
    /// Force the cutting-plane loop
    Cutting,
}

// ---------------------------------------------------------------------------
// generate

#[derive(Args, Serialize)]
struct GenerateArgs {
    /// Base cost vector, comma separated, all entries strictly positive
    #[arg(long, value_delimiter = ',', required = true)]
    base: Vec<f64>,
    /// Relative perturbation half-width in [0, 1)
    #[arg(long = "s-inc")]
    s_inc: f64,
    /// Number of scenarios to draw
    #[arg(long)]
    count: usize,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (.csv or .json); stdout CSV when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Failure> {
    let spec = PerturbationSpec {
        base: args.base.clone(),
        s_inc: args.s_inc,
        count: args.count,
        seed: args.seed,
    };
    let set = generate_perturbed(&spec)?;
    match &args.out {
        Some(path) => set.save_path(path)?,
        None => {
            let mut buf = Vec::new();
            set.save_csv(&mut buf)?;
            print_bytes(&buf);
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// cluster / reduce

#[derive(Args, Serialize)]
struct ClusterArgs {
    /// Scenario file: CSV or JSON vectors, or a matrix-set JSON with --matrix
    #[arg(long = "in")]
    input: PathBuf,
    /// Number of clusters (required for opt and kmeans)
    #[arg(long)]
    k: Option<usize>,
    /// Clustering method
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Seed for kmeans initialization
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration cap for kmeans
    #[arg(long = "max-iter", default_value_t = 100)]
    max_iter: usize,
    /// Splits per axis for hyperrect, comma separated
    #[arg(long, value_delimiter = ',')]
    splits: Option<Vec<usize>>,
    /// Treat the input as a matrix scenario set
    #[arg(long)]
    matrix: bool,
    /// Output partition JSON; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Shared clustering core of `cluster` and `reduce`.
fn run_clustering(args: &ClusterArgs) -> Result<AnyPartition, Failure> {
    let method = args
        .method
        .ok_or_else(|| Failure::Usage("--method is required".into()))?;
    let need_k = || {
        args.k.ok_or_else(|| {
            Failure::Usage(format!("--k is required for --method {}", method.name()))
        })
    };
    if args.matrix {
        let set = MatrixScenarioSet::load_path(&args.input)?;
        let partition = match method {
            MethodArg::Opt => optimal_matrix_partition(&set, need_k()?)?,
            MethodArg::Kmeans => frobenius_kmeans(&set, need_k()?, args.seed, args.max_iter)?,
            MethodArg::Hyperrect => {
                return Err(Failure::Usage(
                    "--method hyperrect needs vector scenarios; it has no matrix analogue".into(),
                ))
            }
        };
        return Ok(AnyPartition::Matrix(partition));
    }
    let set = ScenarioSet::load_path(&args.input)?;
    let partition = match method {
        MethodArg::Opt => optimal_partition(&set, need_k()?)?,
        MethodArg::Kmeans => kmeans_partition(&set, need_k()?, args.seed, args.max_iter)?,
        MethodArg::Hyperrect => {
            let splits = args.splits.as_ref().ok_or_else(|| {
                Failure::Usage("--splits is required for --method hyperrect".into())
            })?;
            let reduction = hyperrect_partition(&set, splits)?;
            if let Some(k) = args.k {
                if reduction.partition.k != k {
                    return Err(Failure::Usage(format!(
                        "--k {k} does not match the {} occupied cells the splits produce; \
                         omit --k or pass the realized value",
                        reduction.partition.k
                    )));
                }
            }
            reduction.partition
        }
    };
    Ok(AnyPartition::Vector(partition))
}

fn cmd_cluster(args: ClusterArgs) -> Result<(), Failure> {
    let partition = run_clustering(&args)?;
    write_json(args.out.as_deref(), &partition)
}

#[derive(Args, Serialize)]
struct ReduceArgs {
    #[command(flatten)]
    cluster: ClusterArgs,
    /// Apply a previously saved partition instead of clustering
    #[arg(long, conflicts_with_all = ["k", "splits", "method"])]
    partition: Option<PathBuf>,
    /// Output file for the reduced scenario set (representatives)
    #[arg(long = "out-scenarios")]
    out_scenarios: Option<PathBuf>,
}

fn cmd_reduce(args: ReduceArgs) -> Result<(), Failure> {
    let partition = match &args.partition {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_usage(path, e))?;
            let partition: AnyPartition = serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            // The saved partition must fit the input set it is applied to.
            let n = if args.cluster.matrix {
                MatrixScenarioSet::load_path(&args.cluster.input)?.len()
            } else {
                ScenarioSet::load_path(&args.cluster.input)?.len()
            };
            if partition.assignment().len() != n {
                return Err(Failure::Usage(format!(
                    "partition assigns {} scenarios but {} holds {n}",
                    partition.assignment().len(),
                    args.cluster.input.display()
                )));
            }
            partition
        }
        None => run_clustering(&args.cluster)?,
    };
    match &partition {
        AnyPartition::Vector(p) => {
            let reduced = ScenarioSet::new(p.representatives.clone(), None)?;
            match &args.out_scenarios {
                Some(path) => reduced.save_path(path)?,
                None => {
                    let mut buf = Vec::new();
                    reduced.save_csv(&mut buf)?;
                    print_bytes(&buf);
                }
            }
        }
        AnyPartition::Matrix(p) => {
            let reduced = MatrixScenarioSet::new(p.representatives.clone())?;
            let path = args.out_scenarios.as_ref().ok_or_else(|| {
                Failure::Usage("--out-scenarios is required for matrix sets".into())
            })?;
            reduced.save_path(path)?;
        }
    }
    if let Some(path) = &args.cluster.out {
        write_json(Some(path), &partition)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// instance documents

/// Objective entry of an instance document: inline scenarios or a reference
/// to a scenario file (resolved relative to the document).
#[derive(serde::Deserialize)]
#[serde(untagged)]
enum ObjectiveDoc {
    Inline(DroObjective),
    FileRef { kind: String, file: PathBuf },
}

#[derive(serde::Deserialize)]
struct InstanceDoc {
    objective: ObjectiveDoc,
    feasible: FeasibleSet,
    ambiguity: AmbiguitySet,
}

fn load_instance(path: &Path) -> Result<DroInstance, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_usage(path, e))?;
    let doc: InstanceDoc = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let objective = match doc.objective {
        ObjectiveDoc::Inline(obj) => obj,
        ObjectiveDoc::FileRef { kind, file } => {
            let resolved = match path.parent() {
                Some(dir) if file.is_relative() => dir.join(&file),
                _ => file.clone(),
            };
            match kind.as_str() {
                "linear" => DroObjective::Linear { scenarios: ScenarioSet::load_path(&resolved)? },
                "quadratic" => {
                    DroObjective::Quadratic { scenarios: MatrixScenarioSet::load_path(&resolved)? }
                }
                other => {
                    return Err(Failure::Usage(format!(
                        "objective kind must be linear or quadratic, got {other}"
                    )))
                }
            }
        }
    };
    DroInstance::new(objective, doc.feasible, doc.ambiguity).map_err(Failure::from)
}

// ---------------------------------------------------------------------------
// solve

#[derive(Args, Serialize)]
struct SolveArgs {
    /// DRO instance JSON
    #[arg(long)]
    instance: PathBuf,
    /// Solver routine
    #[serde(skip)]
    #[arg(long, value_enum, default_value_t = SolverArg::Auto)]
    solver: SolverArg,
    /// Reduce to K scenarios first and report the full metrics
    #[arg(long)]
    k: Option<usize>,
    /// Reduction method when --k is given
    #[arg(long, value_enum, default_value_t = MethodArg::Kmeans)]
    method: MethodArg,
    /// Seed for kmeans reduction
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration cap for kmeans reduction
    #[arg(long = "max-iter", default_value_t = 100)]
    max_iter: usize,
    /// Splits per axis for hyperrect reduction
    #[arg(long, value_delimiter = ',')]
    splits: Option<Vec<usize>>,
    /// Output JSON; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

fn reduction_method(
    method: MethodArg,
    seed: u64,
    max_iter: usize,
    splits: &Option<Vec<usize>>,
) -> Result<ReductionMethod, Failure> {
    Ok(match method {
        MethodArg::Opt => ReductionMethod::Opt,
        MethodArg::Kmeans => ReductionMethod::Kmeans { seed, max_iter },
        MethodArg::Hyperrect => {
            let splits = splits.clone().ok_or_else(|| {
                Failure::Usage("--splits is required for --method hyperrect".into())
            })?;
            ReductionMethod::Hyperrect { splits }
        }
    })
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.instance)?;
    match args.k {
        None => {
            let solution = match args.solver {
                SolverArg::Auto => solve(&instance),
                SolverArg::Dual => solve_box_dual(&instance),
                SolverArg::Cutting => solve_cutting_plane(&instance),
            }?;
            #[derive(Serialize)]
            struct SolveReport<'a> {
                schema_version: &'static str,
                config: &'a SolveArgs,
                solution: DroSolution,
            }
            write_json(
                args.out.as_deref(),
                &SolveReport { schema_version: SCHEMA_VERSION, config: &args, solution },
            )
        }
        Some(k) => {
            if args.solver != SolverArg::Auto {
                return Err(Failure::Usage(
                    "--solver cannot be combined with --k: the reduction pipeline picks the \
                     same routine for both problems"
                        .into(),
                ));
            }
            let method = reduction_method(args.method, args.seed, args.max_iter, &args.splits)?;
            let k = realized_k(&instance, &method, k)?;
            let run = reduce_and_solve_with(&instance, &method, k, None)?;
            // Soundness tripwire: never write a report whose certificate fails.
            if !run.report.certificate_ok {
                return Err(Failure::Certificate(format!(
                    "evaluated upper bound {} exceeds guarantee {} x original objective {}",
                    run.report.evaluated_upper, run.report.guarantee, run.report.original_objective
                )));
            }
            #[derive(Serialize)]
            struct MetricsDoc<'a> {
                schema_version: &'static str,
                config: &'a SolveArgs,
                report: crate::dro::MetricsReport,
                original: DroSolution,
                reduced: DroSolution,
                partition: AnyPartition,
            }
            write_json(
                args.out.as_deref(),
                &MetricsDoc {
                    schema_version: SCHEMA_VERSION,
                    config: &args,
                    report: run.report,
                    original: run.original,
                    reduced: run.reduced,
                    partition: run.partition,
                },
            )
        }
    }
}

/// Hyperrect splitting fixes K itself; pre-run it so the pipeline is called
/// with the realized cluster count.
fn realized_k(
    instance: &DroInstance,
    method: &ReductionMethod,
    requested: usize,
) -> Result<usize, Failure> {
    if let (ReductionMethod::Hyperrect { splits }, DroObjective::Linear { scenarios }) =
        (method, &instance.objective)
    {
        let reduction = hyperrect_partition(scenarios, splits)?;
        return Ok(reduction.partition.k);
    }
    Ok(requested)
}

// ---------------------------------------------------------------------------
// evaluate

#[derive(Args, Serialize)]
struct EvaluateArgs {
    /// DRO instance JSON
    #[arg(long)]
    instance: PathBuf,
    /// Candidate decision vector, comma separated
    #[arg(long, value_delimiter = ',', conflicts_with = "solution")]
    x: Option<Vec<f64>>,
    /// Solution JSON produced by `solve` (its x is evaluated)
    #[arg(long)]
    solution: Option<PathBuf>,
    /// Output JSON; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.instance)?;
    let x = match (&args.x, &args.solution) {
        (Some(x), None) => x.clone(),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| io_usage(path, e))?;
            let doc: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            // Accept both a bare DroSolution and the `solve` report wrapper.
            let x_value = doc
                .get("solution")
                .and_then(|s| s.get("x"))
                .or_else(|| doc.get("x"))
                .ok_or_else(|| {
                    Failure::Usage(format!("{}: no x vector found", path.display()))
                })?;
            serde_json::from_value(x_value.clone())
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        _ => return Err(Failure::Usage("pass exactly one of --x or --solution".into())),
    };
    let value = evaluate_solution(&instance, &x)?;
    #[derive(Serialize)]
    struct EvalReport<'a> {
        schema_version: &'static str,
        config: &'a EvaluateArgs,
        value: f64,
        x: &'a [f64],
    }
    write_json(
        args.out.as_deref(),
        &EvalReport { schema_version: SCHEMA_VERSION, config: &args, value, x: &x },
    )
}

// ---------------------------------------------------------------------------
// experiment

#[derive(Args, Serialize, Clone)]
struct ExperimentArgs {
    /// Base cost vector for scenario generation
    #[arg(long, value_delimiter = ',', required = true)]
    base: Vec<f64>,
    /// Scenario counts to sweep, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    counts: Vec<usize>,
    /// Cluster counts to sweep, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    ks: Vec<usize>,
    /// Perturbation half-widths to sweep, comma separated
    #[arg(long = "s-incs", value_delimiter = ',', required = true)]
    s_incs: Vec<f64>,
    /// Seeds to sweep, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    seeds: Vec<u64>,
    /// Reduction methods to run at every grid point
    #[arg(long, value_delimiter = ',', value_enum, default_value = "kmeans")]
    methods: Vec<MethodArg>,
    /// Splits per axis when methods include hyperrect
    #[arg(long, value_delimiter = ',')]
    splits: Option<Vec<usize>>,
    /// Sample count behind the confidence-box ambiguity (0 = full simplex)
    #[arg(long, default_value_t = 100)]
    nsamp: usize,
    /// Confidence level for the ambiguity box
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Variable upper bound of the covering feasible set
    #[arg(long = "x-cap", default_value_t = 10.0)]
    x_cap: f64,
    /// Worker threads; values above 1 make timing columns noisy
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Output CSV; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Desk-scale instance family for the experiment harness: cover one unit of
/// demand at scenario-dependent unit costs, `min sup E[s'x]` over
/// `{sum x >= 1, 0 <= x <= cap}`, ambiguity from `nsamp` samples of the
/// uniform empirical distribution.
fn covering_instance(
    scenarios: ScenarioSet,
    nsamp: usize,
    delta: f64,
    x_cap: f64,
) -> Result<DroInstance, Failure> {
    let n = scenarios.dim();
    let count = scenarios.len();
    let mut feasible = FeasibleSet::nonneg(n);
    feasible.add_constraint(vec![1.0; n], Relation::Ge, 1.0);
    for j in 0..n {
        feasible.upper[j] = x_cap;
    }
    let p_hat = vec![1.0 / count as f64; count];
    let ambiguity = from_samples(&p_hat, nsamp, delta)?;
    Ok(DroInstance::new(DroObjective::Linear { scenarios }, feasible, ambiguity)?)
}

/// One grid point of the experiment.
#[derive(Clone)]
struct GridPoint {
    method: MethodArg,
    count: usize,
    k: Option<usize>,
    s_inc: f64,
    seed: u64,
}

/// CSV row of the experiment report; every cell pre-rendered so blanks are
/// uniform. Column order must match `CSV_HEADER`.
struct CsvRow {
    row_type: &'static str,
    status: String,
    method: String,
    n_scenarios: String,
    k: String,
    s_inc: String,
    seed: String,
    srf: String,
    alpha: String,
    beta: String,
    guarantee: String,
    af: String,
    original_objective: String,
    reduced_objective: String,
    evaluated_upper: String,
    certificate_ok: String,
    tf: String,
    clustering_time_s: String,
    original_solve_time_s: String,
    reduced_solve_time_s: String,
}

const CSV_HEADER: [&str; 22] = [
    "schema_version",
    "row_type",
    "status",
    "method",
    "n_scenarios",
    "k",
    "s_inc",
    "seed",
    "srf",
    "alpha",
    "beta",
    "guarantee",
    "af",
    "original_objective",
    "reduced_objective",
    "evaluated_upper",
    "certificate_ok",
    "tf",
    "clustering_time_s",
    "original_solve_time_s",
    "reduced_solve_time_s",
    "rng",
];

/// Timing columns, excluded from byte-reproducibility guarantees.
pub const TIMING_COLUMNS: [&str; 4] =
    ["tf", "clustering_time_s", "original_solve_time_s", "reduced_solve_time_s"];

fn fnum(v: f64) -> String {
    format!("{v}")
}

impl CsvRow {
    fn fields(&self) -> [&str; 22] {
        [
            SCHEMA_VERSION,
            self.row_type,
            &self.status,
            &self.method,
            &self.n_scenarios,
            &self.k,
            &self.s_inc,
            &self.seed,
            &self.srf,
            &self.alpha,
            &self.beta,
            &self.guarantee,
            &self.af,
            &self.original_objective,
            &self.reduced_objective,
            &self.evaluated_upper,
            &self.certificate_ok,
            &self.tf,
            &self.clustering_time_s,
            &self.original_solve_time_s,
            &self.reduced_solve_time_s,
            RNG_ALGORITHM,
        ]
    }

    fn error(point: &GridPoint, msg: &str) -> CsvRow {
        CsvRow {
            row_type: "data",
            status: format!("error: {msg}"),
            method: point.method.name().into(),
            n_scenarios: point.count.to_string(),
            k: point.k.map(|k| k.to_string()).unwrap_or_default(),
            s_inc: fnum(point.s_inc),
            seed: point.seed.to_string(),
            srf: String::new(),
            alpha: String::new(),
            beta: String::new(),
            guarantee: String::new(),
            af: String::new(),
            original_objective: String::new(),
            reduced_objective: String::new(),
            evaluated_upper: String::new(),
            certificate_ok: String::new(),
            tf: String::new(),
            clustering_time_s: String::new(),
            original_solve_time_s: String::new(),
            reduced_solve_time_s: String::new(),
        }
    }
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), Failure> {
    if args.parallel == 0 {
        return Err(Failure::Usage("--parallel must be at least 1".into()));
    }
    if args.parallel > 1 {
        eprintln!(
            "warning: --parallel {} runs grid points concurrently; timing columns \
             (tf, *_time_s) are noisy under contention",
            args.parallel
        );
    }
    if args.methods.contains(&MethodArg::Hyperrect) && args.splits.is_none() {
        return Err(Failure::Usage("--splits is required when methods include hyperrect".into()));
    }
    for &k in &args.ks {
        if k == 0 {
            return Err(Failure::Usage("--ks entries must be at least 1".into()));
        }
    }

    // Hyperrect fixes its own K, so it sweeps only (count, s_inc, seed).
    let mut points = Vec::new();
    for &method in &args.methods {
        for &count in &args.counts {
            for &s_inc in &args.s_incs {
                for &seed in &args.seeds {
                    match method {
                        MethodArg::Hyperrect => {
                            points.push(GridPoint { method, count, k: None, s_inc, seed })
                        }
                        _ => {
                            for &k in &args.ks {
                                points.push(GridPoint { method, count, k: Some(k), s_inc, seed })
                            }
                        }
                    }
                }
            }
        }
    }

    // The original problem depends only on (count, s_inc, seed); solve each
    // one once, serially, and share the solution across methods and Ks.
    let mut originals: HashMap<(usize, u64, u64), (DroInstance, DroSolution)> = HashMap::new();
    for p in &points {
        let key = (p.count, p.s_inc.to_bits(), p.seed);
        if originals.contains_key(&key) {
            continue;
        }
        let spec = PerturbationSpec {
            base: args.base.clone(),
            s_inc: p.s_inc,
            count: p.count,
            seed: p.seed,
        };
        let set = generate_perturbed(&spec)?;
        let instance = covering_instance(set, args.nsamp, args.delta, args.x_cap)?;
        let solution = solve(&instance)?;
        originals.insert(key, (instance, solution));
    }

    let run_point = |point: &GridPoint| -> Result<CsvRow, Failure> {
        let key = (point.count, point.s_inc.to_bits(), point.seed);
        let (instance, original) = &originals[&key];
        let method = match point.method {
            MethodArg::Opt => ReductionMethod::Opt,
            MethodArg::Kmeans => ReductionMethod::Kmeans { seed: point.seed, max_iter: 100 },
            MethodArg::Hyperrect => {
                ReductionMethod::Hyperrect { splits: args.splits.clone().unwrap() }
            }
        };
        let k = match point.k {
            Some(k) => k,
            None => realized_k(instance, &method, 0)?,
        };
        let run = match reduce_and_solve_with(instance, &method, k, Some(original.clone())) {
            Ok(run) => run,
            Err(e) => {
                // Partial failures are flagged rows; the sweep continues.
                return Ok(CsvRow::error(point, &e.to_string()));
            }
        };
        let r = &run.report;
        if !r.certificate_ok {
            return Err(Failure::Certificate(format!(
                "grid point (method={}, count={}, k={}, s_inc={}, seed={}): evaluated upper \
                 bound {} exceeds guarantee {} x original objective {}",
                point.method.name(),
                point.count,
                k,
                point.s_inc,
                point.seed,
                r.evaluated_upper,
                r.guarantee,
                r.original_objective
            )));
        }
        Ok(CsvRow {
            row_type: "data",
            status: "ok".into(),
            method: r.method.clone(),
            n_scenarios: r.n_scenarios.to_string(),
            k: r.k.to_string(),
            s_inc: fnum(point.s_inc),
            seed: point.seed.to_string(),
            srf: fnum(r.srf),
            alpha: fnum(r.alpha),
            beta: fnum(r.beta),
            guarantee: fnum(r.guarantee),
            af: fnum(r.af),
            original_objective: fnum(r.original_objective),
            reduced_objective: fnum(r.reduced_objective),
            evaluated_upper: fnum(r.evaluated_upper),
            certificate_ok: r.certificate_ok.to_string(),
            tf: fnum(r.tf),
            clustering_time_s: fnum(r.clustering_time_s),
            original_solve_time_s: fnum(r.original_solve_time_s),
            reduced_solve_time_s: fnum(r.reduced_solve_time_s),
        })
    };

    let results: Vec<Result<CsvRow, Failure>> = if args.parallel == 1 {
        points.iter().map(run_point).collect()
    } else {
        let slots: Mutex<Vec<Option<Result<CsvRow, Failure>>>> =
            Mutex::new((0..points.len()).map(|_| None).collect());
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..args.parallel.min(points.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= points.len() {
                        break;
                    }
                    let row = run_point(&points[i]);
                    slots.lock().unwrap()[i] = Some(row);
                });
            }
        });
        slots.into_inner().unwrap().into_iter().map(|r| r.expect("worker filled slot")).collect()
    };

    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        rows.push(r?);
    }
    append_mean_rows(&mut rows);

    let config_echo = serde_json::to_string(&args)
        .map_err(|e| Failure::Usage(format!("config echo: {e}")))?;
    let mut buf = Vec::new();
    {
        let mut w = csv::WriterBuilder::new().from_writer(&mut buf);
        let mut header: Vec<&str> = CSV_HEADER.to_vec();
        header.push("config");
        w.write_record(&header).map_err(|e| Failure::Usage(e.to_string()))?;
        for row in &rows {
            let mut record: Vec<&str> = row.fields().to_vec();
            record.push(&config_echo);
            w.write_record(&record).map_err(|e| Failure::Usage(e.to_string()))?;
        }
        w.flush().map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match &args.out {
        Some(path) => fs::write(path, &buf).map_err(|e| io_usage(path, e))?,
        None => print_bytes(&buf),
    }
    Ok(())
}

/// Appends one mean row per (method, k, s_inc) over the successful data rows,
/// averaging every numeric column including the timing ones.
fn append_mean_rows(rows: &mut Vec<CsvRow>) {
    let mut groups: Vec<(String, String, String)> = Vec::new();
    for row in rows.iter() {
        let key = (row.method.clone(), row.k.clone(), row.s_inc.clone());
        if row.status == "ok" && !groups.contains(&key) {
            groups.push(key);
        }
    }
    let mut means = Vec::new();
    for (method, k, s_inc) in groups {
        let members: Vec<&CsvRow> = rows
            .iter()
            .filter(|r| {
                r.status == "ok" && r.method == method && r.k == k && r.s_inc == s_inc
            })
            .collect();
        let mean = |get: fn(&CsvRow) -> &String| -> String {
            let sum: f64 =
                members.iter().map(|r| get(r).parse::<f64>().unwrap_or(f64::NAN)).sum();
            fnum(sum / members.len() as f64)
        };
        means.push(CsvRow {
            row_type: "mean",
            status: "ok".into(),
            method,
            n_scenarios: String::new(),
            k,
            s_inc,
            seed: String::new(),
            srf: mean(|r| &r.srf),
            alpha: mean(|r| &r.alpha),
            beta: mean(|r| &r.beta),
            guarantee: mean(|r| &r.guarantee),
            af: mean(|r| &r.af),
            original_objective: mean(|r| &r.original_objective),
            reduced_objective: mean(|r| &r.reduced_objective),
            evaluated_upper: mean(|r| &r.evaluated_upper),
            certificate_ok: members.iter().all(|r| r.certificate_ok == "true").to_string(),
            tf: mean(|r| &r.tf),
            clustering_time_s: mean(|r| &r.clustering_time_s),
            original_solve_time_s: mean(|r| &r.original_solve_time_s),
            reduced_solve_time_s: mean(|r| &r.reduced_solve_time_s),
        });
    }
    rows.extend(means);
}

// ---------------------------------------------------------------------------
// bound

#[derive(Args)]
struct BoundArgs {
    /// Lower corner of the box, comma separated, strictly positive
    #[arg(long, value_delimiter = ',', required = true)]
    lo: Vec<f64>,
    /// Upper corner of the box, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    hi: Vec<f64>,
    /// Split counts per axis, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    splits: Vec<usize>,
}

fn cmd_bound(args: BoundArgs) -> Result<(), Failure> {
    let bound = hyperrect_bound(&args.lo, &args.hi, &args.splits)?;
    let breakpoints = hyperrect_breakpoints(&args.lo, &args.hi, &args.splits)?;
    let mut out = String::new();
    out.push_str(&format!("bound {}\n", fnum(bound)));
    for (axis, points) in breakpoints.iter().enumerate() {
        let rendered: Vec<String> = points.iter().map(|&w| fnum(w)).collect();
        out.push_str(&format!("axis {axis}: {}\n", rendered.join(" ")));
    }
    print!("{out}");
    Ok(())
}

// ---------------------------------------------------------------------------
// output plumbing

fn print_bytes(buf: &[u8]) {
    std::io::stdout().write_all(buf).expect("stdout write");
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Usage(format!("serialization: {e}")))?;
    text.push('\n');
    match path {
        Some(path) => fs::write(path, text).map_err(|e| io_usage(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
