//! `rifle` command-line front end.
//!
//! Every subcommand prints one JSON document on standard output. Exit codes:
//! 0 on success, 2 for invalid input or usage, 3 for numerical failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ndarray::ArrayView1;
use serde_json::{json, Value};

use rifle::harness::{
    cross_validate_k, fit_sparse, load_pair_csv, read_matrix_csv, run_experiment,
    simulate_scenario, CvData, ExperimentSpec, FitSettings, ScenarioKind,
};
use rifle::models::{
    cca_build, cca_split, count_mismatches, fda_build, fda_classify, sir_build, LabeledDataset,
    PairedDataset, SlicedDataset,
};
use rifle::oracle::theorem1_quantities;
use rifle::rng::rng_substream;
use rifle::solver::default_step_size;
use rifle::{
    rifle_warm_start, Result, RifleConfig, RifleError, RifleResult, StepSize,
    WarmStartSchedule,
};

#[derive(Parser)]
#[command(name = "rifle", version, about = "Sparse generalized eigenvectors by truncated Rayleigh flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a sparse generalized eigenproblem given as two CSV matrices.
    Solve(SolveArgs),
    /// Sparse Fisher discriminant direction from labeled data.
    Fda(FdaArgs),
    /// Sparse leading canonical pair from two data blocks.
    Cca(CcaArgs),
    /// Sparse sliced inverse regression direction.
    Sir(SirArgs),
    /// Draw one data set from a simulation scenario and write it as CSV.
    Simulate(SimulateArgs),
    /// Run an experiment spec.
    Bench(BenchArgs),
    /// Print the convergence-theorem quantities for a small pencil.
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Fixed step size; defaults to 1/(2·1.05·λ̂max(B)).
    #[arg(long)]
    eta: Option<f64>,
    /// Seed for the random initial vector.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Explicit decreasing truncation levels ending at k.
    #[arg(long, value_delimiter = ',')]
    schedule: Option<Vec<usize>>,
    /// Run a single stage at k instead of the default warm start.
    #[arg(long)]
    no_warm_start: bool,
    #[arg(long, default_value_t = rifle::solver::DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long, default_value_t = rifle::solver::DEFAULT_TOL)]
    tol: f64,
}

impl FitArgs {
    fn settings(&self, restarts: usize) -> FitSettings {
        FitSettings {
            eta: self.eta,
            schedule: self.schedule.clone(),
            warm_start: !self.no_warm_start,
            max_iter: self.max_iter,
            tol: self.tol,
            restarts,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Args)]
struct SelectArgs {
    /// Truncation levels to choose from by cross-validation.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Random initial vectors per fit; the largest quotient wins.
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Args)]
struct FdaArgs {
    /// Feature matrix, one observation per row.
    #[arg(long)]
    x: PathBuf,
    /// One class label (0, 1, ...) per line.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, requires = "test_labels")]
    test_x: Option<PathBuf>,
    #[arg(long, requires = "test_x")]
    test_labels: Option<PathBuf>,
    #[command(flatten)]
    select: SelectArgs,
}

#[derive(Args)]
struct CcaArgs {
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    y: PathBuf,
    #[command(flatten)]
    select: SelectArgs,
}

#[derive(Args)]
struct SirArgs {
    #[arg(long)]
    x: PathBuf,
    /// One response value per line.
    #[arg(long)]
    response: PathBuf,
    /// Number of equal-count slices for a continuous response.
    #[arg(long, conflicts_with = "categorical")]
    slices: Option<usize>,
    /// Treat the response as class labels, one slice per class.
    #[arg(long)]
    categorical: bool,
    #[command(flatten)]
    select: SelectArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// fda-binary, fda-multiclass, cca, sir or planted.
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    d: usize,
    /// Total training sample size.
    #[arg(long, default_value_t = 0)]
    n: usize,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Directory for rows.csv and summary.json; overrides the spec.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Run at the dimensions and replication counts of the original study.
    #[arg(long)]
    full: bool,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Population pencil.
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Estimated pencil; the perturbation is the difference to the population one.
    #[arg(long, requires = "b_hat")]
    a_hat: Option<PathBuf>,
    #[arg(long, requires = "a_hat")]
    b_hat: Option<PathBuf>,
    /// Sparsity of the leading eigenvector.
    #[arg(long)]
    s: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long = "const-a", default_value_t = 0.05)]
    const_a: f64,
    #[arg(long = "const-c", default_value_t = 0.05)]
    const_c: f64,
}

fn sparse_entries(v: &ArrayView1<f64>) -> Value {
    let entries: Vec<Value> = v
        .iter()
        .enumerate()
        .filter(|(_, x)| **x != 0.0)
        .map(|(i, x)| json!([i, x]))
        .collect();
    Value::Array(entries)
}

fn fit_summary(result: &RifleResult) -> Value {
    json!({
        "v": sparse_entries(&result.v.view()),
        "support": result.support(),
        "rho": result.rho,
        "iterations": result.iterations,
        "converged": result.converged,
        "eta": result.eta,
    })
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Some(b), Value::Object(e)) = (base.as_object_mut(), extra) {
        b.extend(e);
    }
    base
}

fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let m = read_matrix_csv(path)?;
    if m.ncols() != 1 {
        return Err(RifleError::InvalidInput(format!(
            "{}: expected one value per line, found {} columns",
            path.display(),
            m.ncols()
        )));
    }
    Ok(m.column(0).to_vec())
}

fn read_labels(path: &Path) -> Result<Vec<usize>> {
    read_vector(path)?
        .into_iter()
        .map(|x| {
            if x >= 0.0 && x.fract() == 0.0 {
                Ok(x as usize)
            } else {
                Err(RifleError::InvalidInput(format!(
                    "{}: label {x} is not a nonnegative integer",
                    path.display()
                )))
            }
        })
        .collect()
}

fn solve(args: &SolveArgs) -> Result<Value> {
    let loaded = load_pair_csv(&args.a, &args.b)?;
    let d = loaded.pair.dim();
    let mut config = RifleConfig::new(args.k)
        .with_seed(args.fit.seed)
        .with_max_iter(args.fit.max_iter)
        .with_tol(args.fit.tol);
    if let Some(eta) = args.fit.eta {
        config.eta = StepSize::Fixed(eta);
    }
    config.validate(d)?;
    let schedule = match &args.fit.schedule {
        Some(seq) => WarmStartSchedule::new(seq.clone())?,
        None if args.fit.no_warm_start => WarmStartSchedule::single(args.k)?,
        None => WarmStartSchedule::default_for(args.k, d),
    };
    let out = rifle_warm_start(&loaded.pair, &config, &schedule)?;
    Ok(merge(
        fit_summary(&out.result),
        json!({
            "schedule": schedule.k_sequence(),
            "warnings": loaded.warnings,
        }),
    ))
}

/// Cross-validates when the grid has more than one level, then refits on all data.
fn select_and_fit(
    data: CvData<'_>,
    pair: &rifle::MatrixPair,
    max_stage: usize,
    args: &SelectArgs,
) -> Result<(RifleResult, Value)> {
    let settings = args.fit.settings(args.restarts);
    let mut rng = rng_substream(args.fit.seed, 0);
    let cv = cross_validate_k(data, &args.k, args.folds, &settings, &mut rng)?;
    let mut fit_rng = rng_substream(args.fit.seed, 1);
    let result = fit_sparse(pair, cv.selected_k, &settings, max_stage, &mut fit_rng)?;
    let scores = if cv.k_grid.len() > 1 {
        json!({ "k_grid": cv.k_grid, "mean_loss": cv.mean_scores })
    } else {
        Value::Null
    };
    Ok((result, json!({ "selected_k": cv.selected_k, "cv": scores })))
}

fn fda(args: &FdaArgs) -> Result<Value> {
    let data = LabeledDataset::new(read_matrix_csv(&args.x)?, read_labels(&args.labels)?)?;
    let problem = fda_build(&data)?;
    let max_stage = data.n().saturating_sub(data.classes()).max(1);
    let (result, selection) = select_and_fit(CvData::Fda(&data), &problem.pair, max_stage, &args.select)?;
    let train_pred = fda_classify(&result.v.view(), &data, &data.x())?;
    let mut extra = json!({
        "classes": data.classes(),
        "training_errors": count_mismatches(&train_pred, data.labels()),
    });
    if let (Some(tx), Some(tl)) = (&args.test_x, &args.test_labels) {
        let test_x = read_matrix_csv(tx)?;
        let test_labels = read_labels(tl)?;
        if test_labels.len() != test_x.nrows() {
            return Err(RifleError::DimMismatch {
                expected: test_x.nrows(),
                found: test_labels.len(),
            });
        }
        let pred = fda_classify(&result.v.view(), &data, &test_x.view())?;
        extra["test_errors"] = json!(count_mismatches(&pred, &test_labels));
        extra["n_test"] = json!(test_labels.len());
    }
    Ok(merge(merge(fit_summary(&result), selection), extra))
}

fn cca(args: &CcaArgs) -> Result<Value> {
    let data = PairedDataset::new(read_matrix_csv(&args.x)?, read_matrix_csv(&args.y)?)?;
    let (dx, dy) = data.dims();
    let problem = cca_build(&data)?;
    let max_stage = data.n().saturating_sub(1).max(1);
    let (result, selection) = select_and_fit(CvData::Cca(&data), &problem.pair, max_stage, &args.select)?;
    let halves = cca_split(&result.v.view(), dx, dy)?;
    let extra = json!({
        "v_x": sparse_entries(&halves.x.view()),
        "v_y": sparse_entries(&halves.y.view()),
        "x_zero": halves.x_zero,
        "y_zero": halves.y_zero,
    });
    Ok(merge(merge(fit_summary(&result), selection), extra))
}

fn sir(args: &SirArgs) -> Result<Value> {
    let x = read_matrix_csv(&args.x)?;
    let data = if args.categorical {
        SlicedDataset::categorical(x, read_labels(&args.response)?)?
    } else {
        let slices = args.slices.ok_or_else(|| {
            RifleError::InvalidInput("give --slices for a continuous response or --categorical".into())
        })?;
        SlicedDataset::continuous(x, read_vector(&args.response)?, slices)?
    };
    let problem = sir_build(&data)?;
    let max_stage = data.n().saturating_sub(1).max(1);
    let (result, selection) = select_and_fit(CvData::Sir(&data), &problem.pair, max_stage, &args.select)?;
    Ok(merge(fit_summary(&result), selection))
}

fn simulate(args: &SimulateArgs) -> Result<Value> {
    let kind: ScenarioKind = serde_json::from_value(Value::String(args.scenario.clone()))
        .map_err(|_| RifleError::InvalidInput(format!("unknown scenario {:?}", args.scenario)))?;
    simulate_scenario(kind, args.d, args.n, args.s, args.lambda1, args.seed, &args.out)
}

fn bench(args: &BenchArgs) -> Result<Value> {
    let mut spec = ExperimentSpec::load(&args.spec)?;
    if args.full {
        spec = spec.paper_scale();
    }
    if let Some(dir) = &args.output {
        spec.output = Some(dir.clone());
    }
    let report = run_experiment(&spec)?;
    Ok(serde_json::to_value(&report).expect("report serializes"))
}

fn diagnose(args: &DiagnoseArgs) -> Result<Value> {
    let loaded = load_pair_csv(&args.a, &args.b)?;
    let pair = loaded.pair;
    let d = pair.dim();
    let (e_a, e_b, b_hat) = match (&args.a_hat, &args.b_hat) {
        (Some(a_hat), Some(b_hat)) => {
            let hat = load_pair_csv(a_hat, b_hat)?;
            (
                hat.pair.a().sub(pair.a())?,
                hat.pair.b().sub(pair.b())?,
                hat.pair.b().clone(),
            )
        }
        _ => (
            rifle::SymMatrix::zeros(d),
            rifle::SymMatrix::zeros(d),
            pair.b().clone(),
        ),
    };
    let eta = match args.eta {
        Some(eta) => eta,
        None => default_step_size(&b_hat)?,
    };
    let q = theorem1_quantities(&pair, (&e_a, &e_b), args.s, args.k, eta, args.const_a, args.const_c)?;
    let mut out = serde_json::to_value(&q).expect("quantities serialize");
    out["warnings"] = json!(loaded.warnings);
    Ok(out)
}

fn run(cli: &Cli) -> Result<Value> {
    match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Fda(a) => fda(a),
        Command::Cca(a) => cca(a),
        Command::Sir(a) => sir(a),
        Command::Simulate(a) => simulate(a),
        Command::Bench(a) => bench(a),
        Command::Diagnose(a) => diagnose(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(value) => {
            if let Some(warnings) = value.get("warnings").and_then(Value::as_array) {
                for w in warnings.iter().filter_map(Value::as_str) {
                    eprintln!("warning: {w}");
                }
            }
            let text = serde_json::to_string_pretty(&value).expect("output serializes");
            // a closed pipe downstream is not a failure of the command
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
