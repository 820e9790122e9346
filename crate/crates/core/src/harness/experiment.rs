//! Replicated simulation experiments driven by a JSON spec.
//!
//! Every replication of every sample-size cell draws from its own substream
//! `rng_substream(seed, cell·replications + replicate)`, so results do not
//! depend on how replications are scheduled across workers. Rows are written
//! in `(cell, replicate)` order.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::cv::{cross_validate_k, fit_sparse, CvData, FitSettings};
use super::io::{load_pair_csv, write_matrix_csv, write_vector_csv};
use crate::error::{Result, RifleError};
use crate::linalg::MatrixPair;
use crate::models::{
    cca_build, cca_split, count_mismatches, direction_error, fda_build, fda_build_with,
    fda_classify, sir_build, LabeledDataset, SlicedDataset, WithinScatter,
};
use crate::rng::{rng_substream, RngState};
use crate::sim::{
    cca_population, fda_binary_population, fda_multiclass_population, gen_planted_gep,
    CcaPopulation, FdaPopulation, ScenarioCCA, ScenarioFDA,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    FdaBinary,
    FdaMulticlass,
    Cca,
    /// Two-class discriminant data with the labels used as SIR slices.
    Sir,
    Planted,
    CustomPair,
}

impl ScenarioKind {
    fn uses_data(self) -> bool {
        matches!(
            self,
            ScenarioKind::FdaBinary | ScenarioKind::FdaMulticlass | ScenarioKind::Cca | ScenarioKind::Sir
        )
    }

    fn classes(self) -> usize {
        match self {
            ScenarioKind::FdaMulticlass => 4,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    /// Truncation levels; more than one triggers cross-validation.
    pub k: Vec<usize>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(flatten)]
    pub fit: FitSettings,
}

fn default_folds() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairFiles {
    pub a: PathBuf,
    pub b: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub d: Option<usize>,
    /// Training sample sizes, one cell each (total over classes).
    #[serde(default)]
    pub n: Option<Vec<usize>>,
    /// Training sample sizes as multiples of `s·ln d`, rounded up.
    #[serde(default)]
    pub n_scaled: Option<Vec<f64>>,
    /// Test sample size (total over classes) for discriminant scenarios.
    #[serde(default)]
    pub n_test: Option<usize>,
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default)]
    pub lambda1: Option<f64>,
    pub solver: SolverSpec,
    pub replications: usize,
    pub seed: u64,
    /// Also fit with the diagonal of the within-class scatter.
    #[serde(default)]
    pub ablation: bool,
    #[serde(default)]
    pub pair: Option<PairFiles>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> RifleError {
    RifleError::InvalidConfig(msg.into())
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| RifleError::Parse {
            path: "<spec>".into(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| RifleError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| RifleError::Parse {
            path: path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    fn require<T: Copy>(value: Option<T>, name: &str, kind: ScenarioKind) -> Result<T> {
        value.ok_or_else(|| invalid(format!("scenario {kind:?} needs `{name}`")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(invalid("replications must be at least 1"));
        }
        if self.solver.k.is_empty() {
            return Err(invalid("k grid is empty"));
        }
        if self.solver.k.contains(&0) {
            return Err(invalid("k grid contains 0"));
        }
        if self.solver.fit.schedule.is_some() && self.solver.k.len() > 1 {
            return Err(invalid("an explicit schedule needs a single k"));
        }
        let kind = self.scenario;
        if kind.uses_data() {
            let d = Self::require(self.d, "d", kind)?;
            match (&self.n, &self.n_scaled) {
                (Some(n), None) if !n.is_empty() => {}
                (None, Some(c)) if !c.is_empty() => {
                    Self::require(self.s, "s", kind)?;
                    if c.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                        return Err(invalid("n_scaled entries must be positive"));
                    }
                }
                _ => return Err(invalid("give exactly one nonempty `n` or `n_scaled` grid")),
            }
            if matches!(
                kind,
                ScenarioKind::FdaBinary | ScenarioKind::FdaMulticlass | ScenarioKind::Sir
            ) {
                let n_test = Self::require(self.n_test, "n_test", kind)?;
                if n_test < kind.classes() {
                    return Err(invalid("n_test is smaller than the number of classes"));
                }
            }
            if self.solver.k.iter().any(|&k| k > d) {
                return Err(invalid(format!("k grid exceeds d = {d}")));
            }
            for n in self.cells() {
                let n = n.expect("data scenarios have sample sizes");
                if n < 2 * kind.classes() {
                    return Err(invalid(format!("training size {n} is too small")));
                }
            }
        } else {
            if self.solver.k.len() != 1 {
                return Err(invalid(format!(
                    "scenario {kind:?} has no data to cross-validate on; give a single k"
                )));
            }
            match kind {
                ScenarioKind::Planted => {
                    let d = Self::require(self.d, "d", kind)?;
                    let s = Self::require(self.s, "s", kind)?;
                    if s == 0 || s > d || self.solver.k[0] > d {
                        return Err(invalid("planted scenario needs 1 <= s, k <= d"));
                    }
                }
                _ => {
                    if self.pair.is_none() {
                        return Err(invalid("custom-pair scenario needs `pair`"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Training size of every cell; a single `None` cell for scenarios
    /// without data.
    pub fn cells(&self) -> Vec<Option<usize>> {
        if !self.scenario.uses_data() {
            return vec![None];
        }
        if let Some(n) = &self.n {
            return n.iter().map(|&x| Some(x)).collect();
        }
        let d = self.d.unwrap_or(1) as f64;
        let s = self.s.unwrap_or(1) as f64;
        self.n_scaled
            .as_deref()
            .unwrap_or(&[])
            .iter()
            .map(|c| Some((c * s * d.ln()).ceil() as usize))
            .collect()
    }

    /// The same study at the dimensions and replication counts of the
    /// original simulations. Runs take hours.
    pub fn paper_scale(&self) -> Self {
        let mut spec = self.clone();
        match spec.scenario {
            ScenarioKind::FdaBinary | ScenarioKind::FdaMulticlass | ScenarioKind::Sir => {
                spec.d = Some(1000);
                spec.n = Some(vec![500]);
                spec.n_scaled = None;
                spec.n_test = Some(1000);
                spec.replications = 200;
            }
            ScenarioKind::Cca => {
                spec.d = Some(600);
                spec.s = Some(10);
                spec.replications = 100;
            }
            ScenarioKind::Planted | ScenarioKind::CustomPair => spec.replications = 200,
        }
        spec
    }
}

/// SHA-256 of the spec as JSON with sorted keys, ignoring `output`.
pub fn spec_hash(spec: &ExperimentSpec) -> String {
    let mut value = serde_json::to_value(spec).expect("spec serializes");
    if let Some(map) = value.as_object_mut() {
        map.remove("output");
    }
    let digest = Sha256::digest(value.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// One replication. Fields that do not apply to the scenario are empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub cell: usize,
    pub replicate: usize,
    pub n: Option<usize>,
    pub status: String,
    pub k: Option<usize>,
    pub direction_error: Option<f64>,
    pub direction_error_x: Option<f64>,
    pub direction_error_y: Option<f64>,
    pub test_errors: Option<usize>,
    pub n_test: Option<usize>,
    pub oracle_test_errors: Option<usize>,
    pub ablation_test_errors: Option<usize>,
    pub ablation_direction_error: Option<f64>,
    pub nonzeros: Option<usize>,
    pub iterations: Option<usize>,
    pub rho: Option<f64>,
    pub converged: Option<bool>,
    pub message: Option<String>,
}

impl ExperimentRow {
    fn empty(cell: usize, replicate: usize, n: Option<usize>) -> Self {
        ExperimentRow {
            cell,
            replicate,
            n,
            status: "ok".into(),
            k: None,
            direction_error: None,
            direction_error_x: None,
            direction_error_y: None,
            test_errors: None,
            n_test: None,
            oracle_test_errors: None,
            ablation_test_errors: None,
            ablation_direction_error: None,
            nonzeros: None,
            iterations: None,
            rho: None,
            converged: None,
            message: None,
        }
    }

    fn metrics(&self) -> Vec<(&'static str, Option<f64>)> {
        vec![
            ("k", self.k.map(|x| x as f64)),
            ("direction_error", self.direction_error),
            ("direction_error_x", self.direction_error_x),
            ("direction_error_y", self.direction_error_y),
            ("test_errors", self.test_errors.map(|x| x as f64)),
            ("oracle_test_errors", self.oracle_test_errors.map(|x| x as f64)),
            ("ablation_test_errors", self.ablation_test_errors.map(|x| x as f64)),
            ("ablation_direction_error", self.ablation_direction_error),
            ("nonzeros", self.nonzeros.map(|x| x as f64)),
            ("iterations", self.iterations.map(|x| x as f64)),
            ("rho", self.rho),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSummary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (denominator `count − 1`) over `√count`;
    /// zero for a single value.
    pub se: f64,
}

impl MetricSummary {
    pub fn of(values: &[f64]) -> Self {
        let m = values.len();
        let mean = values.iter().sum::<f64>() / m as f64;
        let se = if m > 1 {
            let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
            (var / m as f64).sqrt()
        } else {
            0.0
        };
        MetricSummary { count: m, mean, se }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub cell: usize,
    pub n: Option<usize>,
    pub succeeded: usize,
    pub failed: usize,
    pub metrics: BTreeMap<String, MetricSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub spec_hash: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub provenance: Provenance,
    pub spec: ExperimentSpec,
    pub cells: Vec<CellSummary>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<ExperimentRow>,
}

pub fn summarize(rows: &[ExperimentRow], cells: &[Option<usize>]) -> Vec<CellSummary> {
    cells
        .iter()
        .enumerate()
        .map(|(c, &n)| {
            let mine: Vec<&ExperimentRow> = rows.iter().filter(|r| r.cell == c).collect();
            let ok: Vec<&&ExperimentRow> = mine.iter().filter(|r| r.status == "ok").collect();
            let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
            for r in &ok {
                for (name, v) in r.metrics() {
                    if let Some(v) = v {
                        values.entry(name.to_string()).or_default().push(v);
                    }
                }
            }
            CellSummary {
                cell: c,
                n,
                succeeded: ok.len(),
                failed: mine.len() - ok.len(),
                metrics: values
                    .into_iter()
                    .map(|(k, v)| (k, MetricSummary::of(&v)))
                    .collect(),
            }
        })
        .collect()
}

enum Population {
    Fda(FdaPopulation),
    Cca(CcaPopulation),
    Planted,
    Custom(MatrixPair),
}

struct Context<'a> {
    spec: &'a ExperimentSpec,
    population: Population,
}

/// Squared distance to a unit target; a zero estimate is at distance 1.
fn half_error(estimate: &Array1<f64>, is_zero: bool, truth: &Array1<f64>) -> Result<f64> {
    if is_zero {
        Ok(1.0)
    } else {
        direction_error(&estimate.view(), &truth.view())
    }
}

fn select_k(spec: &ExperimentSpec, data: CvData<'_>, rng: &mut RngState) -> Result<usize> {
    Ok(cross_validate_k(data, &spec.solver.k, spec.solver.folds, &spec.solver.fit, rng)?.selected_k)
}

fn run_discriminant(
    ctx: &Context<'_>,
    pop: &FdaPopulation,
    n: usize,
    rng: &mut RngState,
    row: &mut ExperimentRow,
) -> Result<()> {
    let spec = ctx.spec;
    let classes = pop.classes();
    let train = pop.sample(rng, n / classes)?;
    let test = pop.sample(rng, spec.n_test.unwrap_or(0) / classes)?;
    let cap = train.n().saturating_sub(classes);
    let fit_settings = &spec.solver.fit;

    let (v, k) = if spec.scenario == ScenarioKind::Sir {
        let sliced = SlicedDataset::categorical(train.x().to_owned(), train.labels().to_vec())?;
        let k = select_k(spec, CvData::Sir(&sliced), rng)?;
        let pencil = sir_build(&sliced)?;
        let fit = fit_sparse(&pencil.pair, k, fit_settings, train.n() - 1, rng)?;
        record_fit(row, &fit);
        (fit.v, k)
    } else {
        let k = select_k(spec, CvData::Fda(&train), rng)?;
        let pencil = fda_build(&train)?;
        let fit = fit_sparse(&pencil.pair, k, fit_settings, cap, rng)?;
        record_fit(row, &fit);
        (fit.v, k)
    };
    row.k = Some(k);
    row.direction_error = Some(direction_error(&v.view(), &pop.v_star.view())?);
    let errors = |w: &Array1<f64>, train: &LabeledDataset| -> Result<usize> {
        let predicted = fda_classify(&w.view(), train, &test.x())?;
        Ok(count_mismatches(&predicted, test.labels()))
    };
    row.n_test = Some(test.n());
    row.test_errors = Some(errors(&v, &train)?);
    row.oracle_test_errors = Some(errors(&pop.v_star, &train)?);
    if spec.ablation {
        let pencil = fda_build_with(&train, WithinScatter::Diagonal)?;
        let fit = fit_sparse(&pencil.pair, k, fit_settings, cap, rng)?;
        row.ablation_test_errors = Some(errors(&fit.v, &train)?);
        row.ablation_direction_error = Some(direction_error(&fit.v.view(), &pop.v_star.view())?);
    }
    Ok(())
}

fn record_fit(row: &mut ExperimentRow, fit: &crate::solver::RifleResult) {
    row.nonzeros = Some(fit.support().len());
    row.iterations = Some(fit.iterations);
    row.rho = Some(fit.rho);
    row.converged = Some(fit.converged);
}

fn run_replicate(
    ctx: &Context<'_>,
    n: Option<usize>,
    rng: &mut RngState,
    row: &mut ExperimentRow,
) -> Result<()> {
    let spec = ctx.spec;
    match &ctx.population {
        Population::Fda(pop) => run_discriminant(ctx, pop, n.unwrap_or(0), rng, row),
        Population::Cca(pop) => {
            let n = n.unwrap_or(0);
            let data = pop.sample(rng, n)?;
            let k = select_k(spec, CvData::Cca(&data), rng)?;
            let pencil = cca_build(&data)?;
            let fit = fit_sparse(&pencil.pair, k, &spec.solver.fit, n - 1, rng)?;
            record_fit(row, &fit);
            row.k = Some(k);
            let (dx, dy) = data.dims();
            let halves = cca_split(&fit.v.view(), dx, dy)?;
            let ex = half_error(&halves.x, halves.x_zero, &pop.vx)?;
            let ey = half_error(&halves.y, halves.y_zero, &pop.vy)?;
            row.direction_error_x = Some(ex);
            row.direction_error_y = Some(ey);
            row.direction_error = Some(0.5 * (ex + ey));
            Ok(())
        }
        Population::Planted => {
            let d = spec.d.unwrap_or(0);
            let s = spec.s.unwrap_or(0);
            let inst = gen_planted_gep(d, s, spec.lambda1.unwrap_or(1.0), rng)?;
            let k = spec.solver.k[0];
            let fit = fit_sparse(&inst.pair, k, &spec.solver.fit, d, rng)?;
            record_fit(row, &fit);
            row.k = Some(k);
            row.direction_error = Some(direction_error(&fit.v.view(), &inst.w.view())?);
            Ok(())
        }
        Population::Custom(pair) => {
            let k = spec.solver.k[0];
            let fit = fit_sparse(pair, k, &spec.solver.fit, pair.dim(), rng)?;
            record_fit(row, &fit);
            row.k = Some(k);
            Ok(())
        }
    }
}

fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(text) = std::env::var("RIFLE_THREADS") {
        let threads: usize = text
            .trim()
            .parse()
            .map_err(|_| invalid(format!("RIFLE_THREADS={text:?} is not a count")))?;
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|e| RifleError::Io(format!("worker pool: {e}")))
}

/// Runs every replication of every cell and, when `spec.output` is set,
/// writes `rows.csv` and `summary.json` there.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let mut warnings = Vec::new();
    let population = match spec.scenario {
        ScenarioKind::FdaBinary | ScenarioKind::Sir => {
            Population::Fda(fda_binary_population(spec.d.unwrap_or(0))?)
        }
        ScenarioKind::FdaMulticlass => {
            Population::Fda(fda_multiclass_population(spec.d.unwrap_or(0))?)
        }
        ScenarioKind::Cca => Population::Cca(cca_population(spec.d.unwrap_or(0))?),
        ScenarioKind::Planted => Population::Planted,
        ScenarioKind::CustomPair => {
            let files = spec.pair.as_ref().expect("validated");
            let loaded = load_pair_csv(&files.a, &files.b)?;
            warnings.extend(loaded.warnings);
            Population::Custom(loaded.pair)
        }
    };
    let ctx = Context { spec, population };
    let cells = spec.cells();
    let reps = spec.replications;
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..reps).map(move |r| (c, r)))
        .collect();
    let pool = worker_pool()?;
    let rows: Vec<ExperimentRow> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, r)| {
                let mut rng = rng_substream(spec.seed, (c * reps + r) as u64);
                let mut row = ExperimentRow::empty(c, r, cells[c]);
                if let Err(e) = run_replicate(&ctx, cells[c], &mut rng, &mut row) {
                    let mut failed = ExperimentRow::empty(c, r, cells[c]);
                    failed.status = "failed".into();
                    failed.message = Some(e.to_string());
                    return failed;
                }
                row
            })
            .collect()
    });
    let report = ExperimentReport {
        provenance: Provenance {
            seed: spec.seed,
            spec_hash: spec_hash(spec),
            version: VERSION.into(),
        },
        spec: spec.clone(),
        cells: summarize(&rows, &cells),
        warnings,
        rows,
    };
    if let Some(dir) = &spec.output {
        write_report(&report, dir)?;
    }
    Ok(report)
}

/// Writes `rows.csv` and `summary.json` into `dir`, creating it if needed.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut writer = csv::Writer::from_path(dir.join("rows.csv"))
        .map_err(|e| RifleError::Io(e.to_string()))?;
    for row in &report.rows {
        writer
            .serialize(row)
            .map_err(|e| RifleError::Io(e.to_string()))?;
    }
    writer.flush()?;
    let summary = serde_json::to_string_pretty(report).expect("report serializes");
    fs::write(dir.join("summary.json"), summary + "\n")?;
    Ok(())
}

/// Draws one data set of a scenario and writes every matrix as CSV plus a
/// `manifest.json` describing the files and population quantities.
pub fn simulate_scenario(
    kind: ScenarioKind,
    d: usize,
    n: usize,
    s: Option<usize>,
    lambda1: Option<f64>,
    seed: u64,
    dir: &Path,
) -> Result<serde_json::Value> {
    fs::create_dir_all(dir)?;
    let mut rng = rng_substream(seed, 0);
    let mut files = BTreeMap::new();
    let mut put_matrix = |name: &str, m: &ndarray::Array2<f64>| -> Result<()> {
        write_matrix_csv(&dir.join(name), &m.view())?;
        files.insert(name.to_string(), name.to_string());
        Ok(())
    };
    let population = match kind {
        ScenarioKind::FdaBinary | ScenarioKind::FdaMulticlass | ScenarioKind::Sir => {
            let classes = kind.classes();
            let ScenarioFDA { data, population } = if kind == ScenarioKind::FdaMulticlass {
                crate::sim::gen_fda_multiclass(d, n / classes, &mut rng)?
            } else {
                crate::sim::gen_fda_binary(d, n / classes, &mut rng)?
            };
            put_matrix("x.csv", &data.x().to_owned())?;
            let labels = Array1::from_iter(data.labels().iter().map(|&l| l as f64));
            write_vector_csv(&dir.join("labels.csv"), &labels.view())?;
            let pencil = if kind == ScenarioKind::Sir {
                sir_build(&SlicedDataset::categorical(
                    data.x().to_owned(),
                    data.labels().to_vec(),
                )?)?
            } else {
                fda_build(&data)?
            };
            put_matrix("a.csv", pencil.pair.a().as_array())?;
            put_matrix("b.csv", pencil.pair.b().as_array())?;
            write_vector_csv(&dir.join("v_star.csv"), &population.v_star.view())?;
            serde_json::json!({
                "lambda1": population.lambda1,
                "support": population.support,
                "classes": classes,
                "v_star": "v_star.csv",
                "labels": "labels.csv",
            })
        }
        ScenarioKind::Cca => {
            let ScenarioCCA { data, population } = crate::sim::gen_cca(d, n, &mut rng)?;
            put_matrix("x.csv", &data.x().to_owned())?;
            put_matrix("y.csv", &data.y().to_owned())?;
            let pencil = cca_build(&data)?;
            put_matrix("a.csv", pencil.pair.a().as_array())?;
            put_matrix("b.csv", pencil.pair.b().as_array())?;
            put_matrix("sigma.csv", population.sigma.as_array())?;
            write_vector_csv(&dir.join("v_star.csv"), &population.v_star().view())?;
            serde_json::json!({
                "lambda1": population.lambda1,
                "v_star": "v_star.csv",
            })
        }
        ScenarioKind::Planted => {
            let s = s.ok_or_else(|| invalid("planted scenario needs s"))?;
            let inst = gen_planted_gep(d, s, lambda1.unwrap_or(1.0), &mut rng)?;
            put_matrix("a.csv", inst.pair.a().as_array())?;
            put_matrix("b.csv", inst.pair.b().as_array())?;
            write_vector_csv(&dir.join("v_star.csv"), &inst.w.view())?;
            serde_json::json!({
                "lambda1": inst.lambda1,
                "secondary": inst.secondary,
                "support": crate::linalg::IndexSet::support_of(&inst.w.view()),
                "v_star": "v_star.csv",
            })
        }
        ScenarioKind::CustomPair => {
            return Err(invalid("custom-pair cannot be simulated"));
        }
    };
    let manifest = serde_json::json!({
        "scenario": kind,
        "d": d,
        "n": n,
        "s": s,
        "seed": seed,
        "version": VERSION,
        "matrices": files,
        "population": population,
    });
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n",
    )?;
    Ok(manifest)
}
