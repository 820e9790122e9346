//! Fitting with warm starts and restarts, and K-fold selection of the
//! truncation level.

use ndarray::{s, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RifleError};
use crate::linalg::{MatrixPair, SymMatrix};
use crate::models::{
    cca_build, count_mismatches, cross_covariance, fda_build, fda_classify, sample_covariance,
    sir_build, LabeledDataset, PairedDataset, Response, SlicedDataset,
};
use crate::rng::RngState;
use crate::solver::{
    rayleigh_quotient, rifle_warm_start, RifleConfig, RifleResult, StepSize, WarmStartSchedule,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};

/// How a single sparse fit is run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSettings {
    /// Fixed step size; the default rule when absent.
    #[serde(default)]
    pub eta: Option<f64>,
    /// Explicit truncation levels ending at the target `k`.
    #[serde(default)]
    pub schedule: Option<Vec<usize>>,
    /// Use the default `(8k, 4k, 2k, k)` schedule when no explicit one is set.
    #[serde(default = "yes")]
    pub warm_start: bool,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Random initial vectors tried; the fit with the largest Rayleigh
    /// quotient is kept.
    #[serde(default = "one")]
    pub restarts: usize,
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl Default for FitSettings {
    fn default() -> Self {
        FitSettings {
            eta: None,
            schedule: None,
            warm_start: true,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            restarts: 1,
        }
    }
}

impl FitSettings {
    /// Schedule for target `k`. Default stages are capped at `max_stage`
    /// (typically the sample rank) so restricted covariances stay nonsingular.
    pub fn schedule_for(&self, k: usize, d: usize, max_stage: usize) -> Result<WarmStartSchedule> {
        match &self.schedule {
            Some(seq) => WarmStartSchedule::new(seq.clone()),
            None if self.warm_start => Ok(WarmStartSchedule::default_for(
                k,
                max_stage.min(d).max(k),
            )),
            None => WarmStartSchedule::single(k),
        }
    }
}

/// Runs `settings.restarts` warm-started fits from random initial vectors
/// seeded by `rng` and keeps the one with the largest Rayleigh quotient.
pub fn fit_sparse(
    pair: &MatrixPair,
    k: usize,
    settings: &FitSettings,
    max_stage: usize,
    rng: &mut RngState,
) -> Result<RifleResult> {
    if settings.restarts == 0 {
        return Err(RifleError::InvalidConfig("restarts must be positive".into()));
    }
    let schedule = settings.schedule_for(k, pair.dim(), max_stage)?;
    let mut best: Option<RifleResult> = None;
    let mut last_error = None;
    for _ in 0..settings.restarts {
        let mut config = RifleConfig::new(k)
            .with_seed(rng.next_u64())
            .with_max_iter(settings.max_iter)
            .with_tol(settings.tol);
        if let Some(eta) = settings.eta {
            config.eta = StepSize::Fixed(eta);
        }
        match rifle_warm_start(pair, &config, &schedule) {
            Ok(out) => {
                if best.as_ref().map_or(true, |b| out.result.rho > b.rho) {
                    best = Some(out.result);
                }
            }
            Err(e) if e.is_validation() => return Err(e),
            Err(e) => last_error = Some(e),
        }
    }
    best.ok_or_else(|| last_error.expect("at least one restart ran"))
}

/// Data whose pencil is refit on every training fold.
#[derive(Debug, Clone, Copy)]
pub enum CvData<'a> {
    /// Scored by held-out misclassification rate.
    Fda(&'a LabeledDataset),
    /// Scored by the held-out canonical correlation (maximized).
    Cca(&'a PairedDataset),
    /// Categorical responses are scored like discriminant analysis;
    /// continuous ones by the held-out Rayleigh quotient (maximized).
    Sir(&'a SlicedDataset),
}

impl CvData<'_> {
    fn n(&self) -> usize {
        match self {
            CvData::Fda(d) => d.n(),
            CvData::Cca(d) => d.n(),
            CvData::Sir(d) => d.n(),
        }
    }

    fn dim(&self) -> usize {
        match self {
            CvData::Fda(d) => d.dim(),
            CvData::Cca(d) => d.dims().0 + d.dims().1,
            CvData::Sir(d) => d.x().ncols(),
        }
    }

    fn strata(&self) -> Option<Vec<usize>> {
        match self {
            CvData::Fda(d) => Some(d.labels().to_vec()),
            CvData::Sir(d) => match d.response() {
                Response::Categorical(labels) => Some(labels.clone()),
                Response::Continuous(_) => None,
            },
            CvData::Cca(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CVResult {
    pub k_grid: Vec<usize>,
    /// `fold_scores[i][f]` is the loss of `k_grid[i]` on fold `f`; lower is
    /// better. Empty when the grid has a single entry.
    pub fold_scores: Vec<Vec<f64>>,
    pub mean_scores: Vec<f64>,
    pub selected_k: usize,
}

/// Fold index of every sample: within each stratum samples are shuffled and
/// dealt round-robin, continuing the deal across strata.
pub fn stratified_folds(labels: &[usize], folds: usize, rng: &mut RngState) -> Vec<usize> {
    let strata = labels.iter().max().map_or(0, |m| m + 1);
    let mut out = vec![0; labels.len()];
    let mut next = 0;
    for class in 0..strata {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        rng.shuffle(&mut members);
        for i in members {
            out[i] = next % folds;
            next += 1;
        }
    }
    out
}

pub fn random_folds(n: usize, folds: usize, rng: &mut RngState) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let mut out = vec![0; n];
    for (pos, i) in order.into_iter().enumerate() {
        out[i] = pos % folds;
    }
    out
}

fn held_out_correlation(v: &ArrayView1<f64>, held: &PairedDataset) -> Result<f64> {
    let (dx, _) = held.dims();
    let vx = v.slice(s![..dx]);
    let vy = v.slice(s![dx..]);
    let sxy = cross_covariance(&held.x(), &held.y())?;
    let sx = sample_covariance(&held.x())?;
    let sy = sample_covariance(&held.y())?;
    let num = vx.dot(&sxy.dot(&vy));
    let den = (quad(&sx, &vx) * quad(&sy, &vy)).sqrt();
    Ok(if den > 0.0 { num / den } else { 0.0 })
}

fn quad(m: &SymMatrix, v: &ArrayView1<f64>) -> f64 {
    v.dot(&m.as_array().dot(v))
}

fn fold_loss(
    data: CvData<'_>,
    train_rows: &[usize],
    held_rows: &[usize],
    k: usize,
    settings: &FitSettings,
    rng: &mut RngState,
) -> Result<f64> {
    match data {
        CvData::Fda(d) => {
            let train = d.subset(train_rows)?;
            let held = d.subset_rows(held_rows);
            let pencil = fda_build(&train)?;
            let cap = train.n().saturating_sub(train.classes());
            let fit = fit_sparse(&pencil.pair, k, settings, cap, rng)?;
            let predicted = fda_classify(&fit.v.view(), &train, &held.0.view())?;
            Ok(count_mismatches(&predicted, &held.1) as f64 / held_rows.len() as f64)
        }
        CvData::Cca(d) => {
            let train = d.subset(train_rows)?;
            let held = d.subset(held_rows)?;
            let pencil = cca_build(&train)?;
            let cap = train.n().saturating_sub(1);
            let fit = fit_sparse(&pencil.pair, k, settings, cap, rng)?;
            Ok(-held_out_correlation(&fit.v.view(), &held)?)
        }
        CvData::Sir(d) => {
            let train = d.subset(train_rows)?;
            let pencil = sir_build(&train)?;
            let cap = train.n().saturating_sub(1);
            let fit = fit_sparse(&pencil.pair, k, settings, cap, rng)?;
            match d.response() {
                Response::Categorical(labels) => {
                    let train_labels: Vec<usize> = train_rows.iter().map(|&i| labels[i]).collect();
                    let labeled = LabeledDataset::with_classes(
                        train.x().to_owned(),
                        train_labels,
                        d.slices(),
                    )?;
                    let held_x = d.x().select(ndarray::Axis(0), held_rows);
                    let truth: Vec<usize> = held_rows.iter().map(|&i| labels[i]).collect();
                    let predicted = fda_classify(&fit.v.view(), &labeled, &held_x.view())?;
                    Ok(count_mismatches(&predicted, &truth) as f64 / held_rows.len() as f64)
                }
                Response::Continuous(_) => {
                    let held = sir_build(&d.subset(held_rows)?)?;
                    Ok(-rayleigh_quotient(&held.pair, &fit.v.view())?)
                }
            }
        }
    }
}

/// Picks the truncation level with the smallest mean held-out loss; ties go
/// to the smallest `k`. A fit that fails numerically scores `+∞` on its fold.
pub fn cross_validate_k(
    data: CvData<'_>,
    k_grid: &[usize],
    folds: usize,
    settings: &FitSettings,
    rng: &mut RngState,
) -> Result<CVResult> {
    let d = data.dim();
    if k_grid.is_empty() {
        return Err(RifleError::InvalidConfig("empty k grid".into()));
    }
    if let Some(&k) = k_grid.iter().find(|&&k| k == 0 || k > d) {
        return Err(RifleError::InvalidConfig(format!(
            "k = {k} must lie in 1..={d}"
        )));
    }
    if k_grid.len() == 1 {
        return Ok(CVResult {
            k_grid: k_grid.to_vec(),
            fold_scores: Vec::new(),
            mean_scores: Vec::new(),
            selected_k: k_grid[0],
        });
    }
    let n = data.n();
    if folds < 2 || n < folds {
        return Err(RifleError::TooFewSamples { n, folds });
    }
    let assignment = match data.strata() {
        Some(labels) => stratified_folds(&labels, folds, rng),
        None => random_folds(n, folds, rng),
    };
    let mut fold_scores = vec![vec![0.0; folds]; k_grid.len()];
    for f in 0..folds {
        let train: Vec<usize> = (0..n).filter(|&i| assignment[i] != f).collect();
        let held: Vec<usize> = (0..n).filter(|&i| assignment[i] == f).collect();
        for (i, &k) in k_grid.iter().enumerate() {
            fold_scores[i][f] = match fold_loss(data, &train, &held, k, settings, rng) {
                Ok(loss) => loss,
                Err(e) if e.is_validation() => return Err(e),
                Err(_) => f64::INFINITY,
            };
        }
    }
    let mean_scores: Vec<f64> = fold_scores
        .iter()
        .map(|s| s.iter().sum::<f64>() / folds as f64)
        .collect();
    let mut best = 0;
    for i in 1..k_grid.len() {
        let better = mean_scores[i] < mean_scores[best]
            || (mean_scores[i] == mean_scores[best] && k_grid[i] < k_grid[best]);
        if better {
            best = i;
        }
    }
    Ok(CVResult {
        k_grid: k_grid.to_vec(),
        fold_scores,
        mean_scores,
        selected_k: k_grid[best],
    })
}
