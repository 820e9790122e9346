//! Truncated Rayleigh flow.
//!
//! Each iteration takes a gradient ascent step on the generalized Rayleigh
//! quotient `vᵀÂv / vᵀB̂v`, keeps the `k` entries of largest magnitude and
//! renormalizes:
//!
//! ```text
//! ρ   = vᵀÂv / vᵀB̂v
//! C   = I + (η/ρ)(Â − ρB̂)
//! v'  = C·v / ‖C·v‖₂
//! v⁺  = top-k(v') / ‖top-k(v')‖₂
//! ```
//!
//! Products with `Â` and `B̂` only touch the columns in the support of the
//! current iterate, so an iteration costs `O(d·k)` once the support is sparse.

use ndarray::{Array1, ArrayView1};
use serde::Serialize;

use crate::error::{Result, RifleError};
use crate::linalg::{check_dim, normalized, IndexSet, MatrixPair, SymMatrix};
use crate::rng::rng_substream;

pub const DEFAULT_MAX_ITER: usize = 2000;
pub const DEFAULT_TOL: f64 = 1e-10;

const DENOMINATOR_FLOOR: f64 = 1e-12;
const UPDATE_FLOOR: f64 = 1e-14;
const POWER_ITERATIONS: usize = 200;
const POWER_INFLATION: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    /// `default_step_size(B̂)`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// Normalized before use.
    Vector(Array1<f64>),
    /// Standard-normal entries from substream 0 of `seed`, normalized.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RifleConfig {
    pub k: usize,
    pub eta: StepSize,
    pub max_iter: usize,
    pub tol: f64,
    pub init: Init,
    pub record_trajectory: bool,
}

impl RifleConfig {
    pub fn new(k: usize) -> Self {
        RifleConfig {
            k,
            eta: StepSize::Auto,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            init: Init::Random { seed: 0 },
            record_trajectory: false,
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = StepSize::Fixed(eta);
        self
    }

    pub fn with_init(mut self, v: Array1<f64>) -> Self {
        self.init = Init::Vector(v);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.init = Init::Random { seed };
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_trajectory(mut self) -> Self {
        self.record_trajectory = true;
        self
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.k == 0 || self.k > d {
            return Err(RifleError::InvalidConfig(format!(
                "k = {} must lie in 1..={d}",
                self.k
            )));
        }
        if let StepSize::Fixed(eta) = self.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(RifleError::InvalidConfig(format!(
                    "step size {eta} must be positive"
                )));
            }
        }
        if !(self.tol >= 0.0) {
            return Err(RifleError::InvalidConfig(format!(
                "tolerance {} must be nonnegative",
                self.tol
            )));
        }
        if let Init::Vector(v) = &self.init {
            check_dim(d, v.len())?;
        }
        Ok(())
    }
}

/// One recorded iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    /// Rayleigh quotient of the previous iterate.
    pub rho: f64,
    pub support: IndexSet,
    /// `1 − |v_tᵀ v_{t−1}|`.
    pub change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RifleResult {
    pub v: Array1<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
    pub eta: f64,
    pub trajectory: Option<Vec<IterationRecord>>,
}

impl RifleResult {
    pub fn support(&self) -> IndexSet {
        IndexSet::support_of(&self.v.view())
    }
}

/// Strictly decreasing truncation levels; the last one is the target `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarmStartSchedule {
    k_sequence: Vec<usize>,
}

impl WarmStartSchedule {
    pub fn new(k_sequence: Vec<usize>) -> Result<Self> {
        if k_sequence.is_empty() {
            return Err(RifleError::InvalidSchedule("empty schedule".into()));
        }
        if k_sequence.contains(&0) {
            return Err(RifleError::InvalidSchedule("cardinality 0".into()));
        }
        if k_sequence.windows(2).any(|w| w[0] <= w[1]) {
            return Err(RifleError::InvalidSchedule(format!(
                "{k_sequence:?} is not strictly decreasing"
            )));
        }
        Ok(WarmStartSchedule { k_sequence })
    }

    /// `(8k, 4k, 2k, k)` capped at `d`, duplicates dropped.
    pub fn default_for(k: usize, d: usize) -> Self {
        let mut seq: Vec<usize> = [8 * k, 4 * k, 2 * k, k].iter().map(|&x| x.min(d)).collect();
        seq.dedup();
        WarmStartSchedule { k_sequence: seq }
    }

    pub fn single(k: usize) -> Result<Self> {
        Self::new(vec![k])
    }

    pub fn k_sequence(&self) -> &[usize] {
        &self.k_sequence
    }

    pub fn target(&self) -> usize {
        *self.k_sequence.last().expect("schedule is never empty")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarmStartResult {
    /// Output of the last stage.
    pub result: RifleResult,
    /// One entry per schedule stage, in order.
    pub stages: Vec<RifleResult>,
}

/// `vᵀÂv / vᵀB̂v`.
pub fn rayleigh_quotient(pair: &MatrixPair, v: &ArrayView1<f64>) -> Result<f64> {
    check_dim(pair.dim(), v.len())?;
    let (av, bv) = pencil_products(pair, v);
    quotient_from_products(v, &av, &bv)
}

fn pencil_products(pair: &MatrixPair, v: &ArrayView1<f64>) -> (Array1<f64>, Array1<f64>) {
    (pair.a().sparse_matvec(v), pair.b().sparse_matvec(v))
}

fn quotient_from_products(v: &ArrayView1<f64>, av: &Array1<f64>, bv: &Array1<f64>) -> Result<f64> {
    let den = v.dot(bv);
    let norm_sq = v.dot(v);
    if !(den > DENOMINATOR_FLOOR * norm_sq) {
        return Err(RifleError::DegenerateDenominator { value: den });
    }
    Ok(v.dot(av) / den)
}

/// Zeroes all but the `k` largest-magnitude entries.
///
/// Ties go to the smaller index. When `v` has fewer than `k` nonzeros, all of
/// them are kept. The result is not renormalized.
pub fn truncate_top_k(v: &ArrayView1<f64>, k: usize) -> (Array1<f64>, IndexSet) {
    let mut candidates: Vec<usize> = (0..v.len()).filter(|&i| v[i] != 0.0).collect();
    let by_magnitude = |&i: &usize, &j: &usize| v[j].abs().total_cmp(&v[i].abs()).then(i.cmp(&j));
    if candidates.len() > k {
        if k == 0 {
            candidates.clear();
        } else {
            candidates.select_nth_unstable_by(k - 1, by_magnitude);
            candidates.truncate(k);
        }
    }
    let support = IndexSet::new(candidates);
    let mut out = Array1::zeros(v.len());
    for i in support.iter() {
        out[i] = v[i];
    }
    (out, support)
}

/// Everything one iteration produces; exposed for step-level checks.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub v: Array1<f64>,
    /// Rayleigh quotient of the input iterate.
    pub rho: f64,
    pub support: IndexSet,
    /// `C·v / ‖C·v‖₂` before truncation.
    pub pre_truncation: Array1<f64>,
}

struct Stepper<'a> {
    pair: &'a MatrixPair,
    a_scale: f64,
    eta: f64,
    k: usize,
}

impl<'a> Stepper<'a> {
    fn new(pair: &'a MatrixPair, eta: f64, k: usize) -> Self {
        Stepper {
            pair,
            a_scale: pair.a().frobenius_norm(),
            eta,
            k,
        }
    }

    fn step(&self, v_prev: &ArrayView1<f64>) -> Result<StepOutcome> {
        let (av, bv) = pencil_products(self.pair, v_prev);
        let rho = quotient_from_products(v_prev, &av, &bv)?;
        if rho.abs() <= DENOMINATOR_FLOOR * self.a_scale {
            return Err(RifleError::DegenerateDenominator { value: rho });
        }
        // C·v = v + (η/ρ)(Âv − ρB̂v)
        let gain = self.eta / rho;
        let mut cv = v_prev.to_owned();
        cv.scaled_add(gain, &av);
        cv.scaled_add(-gain * rho, &bv);
        let cv_norm = cv.dot(&cv).sqrt();
        if !cv_norm.is_finite() {
            return Err(RifleError::NonFiniteIterate { iteration: 0 });
        }
        if cv_norm <= UPDATE_FLOOR {
            return Err(RifleError::ZeroUpdate);
        }
        let pre = cv / cv_norm;
        let (truncated, support) = truncate_top_k(&pre.view(), self.k);
        let t_norm = truncated.dot(&truncated).sqrt();
        if t_norm == 0.0 {
            return Err(RifleError::ZeroUpdate);
        }
        Ok(StepOutcome {
            v: truncated / t_norm,
            rho,
            support,
            pre_truncation: pre,
        })
    }
}

/// One Rifle iteration from a unit-norm `v_prev`; returns `(v_t, ρ_{t−1})`.
pub fn rifle_step(
    pair: &MatrixPair,
    v_prev: &ArrayView1<f64>,
    eta: f64,
    k: usize,
) -> Result<(Array1<f64>, f64)> {
    let out = rifle_step_detailed(pair, v_prev, eta, k)?;
    Ok((out.v, out.rho))
}

pub fn rifle_step_detailed(
    pair: &MatrixPair,
    v_prev: &ArrayView1<f64>,
    eta: f64,
    k: usize,
) -> Result<StepOutcome> {
    check_dim(pair.dim(), v_prev.len())?;
    if k == 0 || k > pair.dim() {
        return Err(RifleError::InvalidConfig(format!("k = {k} out of range")));
    }
    if !(eta > 0.0) {
        return Err(RifleError::InvalidConfig(format!("step size {eta}")));
    }
    Stepper::new(pair, eta, k).step(v_prev)
}

/// Step size `1/(2·λ̂)` where `λ̂` is a 200-step power-method estimate of
/// `λ_max(b)` inflated by 5%.
pub fn default_step_size(b: &SymMatrix) -> Result<f64> {
    let fro = b.frobenius_norm();
    if fro == 0.0 {
        return Err(RifleError::ZeroMatrix);
    }
    let d = b.dim();
    let diag = b.diag();
    let heaviest = (0..d)
        .max_by(|&i, &j| diag[i].abs().total_cmp(&diag[j].abs()).then(j.cmp(&i)))
        .unwrap_or(0);
    let mut x = Array1::from_elem(d, 1.0f64);
    x[heaviest] += 1.0;
    x /= x.dot(&x).sqrt();

    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let y = b.matvec(&x.view());
        let norm = y.dot(&y).sqrt();
        if norm == 0.0 {
            break;
        }
        estimate = norm;
        x = y / norm;
    }
    // the start vector was annihilated: fall back to the Frobenius upper bound
    if estimate == 0.0 {
        estimate = fro;
    }
    Ok(1.0 / (2.0 * POWER_INFLATION * estimate))
}

fn initial_vector(init: &Init, d: usize) -> Result<Array1<f64>> {
    match init {
        Init::Vector(v) => {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(RifleError::NonFinite("initial vector"));
            }
            normalized(&v.view())
        }
        Init::Random { seed } => {
            let mut rng = rng_substream(*seed, 0);
            let v = Array1::from(rng.normals(d));
            normalized(&v.view())
        }
    }
}

/// Runs Rifle until `1 − |v_tᵀ v_{t−1}| ≤ tol` or `max_iter` iterations.
pub fn rifle(pair: &MatrixPair, config: &RifleConfig) -> Result<RifleResult> {
    let d = pair.dim();
    config.validate(d)?;
    let eta = match config.eta {
        StepSize::Fixed(eta) => eta,
        StepSize::Auto => default_step_size(pair.b())?,
    };
    let mut v = initial_vector(&config.init, d)?;
    let stepper = Stepper::new(pair, eta, config.k);
    let mut trajectory = config.record_trajectory.then(Vec::new);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iter {
        let out = stepper.step(&v.view()).map_err(|e| match e {
            RifleError::NonFiniteIterate { .. } => RifleError::NonFiniteIterate {
                iteration: iterations + 1,
            },
            other => other,
        })?;
        iterations += 1;
        if out.v.iter().any(|x| !x.is_finite()) {
            return Err(RifleError::NonFiniteIterate {
                iteration: iterations,
            });
        }
        let change = (1.0 - out.v.dot(&v).abs()).max(0.0);
        if let Some(t) = trajectory.as_mut() {
            t.push(IterationRecord {
                rho: out.rho,
                support: out.support.clone(),
                change,
            });
        }
        v = out.v;
        if change <= config.tol {
            converged = true;
            break;
        }
    }

    let rho = rayleigh_quotient(pair, &v.view())?;
    Ok(RifleResult {
        v,
        rho,
        iterations,
        converged,
        eta,
        trajectory,
    })
}

/// Runs Rifle once per schedule entry, seeding each stage with the previous
/// stage's solution.
pub fn rifle_warm_start(
    pair: &MatrixPair,
    target: &RifleConfig,
    schedule: &WarmStartSchedule,
) -> Result<WarmStartResult> {
    if schedule.target() != target.k {
        return Err(RifleError::InvalidSchedule(format!(
            "schedule ends at {} but target k is {}",
            schedule.target(),
            target.k
        )));
    }
    if let Some(&first) = schedule.k_sequence().first() {
        if first > pair.dim() {
            return Err(RifleError::InvalidSchedule(format!(
                "cardinality {first} exceeds dimension {}",
                pair.dim()
            )));
        }
    }
    let mut stages = Vec::with_capacity(schedule.k_sequence().len());
    let mut init = target.init.clone();
    for &k in schedule.k_sequence() {
        let config = RifleConfig {
            k,
            init: init.clone(),
            ..target.clone()
        };
        let stage = rifle(pair, &config)?;
        init = Init::Vector(stage.v.clone());
        stages.push(stage);
    }
    let result = stages.last().cloned().expect("schedule is never empty");
    Ok(WarmStartResult { result, stages })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eig;
    use ndarray::array;

    fn diag_pair(a: &[f64]) -> MatrixPair {
        MatrixPair::new(
            SymMatrix::from_diag(a).unwrap(),
            SymMatrix::identity(a.len()),
        )
        .unwrap()
    }

    #[test]
    fn rayleigh_quotient_examples() {
        let pair = diag_pair(&[2.0, 1.0]);
        assert_eq!(rayleigh_quotient(&pair, &array![1.0, 0.0].view()).unwrap(), 2.0);

        let v = array![0.3, -0.7];
        let q1 = rayleigh_quotient(&pair, &v.view()).unwrap();
        let q3 = rayleigh_quotient(&pair, &(&v * 3.0).view()).unwrap();
        assert!((q1 - q3).abs() <= 1e-15 * q1.abs());

        let swap = MatrixPair::new(
            SymMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap(),
            SymMatrix::identity(2),
        )
        .unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let q = rayleigh_quotient(&swap, &array![h, h].view()).unwrap();
        assert!((q - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rayleigh_quotient_rejects_null_direction() {
        let pair = MatrixPair::new(
            SymMatrix::identity(2),
            SymMatrix::from_diag(&[1.0, 0.0]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            rayleigh_quotient(&pair, &array![0.0, 1.0].view()),
            Err(RifleError::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn truncation_examples() {
        let (t, f) = truncate_top_k(&array![0.8, -0.5, 0.3, 0.1].view(), 2);
        assert_eq!(t, array![0.8, -0.5, 0.0, 0.0]);
        assert_eq!(f.as_slice(), &[0, 1]);

        let v = array![0.2, -0.9, 0.4];
        let (t, f) = truncate_top_k(&v.view(), 3);
        assert_eq!(t, v);
        assert_eq!(f.len(), 3);

        let (t, f) = truncate_top_k(&array![0.5, -0.5, 0.1].view(), 1);
        assert_eq!(t, array![0.5, 0.0, 0.0]);
        assert_eq!(f.as_slice(), &[0]);
    }

    #[test]
    fn truncation_keeps_fewer_nonzeros_than_k() {
        let (t, f) = truncate_top_k(&array![0.0, 1.0, 0.0, -2.0].view(), 3);
        assert_eq!(t, array![0.0, 1.0, 0.0, -2.0]);
        assert_eq!(f.as_slice(), &[1, 3]);
    }

    #[test]
    fn exact_eigenvector_is_stationary() {
        let pair = diag_pair(&[2.0, 1.0]);
        let (v, rho) = rifle_step(&pair, &array![1.0, 0.0].view(), 0.1, 1).unwrap();
        assert_eq!(rho, 2.0);
        assert_eq!(v, array![1.0, 0.0]);
    }

    #[test]
    fn step_moves_toward_larger_eigenvalue() {
        // ρ = 1.5; C = I + (0.4/1.5)·diag(−0.5, 0.5) = diag(13/15, 17/15)
        let pair = diag_pair(&[1.0, 2.0]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (v, rho) = rifle_step(&pair, &array![h, h].view(), 0.4, 2).unwrap();
        assert!((rho - 1.5).abs() < 1e-15);
        assert!(v[1] > v[0]);
        let expected = array![13.0, 17.0] / (13.0f64.hypot(17.0));
        assert!((&v - &expected).iter().all(|e| e.abs() < 1e-14));
    }

    #[test]
    fn zero_quotient_is_rejected() {
        let pair = MatrixPair::new(
            SymMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap(),
            SymMatrix::identity(2),
        )
        .unwrap();
        assert!(matches!(
            rifle_step(&pair, &array![1.0, 0.0].view(), 0.1, 1),
            Err(RifleError::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn converges_on_diagonal_problem() {
        let pair = diag_pair(&[5.0, 1.0, 1.0]);
        let s = 1.0 / 3.0f64.sqrt();
        let cfg = RifleConfig::new(1).with_eta(0.2).with_init(array![s, s, s]).with_max_iter(100);
        let out = rifle(&pair, &cfg).unwrap();
        assert!(out.converged);
        assert!(out.iterations <= 100);
        assert!((out.v[0].abs() - 1.0).abs() < 1e-12);
        assert!((out.rho - 5.0).abs() < 1e-12);
    }

    #[test]
    fn zero_budget_returns_init() {
        let pair = diag_pair(&[3.0, 2.0, 1.0]);
        let init = array![3.0, 4.0, 0.0];
        let cfg = RifleConfig::new(2).with_init(init).with_max_iter(0).with_tol(0.0);
        let out = rifle(&pair, &cfg).unwrap();
        assert_eq!(out.v, array![0.6, 0.8, 0.0]);
        assert!(!out.converged);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn config_validation() {
        let pair = diag_pair(&[3.0, 2.0]);
        assert!(rifle(&pair, &RifleConfig::new(0)).is_err());
        assert!(rifle(&pair, &RifleConfig::new(3)).is_err());
        assert!(rifle(&pair, &RifleConfig::new(1).with_eta(-1.0)).is_err());
        assert!(rifle(&pair, &RifleConfig::new(1).with_tol(-1.0)).is_err());
        assert!(rifle(&pair, &RifleConfig::new(1).with_init(array![1.0])).is_err());
        assert!(matches!(
            rifle(&pair, &RifleConfig::new(1).with_init(array![0.0, 0.0])),
            Err(RifleError::ZeroVector)
        ));
    }

    #[test]
    fn default_step_size_examples() {
        let eta = default_step_size(&SymMatrix::identity(4)).unwrap();
        assert!((eta - 1.0 / 2.1).abs() < 1e-12);
        let eta = default_step_size(&SymMatrix::from_diag(&[4.0, 1.0]).unwrap()).unwrap();
        assert!((eta - 1.0 / 8.4).abs() < 1e-9);
        assert!(matches!(
            default_step_size(&SymMatrix::zeros(3)),
            Err(RifleError::ZeroMatrix)
        ));
    }

    #[test]
    fn default_step_size_on_random_pd() {
        let mut rng = rng_substream(99, 0);
        let d = 10;
        let g = ndarray::Array2::from_shape_fn((d, d), |_| rng.normal());
        let b = SymMatrix::new(g.dot(&g.t())).unwrap();
        let eta = default_step_size(&b).unwrap();
        let lmax = sym_eig(&b).unwrap().max();
        assert!(eta * lmax < 1.0);
        assert!(eta * lmax > 0.4);
    }

    #[test]
    fn schedule_validation() {
        assert!(WarmStartSchedule::new(vec![8, 4, 4, 2]).is_err());
        assert!(WarmStartSchedule::new(vec![2, 4]).is_err());
        assert!(WarmStartSchedule::new(vec![]).is_err());
        assert_eq!(
            WarmStartSchedule::default_for(3, 100).k_sequence(),
            &[24, 12, 6, 3]
        );
        assert_eq!(WarmStartSchedule::default_for(3, 10).k_sequence(), &[10, 6, 3]);
        assert_eq!(WarmStartSchedule::default_for(1, 1).k_sequence(), &[1]);
    }

    #[test]
    fn single_stage_warm_start_matches_plain_run() {
        let pair = diag_pair(&[5.0, 4.0, 2.0, 1.0]);
        let cfg = RifleConfig::new(2).with_seed(4).with_trajectory();
        let plain = rifle(&pair, &cfg).unwrap();
        let warm = rifle_warm_start(&pair, &cfg, &WarmStartSchedule::single(2).unwrap()).unwrap();
        assert_eq!(warm.result, plain);
        assert_eq!(warm.stages.len(), 1);

        let bad = WarmStartSchedule::new(vec![3, 1]).unwrap();
        assert!(rifle_warm_start(&pair, &cfg, &bad).is_err());
    }
}
