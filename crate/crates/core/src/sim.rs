//! Seeded simulation scenarios: Gaussian discriminant data, canonical
//! correlation data and planted pencils with a known sparse leading
//! generalized eigenvector.
//!
//! Coordinates are 0-based. The discriminant signal lives on the odd
//! coordinates `1, 3, …, 39`, and the canonical directions on
//! `0, 5, 10, 15, 20` of each view.

use ndarray::{s, Array1, Array2, ArrayView1, Axis};
use serde::Serialize;

use crate::error::{Result, RifleError};
use crate::linalg::{check_dim, cholesky, norm2, IndexSet, MatrixPair, SymMatrix};
use crate::models::{LabeledDataset, PairedDataset};
use crate::rng::RngState;

pub const AR_BLOCKS: usize = 5;
pub const AR_CORRELATION: f64 = 0.7;
pub const CCA_CORRELATION: f64 = 0.9;
pub const CCA_SUPPORT: [usize; 5] = [0, 5, 10, 15, 20];
/// Threshold below which population direction entries count as zero.
pub const SUPPORT_THRESHOLD: f64 = 1e-10;

/// Block-diagonal covariance with `blocks` equal blocks whose entries are
/// `rho^|j − j′|`.
pub fn block_ar_cov(d: usize, blocks: usize, rho: f64) -> Result<SymMatrix> {
    if d == 0 || blocks == 0 || d % blocks != 0 {
        return Err(RifleError::Indivisible { dim: d, blocks });
    }
    if !(rho.abs() < 1.0) {
        return Err(RifleError::InvalidInput(format!(
            "correlation {rho} must lie in (-1, 1)"
        )));
    }
    let size = d / blocks;
    let m = Array2::from_shape_fn((d, d), |(i, j)| {
        if i / size == j / size {
            rho.powi(i.abs_diff(j) as i32)
        } else {
            0.0
        }
    });
    SymMatrix::new(m)
}

/// `n` rows drawn iid from `N(mean, cov)` as `mean + L·z`.
pub fn sample_mvn(
    rng: &mut RngState,
    mean: &ArrayView1<f64>,
    cov: &SymMatrix,
    n: usize,
) -> Result<Array2<f64>> {
    check_dim(cov.dim(), mean.len())?;
    let chol = cholesky(cov)?;
    let d = cov.dim();
    let mut out = Array2::zeros((n, d));
    for mut row in out.rows_mut() {
        let z = Array1::from(rng.normals(d));
        row.assign(&(chol.mul_lower(&z.view()) + mean));
    }
    Ok(out)
}

/// Population side of a discriminant scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct FdaPopulation {
    pub sigma: SymMatrix,
    /// Class means as rows.
    pub means: Array2<f64>,
    /// `Σ_k π_k·μ_k·μ_kᵀ` with equal class weights.
    pub sigma_b: SymMatrix,
    pub sigma_w: SymMatrix,
    /// Unit leading generalized eigenvector of `(Σ_b, Σ_w)`.
    pub v_star: Array1<f64>,
    pub support: IndexSet,
    pub lambda1: f64,
}

impl FdaPopulation {
    pub fn classes(&self) -> usize {
        self.means.nrows()
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    /// `n_per_class` samples of each class, grouped by class.
    pub fn sample(&self, rng: &mut RngState, n_per_class: usize) -> Result<LabeledDataset> {
        let k = self.classes();
        let mut x = Array2::zeros((k * n_per_class, self.dim()));
        let mut labels = Vec::with_capacity(k * n_per_class);
        for class in 0..k {
            let rows = sample_mvn(rng, &self.means.row(class), &self.sigma, n_per_class)?;
            x.slice_mut(s![class * n_per_class..(class + 1) * n_per_class, ..])
                .assign(&rows);
            labels.extend(std::iter::repeat(class).take(n_per_class));
        }
        LabeledDataset::with_classes(x, labels, k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFDA {
    pub data: LabeledDataset,
    pub population: FdaPopulation,
}

fn check_fda_dim(d: usize) -> Result<()> {
    if d < 41 {
        return Err(RifleError::TooSmall(format!(
            "discriminant scenario needs d >= 41, got {d}"
        )));
    }
    if d % AR_BLOCKS != 0 {
        return Err(RifleError::Indivisible {
            dim: d,
            blocks: AR_BLOCKS,
        });
    }
    Ok(())
}

fn signal_pattern(d: usize) -> Array1<f64> {
    Array1::from_shape_fn(d, |j| if j % 2 == 1 && j < 40 { 1.0 } else { 0.0 })
}

/// Population with class means `scales[k]·m`, where `m` is the indicator of
/// the signal coordinates.
fn fda_population(d: usize, scales: &[f64]) -> Result<FdaPopulation> {
    check_fda_dim(d)?;
    let sigma = block_ar_cov(d, AR_BLOCKS, AR_CORRELATION)?;
    let pattern = signal_pattern(d);
    let k = scales.len();
    let mut means = Array2::zeros((k, d));
    for (mut row, &c) in means.rows_mut().into_iter().zip(scales) {
        row.assign(&(&pattern * c));
    }
    let weight = scales.iter().map(|c| c * c).sum::<f64>() / k as f64;
    let outer = pattern
        .view()
        .insert_axis(Axis(1))
        .dot(&pattern.view().insert_axis(Axis(0)));
    let sigma_b = SymMatrix::new(outer * weight)?;
    // Σ_b is rank one along m, so the leading direction is Σ⁻¹m
    let direction = cholesky(&sigma)?.solve(&pattern.view());
    let lambda1 = weight * pattern.dot(&direction);
    let v_star = &direction / norm2(&direction.view());
    let support = IndexSet::new(
        v_star
            .iter()
            .enumerate()
            .filter(|(_, x)| x.abs() > SUPPORT_THRESHOLD)
            .map(|(i, _)| i)
            .collect(),
    );
    Ok(FdaPopulation {
        sigma_w: sigma.clone(),
        sigma,
        means,
        sigma_b,
        v_star,
        support,
        lambda1,
    })
}

/// Two classes with means `0` and `0.5` on the signal coordinates and
/// block-AR(0.7) covariance.
pub fn fda_binary_population(d: usize) -> Result<FdaPopulation> {
    fda_population(d, &[0.0, 0.5])
}

/// Four classes with means `(k − 1)/3` on the signal coordinates.
pub fn fda_multiclass_population(d: usize) -> Result<FdaPopulation> {
    fda_population(d, &[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])
}

pub fn gen_fda_binary(d: usize, n_per_class: usize, rng: &mut RngState) -> Result<ScenarioFDA> {
    let population = fda_binary_population(d)?;
    let data = population.sample(rng, n_per_class)?;
    Ok(ScenarioFDA { data, population })
}

pub fn gen_fda_multiclass(
    d: usize,
    n_per_class: usize,
    rng: &mut RngState,
) -> Result<ScenarioFDA> {
    let population = fda_multiclass_population(d)?;
    let data = population.sample(rng, n_per_class)?;
    Ok(ScenarioFDA { data, population })
}

/// Population side of a canonical correlation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct CcaPopulation {
    /// Joint covariance of `(x, y)`.
    pub sigma: SymMatrix,
    /// Canonical directions with `vᵀ·Σ·v = 1` in each view.
    pub vx: Array1<f64>,
    pub vy: Array1<f64>,
    pub lambda1: f64,
}

impl CcaPopulation {
    pub fn half(&self) -> usize {
        self.vx.len()
    }

    /// `([[0, Σ_xy], [Σ_yx, 0]], blockdiag(Σ_x, Σ_y))`.
    pub fn pair(&self) -> Result<MatrixPair> {
        let h = self.half();
        let full = self.sigma.as_array();
        let mut a = full.clone();
        let mut b = full.clone();
        a.slice_mut(s![..h, ..h]).fill(0.0);
        a.slice_mut(s![h.., h..]).fill(0.0);
        b.slice_mut(s![..h, h..]).fill(0.0);
        b.slice_mut(s![h.., ..h]).fill(0.0);
        MatrixPair::new(SymMatrix::new(a)?, SymMatrix::new(b)?)
    }

    /// Stacked `(v_x, v_y)`.
    pub fn v_star(&self) -> Array1<f64> {
        ndarray::concatenate(Axis(0), &[self.vx.view(), self.vy.view()]).unwrap()
    }

    pub fn sample(&self, rng: &mut RngState, n: usize) -> Result<PairedDataset> {
        let h = self.half();
        let z = sample_mvn(rng, &Array1::zeros(2 * h).view(), &self.sigma, n)?;
        PairedDataset::new(z.slice(s![.., ..h]).to_owned(), z.slice(s![.., h..]).to_owned())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioCCA {
    pub data: PairedDataset,
    pub population: CcaPopulation,
}

pub fn cca_population(d: usize) -> Result<CcaPopulation> {
    if d % 2 != 0 || d / 2 < 25 {
        return Err(RifleError::TooSmall(format!(
            "canonical correlation scenario needs even d with d/2 >= 25, got {d}"
        )));
    }
    let h = d / 2;
    let sx = block_ar_cov(h, AR_BLOCKS, AR_CORRELATION)?;
    let mut v = Array1::zeros(h);
    for &j in &CCA_SUPPORT {
        v[j] = 1.0 / 5.0f64.sqrt();
    }
    let sv = sx.matvec(&v.view());
    let scale = v.dot(&sv).sqrt();
    let v = v / scale;
    let sv = sv / scale;
    let lambda1 = CCA_CORRELATION;
    let cross = sv
        .view()
        .insert_axis(Axis(1))
        .dot(&sv.view().insert_axis(Axis(0)))
        * lambda1;
    let mut joint = Array2::zeros((d, d));
    joint.slice_mut(s![..h, ..h]).assign(sx.as_array());
    joint.slice_mut(s![h.., h..]).assign(sx.as_array());
    joint.slice_mut(s![..h, h..]).assign(&cross);
    joint.slice_mut(s![h.., ..h]).assign(&cross.t());
    let sigma = SymMatrix::new(joint)?;
    cholesky(&sigma)?;
    Ok(CcaPopulation {
        sigma,
        vx: v.clone(),
        vy: v,
        lambda1,
    })
}

/// Paired Gaussian views of dimension `d/2` each with a sparse leading
/// canonical pair of correlation 0.9.
pub fn gen_cca(d: usize, n: usize, rng: &mut RngState) -> Result<ScenarioCCA> {
    let population = cca_population(d)?;
    let data = population.sample(rng, n)?;
    Ok(ScenarioCCA { data, population })
}

/// Noiseless pencil with a known sparse leading generalized eigenvector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantedInstance {
    #[serde(skip)]
    pub pair: MatrixPair,
    /// Unit ℓ₂ norm.
    #[serde(skip)]
    pub w: Array1<f64>,
    pub lambda1: f64,
    /// Generalized eigenvalues of the extra directions, all below `lambda1`.
    pub secondary: Vec<f64>,
}

fn b_inner(b: &SymMatrix, x: &Array1<f64>, y: &Array1<f64>) -> f64 {
    x.dot(&b.matvec(&y.view()))
}

/// `B` is block-AR(0.7) (five blocks when `d` allows, otherwise one), `w` has
/// `s` nonzeros with random signs and magnitudes in `[0.5, 1.5)`, and
///
/// `A = λ₁·(Bw)(Bw)ᵀ/(wᵀBw) + Σ_j μ_j·(Bu_j)(Bu_j)ᵀ/(u_jᵀBu_j)`
///
/// with up to three random directions `u_j` that are `B`-orthogonal to `w`
/// and to each other, and `μ_j ∈ [0.1, 0.3)·λ₁`. Then `Aw = λ₁Bw`,
/// `Au_j = μ_j·Bu_j`, and every other generalized eigenvalue is zero.
pub fn gen_planted_gep(
    d: usize,
    s: usize,
    lambda1: f64,
    rng: &mut RngState,
) -> Result<PlantedInstance> {
    if s == 0 || s > d {
        return Err(RifleError::InvalidInput(format!(
            "sparsity {s} must lie in 1..={d}"
        )));
    }
    if !(lambda1 > 0.0 && lambda1.is_finite()) {
        return Err(RifleError::InvalidInput(format!(
            "leading eigenvalue {lambda1} must be positive"
        )));
    }
    let blocks = if d % AR_BLOCKS == 0 { AR_BLOCKS } else { 1 };
    let b = block_ar_cov(d, blocks, AR_CORRELATION)?;

    let mut w = Array1::zeros(d);
    for i in rng.choose_indices(d, s) {
        let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
        w[i] = sign * (0.5 + rng.uniform());
    }
    let w = &w / norm2(&w.view());

    let mut basis = vec![w.clone()];
    let mut a = Array2::zeros((d, d));
    let mut add_direction = |u: &Array1<f64>, weight: f64| {
        let bu = b.matvec(&u.view());
        let outer = bu
            .view()
            .insert_axis(Axis(1))
            .dot(&bu.view().insert_axis(Axis(0)));
        a += &(outer * (weight / u.dot(&bu)));
    };
    add_direction(&w, lambda1);
    let mut secondary = Vec::new();
    let extra = 3.min(d - 1);
    while secondary.len() < extra {
        let mut u = Array1::from(rng.normals(d));
        for q in &basis {
            let coef = b_inner(&b, &u, q) / b_inner(&b, q, q);
            u = u - q * coef;
        }
        let nu = norm2(&u.view());
        if nu < 1e-8 {
            continue;
        }
        let u = u / nu;
        let mu = lambda1 * (0.1 + 0.2 * rng.uniform());
        add_direction(&u, mu);
        basis.push(u);
        secondary.push(mu);
    }
    Ok(PlantedInstance {
        pair: MatrixPair::new(SymMatrix::new(a)?, b)?,
        w,
        lambda1,
        secondary,
    })
}
