//! Reductions of sparse FDA, CCA and SIR to a symmetric pencil, and the
//! metrics used to evaluate their solutions.
//!
//! All covariance estimates divide by `n`, not `n − 1`.

use ndarray::{s, concatenate, Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::Serialize;

use crate::error::{Result, RifleError};
use crate::linalg::{check_dim, norm2, MatrixPair, SymMatrix};

fn check_finite(x: &ArrayView2<f64>, what: &'static str) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(RifleError::NonFinite(what))
    }
}

/// Samples in rows with class labels `0..K`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    x: Array2<f64>,
    labels: Vec<usize>,
    classes: usize,
}

impl LabeledDataset {
    /// The number of classes is one more than the largest label; each of them
    /// must occur at least once.
    pub fn new(x: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        let classes = labels.iter().max().map_or(0, |m| m + 1);
        Self::with_classes(x, labels, classes)
    }

    pub fn with_classes(x: Array2<f64>, labels: Vec<usize>, classes: usize) -> Result<Self> {
        check_dim(x.nrows(), labels.len())?;
        check_finite(&x.view(), "feature matrix")?;
        if classes < 2 {
            return Err(RifleError::TooSmall(format!(
                "need at least 2 classes, found {classes}"
            )));
        }
        let mut counts = vec![0usize; classes];
        for &l in &labels {
            if l >= classes {
                return Err(RifleError::IndexOutOfRange {
                    index: l,
                    dim: classes,
                });
            }
            counts[l] += 1;
        }
        if let Some(class) = counts.iter().position(|&c| c == 0) {
            return Err(RifleError::DegenerateClass { class, count: 0 });
        }
        Ok(LabeledDataset { x, labels, classes })
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Class means as rows of a `K × d` matrix.
    pub fn class_means(&self) -> Array2<f64> {
        let mut means = Array2::zeros((self.classes, self.dim()));
        for (row, &l) in self.x.rows().into_iter().zip(&self.labels) {
            let mut m = means.row_mut(l);
            m += &row;
        }
        for (mut m, c) in means.rows_mut().into_iter().zip(self.class_counts()) {
            m /= c as f64;
        }
        means
    }

    /// Rows `rows` of the dataset, keeping the class count.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        let x = self.x.select(Axis(0), rows);
        let labels = rows.iter().map(|&i| self.labels[i]).collect();
        Self::with_classes(x, labels, self.classes)
    }

    /// Features and labels of `rows` without validating class coverage.
    pub fn subset_rows(&self, rows: &[usize]) -> (Array2<f64>, Vec<usize>) {
        (
            self.x.select(Axis(0), rows),
            rows.iter().map(|&i| self.labels[i]).collect(),
        )
    }
}

/// Two views of the same `n` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedDataset {
    x: Array2<f64>,
    y: Array2<f64>,
}

impl PairedDataset {
    pub fn new(x: Array2<f64>, y: Array2<f64>) -> Result<Self> {
        check_dim(x.nrows(), y.nrows())?;
        check_finite(&x.view(), "x matrix")?;
        check_finite(&y.view(), "y matrix")?;
        if x.ncols() == 0 || y.ncols() == 0 {
            return Err(RifleError::InvalidInput("empty view".into()));
        }
        Ok(PairedDataset { x, y })
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn y(&self) -> ArrayView2<'_, f64> {
        self.y.view()
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.x.ncols(), self.y.ncols())
    }

    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        Self::new(
            self.x.select(Axis(0), rows),
            self.y.select(Axis(0), rows),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    Continuous(Vec<f64>),
    /// Each category is its own slice.
    Categorical(Vec<usize>),
}

/// Predictors with a response to slice on.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicedDataset {
    x: Array2<f64>,
    response: Response,
    slices: usize,
}

impl SlicedDataset {
    /// Continuous response cut into `slices` equal-count slices by rank.
    pub fn continuous(x: Array2<f64>, y: Vec<f64>, slices: usize) -> Result<Self> {
        check_dim(x.nrows(), y.len())?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(RifleError::NonFinite("response"));
        }
        Self::checked(x, Response::Continuous(y), slices)
    }

    pub fn categorical(x: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        check_dim(x.nrows(), labels.len())?;
        let slices = labels.iter().max().map_or(0, |m| m + 1);
        Self::checked(x, Response::Categorical(labels), slices)
    }

    fn checked(x: Array2<f64>, response: Response, slices: usize) -> Result<Self> {
        check_finite(&x.view(), "feature matrix")?;
        if slices < 2 {
            return Err(RifleError::TooSmall(format!(
                "need at least 2 slices, found {slices}"
            )));
        }
        let data = SlicedDataset {
            x,
            response,
            slices,
        };
        let assignment = data.slice_assignment();
        let mut counts = vec![0usize; slices];
        for &h in &assignment {
            counts[h] += 1;
        }
        if let Some(slice) = counts.iter().position(|&c| c == 0) {
            return Err(RifleError::EmptySlice { slice });
        }
        Ok(data)
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn response(&self) -> &Response {
        &self.response
    }

    pub fn slices(&self) -> usize {
        self.slices
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Rows `rows`, keeping the slice count.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        let x = self.x.select(Axis(0), rows);
        let response = match &self.response {
            Response::Continuous(y) => Response::Continuous(rows.iter().map(|&i| y[i]).collect()),
            Response::Categorical(l) => Response::Categorical(rows.iter().map(|&i| l[i]).collect()),
        };
        Self::checked(x, response, self.slices)
    }

    /// Slice index of every sample. For a continuous response the sample of
    /// rank `r` (ties broken by sample index) goes to slice `⌊r·H/n⌋`.
    pub fn slice_assignment(&self) -> Vec<usize> {
        match &self.response {
            Response::Categorical(labels) => labels.clone(),
            Response::Continuous(y) => {
                let n = y.len();
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&i, &j| y[i].total_cmp(&y[j]).then(i.cmp(&j)));
                let mut out = vec![0; n];
                for (rank, &i) in order.iter().enumerate() {
                    out[i] = rank * self.slices / n;
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProblemKind {
    Fda { classes: usize },
    Cca { dx: usize, dy: usize },
    Sir { slices: usize },
    Custom,
}

/// A pencil together with what it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct GEPProblem {
    pub pair: MatrixPair,
    pub kind: ProblemKind,
}

/// Which within-class scatter to pair with the between-class scatter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WithinScatter {
    #[default]
    Full,
    /// Only the diagonal of the within-class scatter.
    Diagonal,
}

/// `(1/n)·Σᵢ (xᵢ − x̄)(xᵢ − x̄)ᵀ`.
pub fn sample_covariance(x: &ArrayView2<f64>) -> Result<SymMatrix> {
    let c = cross_covariance(x, x)?;
    SymMatrix::new(c)
}

/// `(1/n)·Σᵢ (xᵢ − x̄)(yᵢ − ȳ)ᵀ`.
pub fn cross_covariance(x: &ArrayView2<f64>, y: &ArrayView2<f64>) -> Result<Array2<f64>> {
    check_dim(x.nrows(), y.nrows())?;
    let n = x.nrows();
    if n == 0 {
        return Err(RifleError::TooSmall("no samples".into()));
    }
    let xc = x - &x.mean_axis(Axis(0)).unwrap();
    let yc = y - &y.mean_axis(Axis(0)).unwrap();
    Ok(xc.t().dot(&yc) / n as f64)
}

/// Within- and between-class scatter `(Σ̂_w, Σ̂_b)`, whose sum is `(1/n)·XᵀX`.
pub fn scatter_matrices(data: &LabeledDataset) -> Result<(SymMatrix, SymMatrix)> {
    let n = data.n() as f64;
    let means = data.class_means();
    let mut centered = data.x.clone();
    for (mut row, &l) in centered.rows_mut().into_iter().zip(&data.labels) {
        row -= &means.row(l);
    }
    let within = centered.t().dot(&centered) / n;
    let counts = data.class_counts();
    let weighted = Array2::from_shape_fn(means.dim(), |(k, j)| {
        means[[k, j]] * counts[k] as f64
    });
    let between = means.t().dot(&weighted) / n;
    Ok((SymMatrix::new(within)?, SymMatrix::new(between)?))
}

/// Fisher discriminant pencil `(Σ̂_b, Σ̂_w)`.
pub fn fda_build(data: &LabeledDataset) -> Result<GEPProblem> {
    fda_build_with(data, WithinScatter::Full)
}

pub fn fda_build_with(data: &LabeledDataset, within: WithinScatter) -> Result<GEPProblem> {
    let (sw, sb) = scatter_matrices(data)?;
    let sw = match within {
        WithinScatter::Full => sw,
        WithinScatter::Diagonal => SymMatrix::from_diag(sw.diag().as_slice().unwrap())?,
    };
    Ok(GEPProblem {
        pair: MatrixPair::new(sb, sw)?,
        kind: ProblemKind::Fda {
            classes: data.classes(),
        },
    })
}

/// Labels each row of `test_x` with the class whose projected training
/// centroid is nearest to the row's projection onto `v`. Ties go to the
/// smaller label.
pub fn fda_classify(
    v: &ArrayView1<f64>,
    train: &LabeledDataset,
    test_x: &ArrayView2<f64>,
) -> Result<Vec<usize>> {
    check_dim(train.dim(), v.len())?;
    check_dim(train.dim(), test_x.ncols())?;
    if norm2(v) == 0.0 {
        return Err(RifleError::ZeroVector);
    }
    let centroids = train.class_means().dot(v);
    Ok(test_x
        .dot(v)
        .iter()
        .map(|&p| {
            let mut best = 0;
            for k in 1..centroids.len() {
                if (p - centroids[k]).abs() < (p - centroids[best]).abs() {
                    best = k;
                }
            }
            best
        })
        .collect())
}

pub fn count_mismatches(predicted: &[usize], truth: &[usize]) -> usize {
    predicted.iter().zip(truth).filter(|(p, t)| p != t).count()
}

/// Canonical correlation pencil
/// `([[0, Σ̂_xy], [Σ̂_yx, 0]], blockdiag(Σ̂_x, Σ̂_y))` on mean-centered data.
pub fn cca_build(data: &PairedDataset) -> Result<GEPProblem> {
    let (dx, dy) = data.dims();
    let xy = concatenate(Axis(1), &[data.x(), data.y()]).expect("equal row counts");
    let full = cross_covariance(&xy.view(), &xy.view())?;
    let mut a = Array2::zeros((dx + dy, dx + dy));
    let mut b = Array2::zeros((dx + dy, dx + dy));
    a.slice_mut(s![..dx, dx..]).assign(&full.slice(s![..dx, dx..]));
    a.slice_mut(s![dx.., ..dx]).assign(&full.slice(s![dx.., ..dx]));
    b.slice_mut(s![..dx, ..dx]).assign(&full.slice(s![..dx, ..dx]));
    b.slice_mut(s![dx.., dx..]).assign(&full.slice(s![dx.., dx..]));
    Ok(GEPProblem {
        pair: MatrixPair::new(SymMatrix::new(a)?, SymMatrix::new(b)?)?,
        kind: ProblemKind::Cca { dx, dy },
    })
}

/// The two halves of a CCA solution, each of unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalPair {
    pub x: Array1<f64>,
    pub y: Array1<f64>,
    pub x_zero: bool,
    pub y_zero: bool,
}

fn unit_with_sign(v: Array1<f64>) -> (Array1<f64>, bool) {
    let n = norm2(&v.view());
    if n == 0.0 {
        return (v, true);
    }
    let sign = match v.iter().find(|x| **x != 0.0) {
        Some(x) if *x < 0.0 => -1.0,
        _ => 1.0,
    };
    (v * (sign / n), false)
}

/// Splits a stacked `(v_x, v_y)` vector into unit halves whose first nonzero
/// entry is positive. An all-zero half is returned as zero and flagged.
pub fn cca_split(v: &ArrayView1<f64>, dx: usize, dy: usize) -> Result<CanonicalPair> {
    check_dim(dx + dy, v.len())?;
    let (x, x_zero) = unit_with_sign(v.slice(s![..dx]).to_owned());
    let (y, y_zero) = unit_with_sign(v.slice(s![dx..]).to_owned());
    Ok(CanonicalPair {
        x,
        y,
        x_zero,
        y_zero,
    })
}

/// Sliced inverse regression pencil `(Σ̂_{E[X|Y]}, Σ̂_x)` with
/// `Σ̂_{E[X|Y]} = Σ̂_x − (1/n)·Σ_h n_h·Σ̂_{x,h}`.
pub fn sir_build(data: &SlicedDataset) -> Result<GEPProblem> {
    let n = data.n() as f64;
    let sx = sample_covariance(&data.x())?;
    let assignment = data.slice_assignment();
    let mut within = Array2::<f64>::zeros((data.x.ncols(), data.x.ncols()));
    for h in 0..data.slices {
        let rows: Vec<usize> = (0..data.n()).filter(|&i| assignment[i] == h).collect();
        if rows.is_empty() {
            return Err(RifleError::EmptySlice { slice: h });
        }
        let xs = data.x.select(Axis(0), &rows);
        within = within + cross_covariance(&xs.view(), &xs.view())? * rows.len() as f64;
    }
    let a = sx.as_array() - &(within / n);
    Ok(GEPProblem {
        pair: MatrixPair::new(SymMatrix::new(a)?, sx)?,
        kind: ProblemKind::Sir {
            slices: data.slices,
        },
    })
}

/// `min(‖u − w‖², ‖u + w‖²)` for the unit-normalized inputs, in `[0, 2]`.
pub fn direction_error(v_hat: &ArrayView1<f64>, v_star: &ArrayView1<f64>) -> Result<f64> {
    check_dim(v_star.len(), v_hat.len())?;
    let nu = norm2(v_hat);
    let nw = norm2(v_star);
    if nu == 0.0 || nw == 0.0 {
        return Err(RifleError::ZeroVector);
    }
    let c = v_hat.dot(v_star) / (nu * nw);
    // ‖u ∓ w‖² = 2 ∓ 2uᵀw for unit vectors
    Ok((2.0 - 2.0 * c.abs()).clamp(0.0, 2.0))
}
