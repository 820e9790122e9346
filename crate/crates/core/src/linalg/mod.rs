//! Dense symmetric linear algebra.
//!
//! Everything downstream works on [`SymMatrix`] values and on the pencil
//! [`MatrixPair`]. Matrices are stored as row-major `ndarray` arrays and are
//! exactly symmetric after construction.

mod decomp;

pub use decomp::{cholesky, gen_eig, spectral_norm, sym_eig, CholeskyFactor, EigenDecomposition};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::Serialize;

use crate::error::{Result, RifleError};

/// Entries whose symmetrization moved them by more than this are reported.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-12;

/// A dense, exactly symmetric matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    data: Array2<f64>,
    asymmetry: f64,
}

impl SymMatrix {
    /// Builds a symmetric matrix from `m` by replacing it with `(m + mᵀ)/2`.
    ///
    /// The largest change made to any entry is kept and can be queried through
    /// [`SymMatrix::was_asymmetric`].
    pub fn new(m: Array2<f64>) -> Result<Self> {
        let (rows, cols) = m.dim();
        if rows != cols {
            return Err(RifleError::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(RifleError::InvalidInput("empty matrix".into()));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(RifleError::NonFinite("matrix entries"));
        }
        let mut data = m;
        let mut asymmetry = 0.0f64;
        for i in 0..rows {
            for j in (i + 1)..rows {
                let (a, b) = (data[[i, j]], data[[j, i]]);
                if a != b {
                    let mid = 0.5 * (a + b);
                    asymmetry = asymmetry.max((a - mid).abs()).max((b - mid).abs());
                    data[[i, j]] = mid;
                    data[[j, i]] = mid;
                }
            }
        }
        Ok(SymMatrix { data, asymmetry })
    }

    pub(crate) fn from_symmetric_unchecked(data: Array2<f64>) -> Self {
        debug_assert_eq!(data.nrows(), data.ncols());
        SymMatrix {
            data,
            asymmetry: 0.0,
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_symmetric_unchecked(Array2::eye(d))
    }

    pub fn zeros(d: usize) -> Self {
        Self::from_symmetric_unchecked(Array2::zeros((d, d)))
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() {
            return Err(RifleError::InvalidInput("empty diagonal".into()));
        }
        if diag.iter().any(|x| !x.is_finite()) {
            return Err(RifleError::NonFinite("diagonal"));
        }
        Ok(Self::from_symmetric_unchecked(Array2::from_diag(&Array1::from(
            diag.to_vec(),
        ))))
    }

    /// Builds from row slices; convenient in tests and small examples.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let d = rows.len();
        let mut m = Array2::zeros((d, d));
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(RifleError::NotSquare {
                    rows: d,
                    cols: row.len(),
                });
            }
            for (j, &x) in row.iter().enumerate() {
                m[[i, j]] = x;
            }
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_array(self) -> Array2<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[[i, j]]
    }

    /// Largest amount any input entry was moved by symmetrization.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn was_asymmetric(&self) -> bool {
        self.asymmetry > ASYMMETRY_TOLERANCE
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        self.data.diag().sum()
    }

    pub fn diag(&self) -> Array1<f64> {
        self.data.diag().to_owned()
    }

    pub fn matvec(&self, v: &ArrayView1<f64>) -> Array1<f64> {
        self.data.dot(v)
    }

    /// `M·v` touching only the columns where `v` is nonzero.
    pub fn sparse_matvec(&self, v: &ArrayView1<f64>) -> Array1<f64> {
        let mut out = Array1::zeros(self.dim());
        for (j, &vj) in v.iter().enumerate() {
            if vj != 0.0 {
                // row j equals column j
                out.scaled_add(vj, &self.data.row(j));
            }
        }
        out
    }

    pub fn scaled(&self, c: f64) -> SymMatrix {
        Self::from_symmetric_unchecked(&self.data * c)
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self::from_symmetric_unchecked(&self.data + &other.data))
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self::from_symmetric_unchecked(&self.data - &other.data))
    }

    /// Principal submatrix on `f`, in index order.
    pub fn restrict(&self, f: &IndexSet) -> Result<SymMatrix> {
        restrict(self, f)
    }
}

/// A symmetric pencil `(A, B)` of matching dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPair {
    a: SymMatrix,
    b: SymMatrix,
}

impl MatrixPair {
    pub fn new(a: SymMatrix, b: SymMatrix) -> Result<Self> {
        check_dim(a.dim(), b.dim())?;
        Ok(MatrixPair { a, b })
    }

    pub fn a(&self) -> &SymMatrix {
        &self.a
    }

    pub fn b(&self) -> &SymMatrix {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn into_parts(self) -> (SymMatrix, SymMatrix) {
        (self.a, self.b)
    }

    pub fn restrict(&self, f: &IndexSet) -> Result<MatrixPair> {
        Ok(MatrixPair {
            a: restrict(&self.a, f)?,
            b: restrict(&self.b, f)?,
        })
    }
}

/// Strictly increasing set of 0-based coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
#[serde(transparent)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    /// Sorts and deduplicates `indices`.
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        IndexSet(indices)
    }

    pub fn full(d: usize) -> Self {
        IndexSet((0..d).collect())
    }

    /// Indices of the nonzero entries of `v`.
    pub fn support_of(v: &ArrayView1<f64>) -> Self {
        IndexSet(
            v.iter()
                .enumerate()
                .filter(|(_, x)| **x != 0.0)
                .map(|(i, _)| i)
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    pub fn check_bounds(&self, dim: usize) -> Result<()> {
        match self.0.last() {
            Some(&i) if i >= dim => Err(RifleError::IndexOutOfRange { index: i, dim }),
            _ => Ok(()),
        }
    }

    /// Scatters a `|F|`-vector back into dimension `dim`, zero elsewhere.
    pub fn embed(&self, values: &ArrayView1<f64>, dim: usize) -> Array1<f64> {
        let mut out = Array1::zeros(dim);
        for (pos, i) in self.iter().enumerate() {
            out[i] = values[pos];
        }
        out
    }

    /// Gathers the entries of `v` on this set.
    pub fn gather(&self, v: &ArrayView1<f64>) -> Array1<f64> {
        self.iter().map(|i| v[i]).collect()
    }
}

impl From<Vec<usize>> for IndexSet {
    fn from(v: Vec<usize>) -> Self {
        IndexSet::new(v)
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(RifleError::DimMismatch { expected, found })
    } else {
        Ok(())
    }
}

/// Returns `vᵀ·m·v`.
pub fn quadratic_form(m: &SymMatrix, v: &ArrayView1<f64>) -> Result<f64> {
    check_dim(m.dim(), v.len())?;
    Ok(v.dot(&m.sparse_matvec(v)))
}

/// Principal submatrix `m_F` with rows and columns in the order of `f`.
pub fn restrict(m: &SymMatrix, f: &IndexSet) -> Result<SymMatrix> {
    f.check_bounds(m.dim())?;
    if f.is_empty() {
        return Err(RifleError::InvalidInput("empty index set".into()));
    }
    let idx = f.as_slice();
    let s = idx.len();
    let mut out = Array2::zeros((s, s));
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            out[[r, c]] = m.data[[i, j]];
        }
    }
    Ok(SymMatrix::from_symmetric_unchecked(out))
}

pub fn norm2(v: &ArrayView1<f64>) -> f64 {
    v.dot(v).sqrt()
}

/// Unit-norm copy of `v`, or `ZeroVector` when `v` vanishes.
pub fn normalized(v: &ArrayView1<f64>) -> Result<Array1<f64>> {
    let n = norm2(v);
    if n == 0.0 || !n.is_finite() {
        return Err(RifleError::ZeroVector);
    }
    Ok(v.mapv(|x| x / n))
}

pub fn count_nonzero(v: &ArrayView1<f64>) -> usize {
    v.iter().filter(|x| **x != 0.0).count()
}
