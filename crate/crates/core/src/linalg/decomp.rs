use ndarray::{Array1, Array2, ArrayView1, Axis};

use super::{MatrixPair, SymMatrix};
use crate::error::{Result, RifleError};

/// Pivots at or below this fraction of the largest diagonal entry count as singular.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOLERANCE: f64 = 1e-12;

/// Lower-triangular `L` with `L·Lᵀ = M`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    lower: Array2<f64>,
}

impl CholeskyFactor {
    pub fn lower(&self) -> &Array2<f64> {
        &self.lower
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    /// Solves `L·x = b`.
    pub fn solve_lower(&self, b: &ArrayView1<f64>) -> Array1<f64> {
        let n = self.dim();
        let l = &self.lower;
        let mut x = b.to_owned();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= l[[i, j]] * x[j];
            }
            x[i] = acc / l[[i, i]];
        }
        x
    }

    /// Solves `Lᵀ·x = b`.
    pub fn solve_upper(&self, b: &ArrayView1<f64>) -> Array1<f64> {
        let n = self.dim();
        let l = &self.lower;
        let mut x = b.to_owned();
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= l[[j, i]] * x[j];
            }
            x[i] = acc / l[[i, i]];
        }
        x
    }

    /// Solves `M·x = b`.
    pub fn solve(&self, b: &ArrayView1<f64>) -> Array1<f64> {
        let y = self.solve_lower(b);
        self.solve_upper(&y.view())
    }

    /// Returns `L·z`; used to color standard-normal draws.
    pub fn mul_lower(&self, z: &ArrayView1<f64>) -> Array1<f64> {
        let n = self.dim();
        let l = &self.lower;
        let mut out = Array1::zeros(n);
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..=i {
                acc += l[[i, j]] * z[j];
            }
            out[i] = acc;
        }
        out
    }
}

/// Eigenpairs sorted by descending eigenvalue; eigenvectors are the columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Array1<f64>,
    pub eigenvectors: Array2<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn leading(&self) -> (f64, ArrayView1<'_, f64>) {
        (self.eigenvalues[0], self.eigenvectors.column(0))
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }
}

/// Cholesky factorization of a symmetric positive definite matrix.
pub fn cholesky(m: &SymMatrix) -> Result<CholeskyFactor> {
    let n = m.dim();
    let a = m.as_array();
    let max_diag = a.diag().iter().fold(f64::NEG_INFINITY, |acc, &x| acc.max(x));
    let floor = PIVOT_TOLERANCE * max_diag.max(0.0);
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut pivot = a[[j, j]];
        for k in 0..j {
            pivot -= l[[j, k]] * l[[j, k]];
        }
        if !(pivot > floor) {
            return Err(RifleError::NotPositiveDefinite { index: j, pivot });
        }
        let ljj = pivot.sqrt();
        l[[j, j]] = ljj;
        for i in (j + 1)..n {
            let mut acc = a[[i, j]];
            for k in 0..j {
                acc -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = acc / ljj;
        }
    }
    Ok(CholeskyFactor { lower: l })
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps run over the upper triangle in row order until the off-diagonal
/// Frobenius norm drops below `1e-12·‖m‖_F`. Eigenvalues come back in
/// descending order; ties keep the order the rotations produced.
pub fn sym_eig(m: &SymMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    let mut a: Vec<f64> = m.as_array().iter().copied().collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = m.frobenius_norm();
    let threshold = OFF_DIAGONAL_TOLERANCE * scale;

    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += a[p * n + q] * a[p * n + q];
            }
        }
        (2.0 * s).sqrt()
    };

    let mut converged = off_norm(&a) <= threshold;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        converged = off_norm(&a) <= threshold;
    }
    if !converged {
        return Err(RifleError::NoConvergence { sweeps });
    }

    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep rotation order
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));

    let eigenvalues: Array1<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut eigenvectors = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            eigenvectors[[row, col]] = v[row * n + src];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Generalized eigendecomposition of a symmetric-definite pencil.
///
/// Whitens with `L = chol(B)`, diagonalizes `L⁻¹·A·L⁻ᵀ`, and maps the
/// eigenvectors back through `L⁻ᵀ`, so every returned `w` has `wᵀ·B·w = 1`.
pub fn gen_eig(pair: &MatrixPair) -> Result<EigenDecomposition> {
    let factor = cholesky(pair.b())?;
    let n = pair.dim();
    let a = pair.a().as_array();

    // X = L⁻¹·A, then W = L⁻¹·Xᵀ = L⁻¹·A·L⁻ᵀ
    let mut x = Array2::zeros((n, n));
    for (j, col) in a.axis_iter(Axis(1)).enumerate() {
        x.column_mut(j).assign(&factor.solve_lower(&col));
    }
    let mut w = Array2::zeros((n, n));
    for (j, row) in x.axis_iter(Axis(0)).enumerate() {
        w.column_mut(j).assign(&factor.solve_lower(&row));
    }
    let whitened = SymMatrix::new(w)?;
    let eig = sym_eig(&whitened)?;

    let mut vectors = Array2::zeros((n, n));
    for (j, q) in eig.eigenvectors.axis_iter(Axis(1)).enumerate() {
        vectors.column_mut(j).assign(&factor.solve_upper(&q));
    }
    Ok(EigenDecomposition {
        eigenvalues: eig.eigenvalues,
        eigenvectors: vectors,
    })
}

/// Spectral norm `max |λ|` of a symmetric matrix.
pub fn spectral_norm(m: &SymMatrix) -> Result<f64> {
    let eig = sym_eig(m)?;
    Ok(eig.max().abs().max(eig.min().abs()))
}
