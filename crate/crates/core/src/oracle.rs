//! Brute-force solvers and perturbation diagnostics for small pencils.
//!
//! These routines enumerate supports exhaustively, so they only accept
//! problems where that is affordable: at most [`MAX_ORACLE_DIM`] coordinates
//! and at most [`MAX_SUBSETS`] supports. An enumeration over supports of size
//! `d` (the whole index set) is always allowed since it is a single solve.
//!
//! Two facts keep the enumerations small. The sparse spectral norm over
//! `s`-sparse vectors is attained on a support of size exactly `s` (eigenvalue
//! interlacing), and the Crawford number of a principal subpencil can only
//! grow as the index set shrinks (the minimum runs over fewer vectors), so the
//! infimum over `|F| ≤ k′` is attained at `|F| = min(k′, d)`.

use itertools::Itertools;
use ndarray::{Array1, Array2, ArrayView1};
use serde::Serialize;

use crate::error::{Result, RifleError};
use crate::linalg::{
    check_dim, gen_eig, norm2, spectral_norm, sym_eig, IndexSet, MatrixPair, SymMatrix,
};

pub const MAX_ORACLE_DIM: usize = 20;
pub const MAX_SUBSETS: u128 = 200_000;
pub const CRAWFORD_GRID: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseGEPSolution {
    /// Unit ℓ₂ norm, zero off `support`.
    pub v: Array1<f64>,
    pub support: IndexSet,
    pub lambda: f64,
    /// Supports skipped because the restricted `B` failed Cholesky.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremQuantities {
    pub s: usize,
    pub k: usize,
    pub k_prime: usize,
    pub eta: f64,
    pub cr_k: f64,
    pub eps_k: f64,
    pub delta_lambda: f64,
    pub gamma: f64,
    pub omega_k: f64,
    pub theta: f64,
    pub nu: f64,
    pub a: f64,
    /// Smallest admissible `b`, i.e. the observed `ε(k′)/cr(k′)`.
    pub b: f64,
    pub c: f64,
    pub c_lower: f64,
    pub c_upper: f64,
    pub kappa_b: f64,
    pub lambda_max_b: f64,
    pub lambda_min_b: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// `Δλ > ε(k′)/cr(k′)`.
    pub gap_condition_holds: bool,
}

/// Leading generalized eigenvector of a principal subpencil, embedded in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedGevec {
    /// `vᵀ·B·v = 1`, zero off the index set.
    pub v: Array1<f64>,
    /// `v / ‖v‖₂`.
    pub y: Array1<f64>,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma3Bound {
    /// `δ(F) = √(‖E_A,F‖₂² + ‖E_B,F‖₂²)`.
    pub delta: f64,
    /// `Δλ̂(F)`, the smallest chordal gap to the trailing perturbed eigenvalues.
    pub gap: f64,
    /// `cr(Â_F, B̂_F)`.
    pub crawford: f64,
    /// `δ(F) / (Δλ̂(F)·cr(Â_F, B̂_F))`.
    pub bound: f64,
    /// `δ(F)/Δλ̂(F) < cr(Â_F, B̂_F)`.
    pub precondition_holds: bool,
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Validates an enumeration over supports of `size` coordinates out of `d`
/// and returns the effective size `min(size, d)`.
pub fn check_enumeration(d: usize, size: usize) -> Result<usize> {
    if size == 0 {
        return Err(RifleError::InvalidInput("support size 0".into()));
    }
    let size = size.min(d);
    if size == d {
        return Ok(size);
    }
    if d > MAX_ORACLE_DIM || binomial(d, size) > MAX_SUBSETS {
        return Err(RifleError::TooLarge { dim: d, size });
    }
    Ok(size)
}

fn supports(d: usize, size: usize) -> impl Iterator<Item = IndexSet> {
    (0..d).combinations(size).map(IndexSet::new)
}

/// Exact solution of the `s`-sparse generalized eigenproblem by enumeration.
pub fn exhaustive_sparse_gep(pair: &MatrixPair, s: usize) -> Result<SparseGEPSolution> {
    let d = pair.dim();
    let size = check_enumeration(d, s)?;
    let mut best: Option<(f64, IndexSet, Array1<f64>)> = None;
    let mut skipped = 0;
    for f in supports(d, size) {
        let sub = pair.restrict(&f)?;
        let eig = match gen_eig(&sub) {
            Ok(e) => e,
            Err(RifleError::NotPositiveDefinite { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let (lambda, w) = eig.leading();
        // strict comparison keeps the lexicographically first maximizer
        if best.as_ref().map_or(true, |(b, _, _)| lambda > *b) {
            best = Some((lambda, f.clone(), w.to_owned()));
        }
    }
    let (lambda, support, w) = best.ok_or(RifleError::AllSupportsSingular { size })?;
    let mut v = support.embed(&w.view(), d);
    let n = norm2(&v.view());
    v /= n;
    Ok(SparseGEPSolution {
        v,
        support,
        lambda,
        skipped,
    })
}

/// `ρ(z, s) = sup { |uᵀzu| : ‖u‖₂ = 1, ‖u‖₀ ≤ s }`.
pub fn sparse_spectral_norm(z: &SymMatrix, s: usize) -> Result<f64> {
    let d = z.dim();
    let size = check_enumeration(d, s)?;
    let mut best = 0.0f64;
    for f in supports(d, size) {
        best = best.max(spectral_norm(&z.restrict(&f)?)?);
    }
    Ok(best)
}

fn rotated(pair: &MatrixPair, angle: f64) -> SymMatrix {
    let (c, s) = (angle.cos(), angle.sin());
    let m = pair.a().as_array() * c + pair.b().as_array() * s;
    SymMatrix::new(m).expect("combination of finite symmetric matrices")
}

fn min_eigenvalue_at(pair: &MatrixPair, angle: f64) -> Result<f64> {
    Ok(sym_eig(&rotated(pair, angle))?.min())
}

/// Crawford number `min_{‖v‖=1} √((vᵀAv)² + (vᵀBv)²)`.
///
/// Computed as the distance from the origin to the joint numerical range,
/// `max_θ λ_min(cos θ·A + sin θ·B)`, over a 4096-point angle grid followed by
/// one Newton step on the best grid angle. The grid value is a lower bound,
/// and the Newton step is only accepted when it improves on it. Returns 0 when
/// the origin lies inside the range (the pencil is not definite).
///
/// For `d = 2` the joint numerical range of a real pencil need not be convex;
/// the two formulations still agree whenever the pencil is definite.
pub fn crawford_number(pair: &MatrixPair) -> Result<f64> {
    let step = 2.0 * std::f64::consts::PI / CRAWFORD_GRID as f64;
    let mut best_angle = 0.0;
    let mut best = f64::NEG_INFINITY;
    for j in 0..CRAWFORD_GRID {
        let angle = step * j as f64;
        let val = min_eigenvalue_at(pair, angle)?;
        if val > best {
            best = val;
            best_angle = angle;
        }
    }
    if best > 0.0 {
        if let Some(refined) = newton_refine(pair, best_angle, step)? {
            best = best.max(refined);
        }
    }
    Ok(best.max(0.0))
}

/// One Newton step on `θ ↦ λ_min(cos θ·A + sin θ·B)` using first- and
/// second-order eigenvalue perturbation. `None` when the minimum eigenvalue
/// is (nearly) repeated or the curvature has the wrong sign.
fn newton_refine(pair: &MatrixPair, angle: f64, max_step: f64) -> Result<Option<f64>> {
    let m = rotated(pair, angle);
    let eig = sym_eig(&m)?;
    let n = eig.dim();
    let lmin = eig.min();
    let q = eig.eigenvectors.column(n - 1);
    let (c, s) = (angle.cos(), angle.sin());
    let dm: Array2<f64> = pair.a().as_array() * (-s) + pair.b().as_array() * c;
    let dm_q = dm.dot(&q);
    let first = q.dot(&dm_q);
    let mut second = -lmin;
    let scale = 1e-12 * m.frobenius_norm().max(1.0);
    for j in 0..n - 1 {
        let gap = lmin - eig.eigenvalues[j];
        if gap.abs() <= scale {
            return Ok(None);
        }
        let coupling = eig.eigenvectors.column(j).dot(&dm_q);
        second += 2.0 * coupling * coupling / gap;
    }
    if !(second < 0.0) {
        return Ok(None);
    }
    let delta = (-first / second).clamp(-max_step, max_step);
    Ok(Some(min_eigenvalue_at(pair, angle + delta)?))
}

/// `cr(k′) = inf_{|F| ≤ k′} cr(A_F, B_F)`.
pub fn cr_inf(pair: &MatrixPair, k_prime: usize) -> Result<f64> {
    let d = pair.dim();
    let size = check_enumeration(d, k_prime)?;
    let mut best = f64::INFINITY;
    for f in supports(d, size) {
        best = best.min(crawford_number(&pair.restrict(&f)?)?);
    }
    Ok(best)
}

/// `ε(k′) = √(ρ(E_A, k′)² + ρ(E_B, k′)²)`.
pub fn epsilon_k(e_a: &SymMatrix, e_b: &SymMatrix, k_prime: usize) -> Result<f64> {
    check_dim(e_a.dim(), e_b.dim())?;
    let ra = sparse_spectral_norm(e_a, k_prime)?;
    let rb = sparse_spectral_norm(e_b, k_prime)?;
    Ok(ra.hypot(rb))
}

fn eigengap_from_values(eigenvalues: &[f64], a: f64) -> f64 {
    let l1 = eigenvalues[0];
    eigenvalues[1..]
        .iter()
        .map(|&lj| {
            (l1 - (1.0 + a) * lj)
                / ((1.0 + l1 * l1).sqrt() * (1.0 + (1.0 - a) * (1.0 - a) * lj * lj).sqrt())
        })
        .fold(f64::INFINITY, f64::min)
}

/// Normalized eigengap
/// `min_{j>1} (λ₁ − (1+a)λ_j) / (√(1+λ₁²)·√(1+(1−a)²λ_j²))`.
///
/// `+∞` for a one-dimensional pencil.
pub fn eigengap(pair: &MatrixPair, a: f64) -> Result<f64> {
    check_constant("a", a)?;
    let eig = gen_eig(pair)?;
    Ok(eigengap_from_values(eig.eigenvalues.as_slice().unwrap(), a))
}

fn check_constant(name: &str, x: f64) -> Result<()> {
    if !(0.0..1.0).contains(&x) {
        return Err(RifleError::InvalidInput(format!(
            "constant {name} = {x} must lie in [0, 1)"
        )));
    }
    Ok(())
}

/// Evaluates the quantities governing convergence of the truncated flow on the
/// population pencil `pair` observed with additive errors `perturb`.
///
/// `a` and `c` are the user-chosen perturbation constants: generalized
/// eigenvalues move by a factor within `1 ± a` and eigenvalues of `B` within
/// `1 ± c`. A violated gap condition is recorded in `gap_condition_holds`
/// rather than raised.
#[allow(clippy::too_many_arguments)]
pub fn theorem1_quantities(
    pair: &MatrixPair,
    perturb: (&SymMatrix, &SymMatrix),
    s: usize,
    k: usize,
    eta: f64,
    a: f64,
    c: f64,
) -> Result<TheoremQuantities> {
    check_constant("a", a)?;
    check_constant("c", c)?;
    if s == 0 || k == 0 {
        return Err(RifleError::InvalidInput("s and k must be positive".into()));
    }
    if !(eta > 0.0) {
        return Err(RifleError::InvalidInput(format!("step size {eta}")));
    }
    let (e_a, e_b) = perturb;
    check_dim(pair.dim(), e_a.dim())?;
    check_dim(pair.dim(), e_b.dim())?;

    let k_prime = 2 * k + s;
    let cr_k = cr_inf(pair, k_prime)?;
    let eps_k = epsilon_k(e_a, e_b, k_prime)?;

    let gen = gen_eig(pair)?;
    let values = gen.eigenvalues.as_slice().unwrap();
    let lambda1 = values[0];
    let lambda2 = values.get(1).copied().unwrap_or(0.0);
    let delta_lambda = eigengap_from_values(values, a);
    let gamma = (1.0 + a) * lambda2 / ((1.0 - a) * lambda1);
    let omega_k = 2.0 * eps_k / (delta_lambda * cr_k);

    let b_eig = sym_eig(pair.b())?;
    let (lambda_max_b, lambda_min_b) = (b_eig.max(), b_eig.min());
    let kappa_b = lambda_max_b / lambda_min_b;
    let c_lower = (1.0 - c) / (1.0 + c);
    let c_upper = (1.0 + c) / (1.0 - c);

    let theta = 1.0
        - (1.0 - gamma)
            / (30.0
                * (1.0 + c)
                * c_upper
                * c_upper
                * eta
                * lambda_max_b
                * kappa_b
                * kappa_b
                * (c_upper * kappa_b + gamma));
    let ratio = s as f64 / k as f64;
    let nu = (1.0 + 2.0 * (ratio.sqrt() + ratio)).sqrt()
        * (1.0
            - (1.0 + c) / 8.0 * eta * lambda_min_b * (1.0 - gamma) / (c_upper * kappa_b + gamma))
            .sqrt();

    let b = eps_k / cr_k;
    Ok(TheoremQuantities {
        s,
        k,
        k_prime,
        eta,
        cr_k,
        eps_k,
        delta_lambda,
        gamma,
        omega_k,
        theta,
        nu,
        a,
        b,
        c,
        c_lower,
        c_upper,
        kappa_b,
        lambda_max_b,
        lambda_min_b,
        lambda1,
        lambda2,
        gap_condition_holds: delta_lambda > b,
    })
}

/// Leading generalized eigenvector of `(A_F, B_F)` scattered back to `R^d`.
pub fn restricted_leading_gevec(pair: &MatrixPair, f: &IndexSet) -> Result<RestrictedGevec> {
    let sub = pair.restrict(f)?;
    let eig = gen_eig(&sub)?;
    let (lambda, w) = eig.leading();
    let v = f.embed(&w, pair.dim());
    let y = &v / norm2(&v.view());
    Ok(RestrictedGevec { v, y, lambda })
}

/// Perturbation bound for the restricted leading eigenvector on a set `f`
/// that contains the true support.
pub fn lemma3_bound(
    pair_true: &MatrixPair,
    pair_hat: &MatrixPair,
    f: &IndexSet,
) -> Result<Lemma3Bound> {
    check_dim(pair_true.dim(), pair_hat.dim())?;
    let sub_true = pair_true.restrict(f)?;
    let sub_hat = pair_hat.restrict(f)?;
    let e_a = sub_hat.a().sub(sub_true.a())?;
    let e_b = sub_hat.b().sub(sub_true.b())?;
    let delta = spectral_norm(&e_a)?.hypot(spectral_norm(&e_b)?);

    let lambda1 = gen_eig(&sub_true)?.eigenvalues[0];
    let hat = gen_eig(&sub_hat)?;
    let gap = hat
        .eigenvalues
        .iter()
        .skip(1)
        .map(|&lk| chordal_gap(lambda1, lk))
        .fold(f64::INFINITY, f64::min);
    if !(gap > 0.0) {
        return Err(RifleError::ZeroGap);
    }
    let crawford = crawford_number(&sub_hat)?;
    let bound = if delta == 0.0 {
        0.0
    } else {
        delta / (gap * crawford)
    };
    Ok(Lemma3Bound {
        delta,
        gap,
        crawford,
        bound,
        precondition_holds: delta / gap < crawford,
    })
}

/// `χ(λ, μ) = |λ − μ| / (√(1+λ²)·√(1+μ²))`.
pub fn chordal_gap(lambda: f64, mu: f64) -> f64 {
    (lambda - mu).abs() / ((1.0 + lambda * lambda).sqrt() * (1.0 + mu * mu).sqrt())
}

/// Interval that a generalized eigenvalue `lambda` of a definite pencil with
/// Crawford number `cr` can move to under a perturbation of joint size
/// `eps < cr`. Endpoints whose denominators vanish become infinite.
pub fn perturbed_eigenvalue_interval(lambda: f64, cr: f64, eps: f64) -> (f64, f64) {
    let lo_den = cr + eps * lambda;
    let hi_den = cr - eps * lambda;
    let lo = if lo_den > 0.0 {
        (lambda * cr - eps) / lo_den
    } else {
        f64::NEG_INFINITY
    };
    let hi = if hi_den > 0.0 {
        (lambda * cr + eps) / hi_den
    } else {
        f64::INFINITY
    };
    (lo, hi)
}

/// Both sides of the truncation inequality for unit `y` and unit
/// `k̄`-sparse `y_sparse`, truncating `y` to its top `k` entries:
///
/// `|trunc_k(y)ᵀy′| ≥ |yᵀy′| − √(k̄/k)·min(√(1−(yᵀy′)²), (1+√(k̄/k))(1−(yᵀy′)²))`.
///
/// Returns `(lhs, rhs)`.
pub fn truncation_inequality(
    y: &ArrayView1<f64>,
    y_sparse: &ArrayView1<f64>,
    k: usize,
) -> Result<(f64, f64)> {
    check_dim(y.len(), y_sparse.len())?;
    let k_bar = crate::linalg::count_nonzero(y_sparse) as f64;
    let (t, _) = crate::solver::truncate_top_k(y, k);
    let lhs = t.dot(y_sparse).abs();
    let inner = y.dot(y_sparse);
    let r = (k_bar / k as f64).sqrt();
    let one_minus_sq = (1.0 - inner * inner).max(0.0);
    let rhs = inner.abs() - r * one_minus_sq.sqrt().min((1.0 + r) * one_minus_sq);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_substream;
    use crate::solver::rayleigh_quotient;
    use ndarray::array;

    fn pair(a: SymMatrix, b: SymMatrix) -> MatrixPair {
        MatrixPair::new(a, b).unwrap()
    }

    fn diag(x: &[f64]) -> SymMatrix {
        SymMatrix::from_diag(x).unwrap()
    }

    fn random_pair(d: usize, seed: u64) -> MatrixPair {
        let mut rng = rng_substream(seed, 0);
        let g = Array2::from_shape_fn((d, d), |_| rng.normal());
        let a = SymMatrix::new(&g + &g.t()).unwrap();
        let h = Array2::from_shape_fn((d, d + 3), |_| rng.normal());
        let mut b = h.dot(&h.t()) / d as f64;
        for i in 0..d {
            b[[i, i]] += 0.2;
        }
        pair(a, SymMatrix::new(b).unwrap())
    }

    #[test]
    fn exhaustive_examples() {
        let sol = exhaustive_sparse_gep(&pair(diag(&[5.0, 4.0, 1.0]), SymMatrix::identity(3)), 1)
            .unwrap();
        assert_eq!(sol.support.as_slice(), &[0]);
        assert!((sol.lambda - 5.0).abs() < 1e-14);
        assert!((sol.v[0].abs() - 1.0).abs() < 1e-14);

        let sol = exhaustive_sparse_gep(&pair(diag(&[4.0, 9.0]), diag(&[1.0, 9.0])), 1).unwrap();
        assert_eq!(sol.support.as_slice(), &[0]);
        assert!((sol.lambda - 4.0).abs() < 1e-14);
    }

    #[test]
    fn exhaustive_beats_every_support() {
        let p = random_pair(10, 3);
        let sol = exhaustive_sparse_gep(&p, 2).unwrap();
        let q = rayleigh_quotient(&p, &sol.v.view()).unwrap();
        assert!((q - sol.lambda).abs() < 1e-9 * sol.lambda.abs().max(1.0));
        let mut count = 0;
        for f in supports(10, 2) {
            let lam = gen_eig(&p.restrict(&f).unwrap()).unwrap().eigenvalues[0];
            assert!(sol.lambda >= lam);
            count += 1;
        }
        assert_eq!(count, 45);
        let residual = {
            let sub = p.restrict(&sol.support).unwrap();
            let vf = sol.support.gather(&sol.v.view());
            let r = sub.a().matvec(&vf.view()) - sub.b().matvec(&vf.view()) * sol.lambda;
            norm2(&r.view())
        };
        assert!(residual <= 1e-8);
    }

    #[test]
    fn enumeration_caps() {
        let big = pair(SymMatrix::identity(21), SymMatrix::identity(21));
        assert!(matches!(
            exhaustive_sparse_gep(&big, 2),
            Err(RifleError::TooLarge { .. })
        ));
        // the full set is a single solve
        assert!(exhaustive_sparse_gep(&big, 21).is_ok());
        assert!(matches!(
            sparse_spectral_norm(big.a(), 3),
            Err(RifleError::TooLarge { .. })
        ));
        assert_eq!(check_enumeration(20, 10).unwrap(), 10);
        assert_eq!(check_enumeration(5, 9).unwrap(), 5);
        assert_eq!(binomial(20, 10), 184_756);
        assert_eq!(binomial(10, 2), 45);
    }

    #[test]
    fn all_singular_supports_are_reported() {
        let p = pair(SymMatrix::identity(3), diag(&[0.0, 0.0, 1.0]));
        let sol = exhaustive_sparse_gep(&p, 1).unwrap();
        assert_eq!(sol.skipped, 2);
        assert_eq!(sol.support.as_slice(), &[2]);
        let p = pair(SymMatrix::identity(2), SymMatrix::zeros(2));
        assert!(matches!(
            exhaustive_sparse_gep(&p, 1),
            Err(RifleError::AllSupportsSingular { size: 1 })
        ));
    }

    #[test]
    fn sparse_spectral_norm_examples() {
        let z = diag(&[3.0, -4.0, 1.0]);
        assert_eq!(sparse_spectral_norm(&z, 1).unwrap(), 4.0);
        assert_eq!(sparse_spectral_norm(&z, 2).unwrap(), 4.0);
        let swap = SymMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert!((sparse_spectral_norm(&swap, 2).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(sparse_spectral_norm(&swap, 1).unwrap(), 0.0);
    }

    #[test]
    fn crawford_examples() {
        let r2 = std::f64::consts::SQRT_2;
        let c = crawford_number(&pair(diag(&[2.0, 1.0]), SymMatrix::identity(2))).unwrap();
        assert!((c - r2).abs() < 1e-12, "{c}");
        let c = crawford_number(&pair(SymMatrix::identity(3), SymMatrix::identity(3))).unwrap();
        assert!((c - r2).abs() < 1e-12);
        let c = crawford_number(&pair(SymMatrix::identity(4), SymMatrix::identity(4).scaled(-1.0)))
            .unwrap();
        assert!((c - r2).abs() < 1e-12);

        // random-search oracle: every sampled point is at least as far as the minimum
        let mut rng = rng_substream(5, 0);
        let mut search = f64::INFINITY;
        for _ in 0..100_000 {
            let v = Array1::from(rng.normals(4));
            let v = &v / norm2(&v.view());
            let x = v.dot(&v);
            search = search.min(x.hypot(-x));
        }
        assert!((search - c).abs() < 1e-3);
    }

    #[test]
    fn crawford_is_zero_for_indefinite_pencil() {
        let p = pair(diag(&[1.0, -1.0, 0.5]), diag(&[1.0, -1.0, 0.3]));
        assert_eq!(crawford_number(&p).unwrap(), 0.0);
    }

    #[test]
    fn crawford_against_random_search() {
        let p = random_pair(4, 17);
        let cr = crawford_number(&p).unwrap();
        assert!(cr > 0.0);
        let mut rng = rng_substream(17, 1);
        let mut search = f64::INFINITY;
        for _ in 0..100_000 {
            let v = Array1::from(rng.normals(4));
            let v = &v / norm2(&v.view());
            let qa = v.dot(&p.a().matvec(&v.view()));
            let qb = v.dot(&p.b().matvec(&v.view()));
            search = search.min(qa.hypot(qb));
        }
        // grid value is a lower bound; random search is an upper bound
        assert!(cr <= search + 1e-12);
        assert!(search - cr < 5e-2, "cr {cr}, search {search}");
    }

    #[test]
    fn cr_inf_examples() {
        let r2 = std::f64::consts::SQRT_2;
        let p = pair(diag(&[2.0, 1.0]), diag(&[1.0, 1.0]));
        assert!((cr_inf(&p, 1).unwrap() - r2).abs() < 1e-12);
        let q = random_pair(5, 8);
        let full = crawford_number(&q).unwrap();
        assert!(cr_inf(&q, 5).unwrap() <= full + 1e-15);
    }

    #[test]
    fn epsilon_examples() {
        let z = SymMatrix::zeros(3);
        assert_eq!(epsilon_k(&z, &z, 2).unwrap(), 0.0);
        assert_eq!(epsilon_k(&diag(&[3.0, 0.0]), &diag(&[0.0, 4.0]), 1).unwrap(), 5.0);
    }

    #[test]
    fn eigengap_examples() {
        let g = eigengap(&pair(diag(&[2.0, 1.0]), SymMatrix::identity(2)), 0.0).unwrap();
        assert!((g - 1.0 / (5.0f64.sqrt() * 2.0f64.sqrt())).abs() < 1e-14);
        assert!((g - 0.3162).abs() < 1e-4);

        let g = eigengap(&pair(SymMatrix::identity(2), SymMatrix::identity(2)), 0.0).unwrap();
        assert_eq!(g, 0.0);

        let g = eigengap(&pair(diag(&[4.0, 1.0]), SymMatrix::identity(2)), 0.5).unwrap();
        let expected = 2.5 / (17.0f64.sqrt() * 1.25f64.sqrt());
        assert!((g - expected).abs() < 1e-14);
        assert!((g - 0.5423).abs() < 1e-4);

        assert!(eigengap(&pair(diag(&[4.0, 1.0]), SymMatrix::identity(2)), 1.0).is_err());
    }

    #[test]
    fn theorem_quantities_zero_perturbation() {
        // λ = (2, 1, 1): γ = 0.5 at a = 0, B = I so κ = 1 and λ_min(B) = 1
        let p = pair(diag(&[2.0, 1.0, 1.0]), SymMatrix::identity(3));
        let z = SymMatrix::zeros(3);
        let tq = theorem1_quantities(&p, (&z, &z), 1, 4, 0.5, 0.0, 0.0).unwrap();
        assert_eq!(tq.eps_k, 0.0);
        assert_eq!(tq.omega_k, 0.0);
        assert!((tq.gamma - 0.5).abs() < 1e-14);
        assert_eq!(tq.kappa_b, 1.0);
        assert_eq!(tq.k_prime, 9);
        let first = 2.5f64.sqrt();
        let second = (1.0f64 - 0.125 * 0.5 * (0.5 / 1.5)).sqrt();
        assert!((first - 1.5811).abs() < 1e-4);
        assert!((second - 0.98953).abs() < 1e-5);
        assert!((tq.nu - first * second).abs() < 1e-12);
        assert!((tq.nu - 1.5646).abs() < 1e-4);
        assert!(tq.gap_condition_holds);

        let tq = theorem1_quantities(&p, (&z, &z), 1, 100, 0.5, 0.0, 0.0).unwrap();
        assert!(((1.0f64 + 2.0 * (0.1 + 0.01)).sqrt() - 1.1045).abs() < 1e-4);
        assert!((tq.nu - 1.0929).abs() < 1e-4);

        // θ = 1 − (1−γ)/(30·η·λ_max·(κ + γ)) with c = 0, κ = 1
        let theta = 1.0 - 0.5 / (30.0 * 0.5 * 1.0 * 1.5);
        assert!((tq.theta - theta).abs() < 1e-14);
        assert_eq!(tq.c_lower, 1.0);
        assert_eq!(tq.c_upper, 1.0);
    }

    #[test]
    fn theorem_quantities_report_gap_violation() {
        let p = pair(diag(&[2.0, 1.9]), SymMatrix::identity(2));
        let e = SymMatrix::identity(2).scaled(0.5);
        let tq = theorem1_quantities(&p, (&e, &e), 1, 1, 0.1, 0.05, 0.05).unwrap();
        assert!(!tq.gap_condition_holds);
        assert!(tq.omega_k.is_finite());
    }

    #[test]
    fn restricted_gevec_examples() {
        let p = random_pair(5, 40);
        let full = restricted_leading_gevec(&p, &IndexSet::full(5)).unwrap();
        let ge = gen_eig(&p).unwrap();
        assert!((full.lambda - ge.eigenvalues[0]).abs() < 1e-12);
        let col = ge.eigenvectors.column(0);
        let diff = (&full.v - &col).mapv(f64::abs).sum().min((&full.v + &col).mapv(f64::abs).sum());
        assert!(diff < 1e-10);
        let r = p.a().matvec(&full.v.view()) - p.b().matvec(&full.v.view()) * full.lambda;
        assert!(norm2(&r.view()) <= 1e-8);

        let dp = pair(diag(&[3.0, 2.0, 1.0]), diag(&[1.0, 4.0, 1.0]));
        let one = restricted_leading_gevec(&dp, &IndexSet::new(vec![1])).unwrap();
        assert_eq!(one.v.mapv(f64::abs), array![0.0, 0.5, 0.0]);
        assert_eq!(one.y.mapv(f64::abs), array![0.0, 1.0, 0.0]);
        assert!((one.lambda - 0.5).abs() < 1e-15);
    }

    #[test]
    fn lemma3_examples() {
        let p = pair(diag(&[3.0, 2.0, 1.0]), SymMatrix::identity(3));
        let b = lemma3_bound(&p, &p, &IndexSet::full(3)).unwrap();
        assert_eq!(b.bound, 0.0);
        assert!(b.precondition_holds);

        let flat = pair(SymMatrix::identity(3), SymMatrix::identity(3));
        assert!(matches!(
            lemma3_bound(&flat, &flat, &IndexSet::full(3)),
            Err(RifleError::ZeroGap)
        ));
    }

    #[test]
    fn interval_contains_unperturbed_value() {
        let (lo, hi) = perturbed_eigenvalue_interval(2.0, 1.0, 0.0);
        assert_eq!((lo, hi), (2.0, 2.0));
        let (lo, hi) = perturbed_eigenvalue_interval(2.0, 1.0, 0.1);
        assert!(lo < 2.0 && hi > 2.0);
        let (_, hi) = perturbed_eigenvalue_interval(20.0, 1.0, 0.1);
        assert_eq!(hi, f64::INFINITY);
    }

    #[test]
    fn truncation_inequality_simple_case() {
        let y = array![0.8, 0.6, 0.0];
        let (lhs, rhs) = truncation_inequality(&y.view(), &array![1.0, 0.0, 0.0].view(), 1).unwrap();
        assert!((lhs - 0.8).abs() < 1e-15);
        assert!(lhs >= rhs);
    }
}
