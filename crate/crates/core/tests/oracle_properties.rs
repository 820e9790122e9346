mod common;

use common::{config, definite_pair, rel_close, sparse_unit_vector, symmetric, unit_vector};
use proptest::prelude::*;

use rifle::linalg::{gen_eig, spectral_norm};
use rifle::oracle::{
    crawford_number, exhaustive_sparse_gep, perturbed_eigenvalue_interval, sparse_spectral_norm,
    truncation_inequality,
};
use rifle::MatrixPair;

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn full_cardinality_matches_leading_pair(pair in (1usize..=7).prop_flat_map(definite_pair)) {
        let sol = exhaustive_sparse_gep(&pair, pair.dim()).unwrap();
        let leading = gen_eig(&pair).unwrap().eigenvalues[0];
        prop_assert!(rel_close(sol.lambda, leading, 1e-9));
    }

    #[test]
    fn sparse_norm_grows_with_cardinality_up_to_the_spectral_norm(
        z in (1usize..=8).prop_flat_map(symmetric)
    ) {
        let d = z.dim();
        let values: Vec<f64> = (1..=d).map(|s| sparse_spectral_norm(&z, s).unwrap()).collect();
        for w in values.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12);
        }
        prop_assert!(rel_close(values[d - 1], spectral_norm(&z).unwrap(), 1e-9));
    }

    #[test]
    fn sparse_norm_is_absolutely_homogeneous(
        (z, s) in (1usize..=8).prop_flat_map(|d| (symmetric(d), 1..=d)),
        c in -5.0f64..5.0,
    ) {
        let base = sparse_spectral_norm(&z, s).unwrap();
        let scaled = sparse_spectral_norm(&z.scaled(c), s).unwrap();
        prop_assert!(rel_close(scaled, c.abs() * base, 1e-12));
    }

    #[test]
    fn perturbed_eigenvalues_stay_in_interval(
        (pair, ea, eb) in (2usize..=6).prop_flat_map(|d| (definite_pair(d), symmetric(d), symmetric(d))),
        fraction in 0.0f64..1.0,
    ) {
        let cr = crawford_number(&pair).unwrap();
        let size = spectral_norm(&ea).unwrap().hypot(spectral_norm(&eb).unwrap());
        prop_assume!(cr > 0.0 && size > 0.0);
        let scale = fraction * cr / size;
        let (ea, eb) = (ea.scaled(scale), eb.scaled(scale));
        let eps = spectral_norm(&ea).unwrap().hypot(spectral_norm(&eb).unwrap());
        prop_assume!(eps < cr);
        let moved = MatrixPair::new(pair.a().add(&ea).unwrap(), pair.b().add(&eb).unwrap()).unwrap();
        let before = gen_eig(&pair).unwrap().eigenvalues;
        let after = gen_eig(&moved).unwrap().eigenvalues;
        for k in 0..pair.dim() {
            let (lo, hi) = perturbed_eigenvalue_interval(before[k], cr, eps);
            prop_assert!(
                after[k] >= lo - 1e-9 && after[k] <= hi + 1e-9,
                "eigenvalue {} moved to {} outside [{lo}, {hi}] at eps/cr = {}",
                before[k], after[k], eps / cr
            );
        }
    }

    #[test]
    fn crawford_number_is_below_every_field_value(pair in (1usize..=5).prop_flat_map(definite_pair)) {
        let cr = crawford_number(&pair).unwrap();
        let mut rng = rifle::rng::rng_substream(pair.dim() as u64, cr.to_bits());
        for _ in 0..10_000 {
            let v = ndarray::Array1::from(rng.normals(pair.dim()));
            let v = &v / v.dot(&v).sqrt();
            let qa = v.dot(&pair.a().matvec(&v.view()));
            let qb = v.dot(&pair.b().matvec(&v.view()));
            prop_assert!(cr <= qa.hypot(qb) + 1e-12);
        }
    }
}

/// Truncation levels at least the sparsity of the reference vector.
fn truncation_case() -> impl Strategy<Value = (ndarray::Array1<f64>, ndarray::Array1<f64>, usize)> {
    (2usize..=30).prop_flat_map(|d| {
        (1..=d).prop_flat_map(move |s| {
            (unit_vector(d), sparse_unit_vector(d, s), 0.0f64..3.0, s..=d)
                .prop_map(|(noise, sparse, weight, k)| {
                    let y = &sparse * weight + &noise;
                    let y = &y / y.dot(&y).sqrt();
                    (y, sparse, k)
                })
        })
    })
}

proptest! {
    #![proptest_config(config(500))]

    #[test]
    fn truncation_keeps_enough_correlation((y, sparse, k) in truncation_case()) {
        let (lhs, rhs) = truncation_inequality(&y.view(), &sparse.view(), k).unwrap();
        prop_assert!(lhs >= rhs - 1e-12, "{lhs} < {rhs}");
    }
}

#[test]
fn truncation_bound_can_fail_below_the_reference_sparsity() {
    let y = ndarray::array![-0.887545729480787, -0.4607196306653511];
    let reference = ndarray::array![1.0, 1.0] / 2f64.sqrt();
    let (lhs, rhs) = truncation_inequality(&y.view(), &reference.view(), 1).unwrap();
    assert!(lhs < rhs - 1e-3, "{lhs} vs {rhs}");
}
