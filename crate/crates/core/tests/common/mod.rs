#![allow(dead_code)]

use ndarray::{Array1, Array2};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

use rifle::{MatrixPair, SymMatrix};

pub fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..Config::default()
    }
}

pub fn square(d: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(-1.0f64..1.0, d * d)
        .prop_map(move |v| Array2::from_shape_vec((d, d), v).unwrap())
}

pub fn symmetric(d: usize) -> impl Strategy<Value = SymMatrix> {
    square(d).prop_map(|g| SymMatrix::new((&g + &g.t()) * 0.5).unwrap())
}

/// `GGᵀ/d + floor·I`, so the smallest eigenvalue is at least `floor`.
pub fn positive_definite(d: usize, floor: f64) -> impl Strategy<Value = SymMatrix> {
    square(d).prop_map(move |g| {
        let mut m = g.dot(&g.t()) / d as f64;
        for i in 0..d {
            m[[i, i]] += floor;
        }
        SymMatrix::new(m).unwrap()
    })
}

pub fn definite_pair(d: usize) -> impl Strategy<Value = MatrixPair> {
    (symmetric(d), positive_definite(d, 0.3))
        .prop_map(|(a, b)| MatrixPair::new(a, b).unwrap())
}

pub fn unit_vector(d: usize) -> impl Strategy<Value = Array1<f64>> {
    prop::collection::vec(-1.0f64..1.0, d)
        .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
        .prop_map(|v| {
            let v = Array1::from(v);
            let norm = v.dot(&v).sqrt();
            v / norm
        })
}

/// Unit vector with at most `s` nonzeros placed at the given coordinates.
pub fn sparse_unit_vector(d: usize, s: usize) -> impl Strategy<Value = Array1<f64>> {
    (
        proptest::sample::subsequence((0..d).collect::<Vec<_>>(), 1..=s),
        prop::collection::vec(0.1f64..1.0, s),
        prop::collection::vec(any::<bool>(), s),
    )
        .prop_map(move |(idx, mags, signs)| {
            let mut v = Array1::zeros(d);
            for (j, &i) in idx.iter().enumerate() {
                v[i] = if signs[j] { mags[j] } else { -mags[j] };
            }
            let norm = v.dot(&v).sqrt();
            v / norm
        })
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
