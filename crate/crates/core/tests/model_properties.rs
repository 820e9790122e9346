mod common;

use common::{config, unit_vector};
use ndarray::{s, Array2};
use proptest::prelude::*;

use rifle::harness::{cross_validate_k, CvData, FitSettings};
use rifle::linalg::sym_eig;
use rifle::models::{
    cca_build, direction_error, scatter_matrices, sir_build, LabeledDataset, PairedDataset,
    SlicedDataset,
};
use rifle::rng::rng_substream;
use rifle::sim::{gen_cca, gen_fda_binary};

fn data_matrix(n: usize, d: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(-3.0f64..3.0, n * d)
        .prop_map(move |v| Array2::from_shape_vec((n, d), v).unwrap())
}

fn labeled() -> impl Strategy<Value = LabeledDataset> {
    (2usize..=4, 1usize..=6, 0usize..=20).prop_flat_map(|(k, d, extra)| {
        let n = k + extra;
        (data_matrix(n, d), prop::collection::vec(0..k, extra)).prop_map(move |(x, tail)| {
            // the first k rows cover every class
            let labels: Vec<usize> = (0..k).chain(tail).collect();
            LabeledDataset::with_classes(x, labels, k).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn scatter_matrices_split_the_second_moment(data in labeled()) {
        let (sw, sb) = scatter_matrices(&data).unwrap();
        let x = data.x();
        let gram = x.t().dot(&x) / data.n() as f64;
        let diff = (sw.as_array() + sb.as_array() - &gram).mapv(|v| v * v).sum().sqrt();
        let scale = gram.mapv(|v| v * v).sum().sqrt().max(1e-300);
        prop_assert!(diff <= 1e-10 * scale);
    }

    #[test]
    fn direction_error_is_symmetric_and_sign_blind(
        (u, w) in (1usize..=10).prop_flat_map(|d| (unit_vector(d), unit_vector(d)))
    ) {
        let e = direction_error(&u.view(), &w.view()).unwrap();
        prop_assert_eq!(e, direction_error(&w.view(), &u.view()).unwrap());
        prop_assert_eq!(e, direction_error(&(-&u).view(), &w.view()).unwrap());
        prop_assert!((0.0..=2.0).contains(&e));
    }

    #[test]
    fn canonical_pencil_is_block_structured(
        (x, y) in (3usize..=20, 1usize..=4, 1usize..=4)
            .prop_flat_map(|(n, dx, dy)| (data_matrix(n, dx), data_matrix(n, dy)))
    ) {
        let (dx, dy) = (x.ncols(), y.ncols());
        let problem = cca_build(&PairedDataset::new(x, y).unwrap()).unwrap();
        let a = problem.pair.a().as_array();
        let b = problem.pair.b().as_array();
        prop_assert!(a.slice(s![..dx, ..dx]).iter().all(|v| *v == 0.0));
        prop_assert!(a.slice(s![dx.., dx..]).iter().all(|v| *v == 0.0));
        prop_assert!(b.slice(s![..dx, dx..]).iter().all(|v| *v == 0.0));
        prop_assert!(b.slice(s![dx.., ..dx]).iter().all(|v| *v == 0.0));
        prop_assert_eq!(a.dim(), (dx + dy, dx + dy));
    }

    #[test]
    fn sliced_covariance_is_positive_semidefinite(data in labeled()) {
        let sliced = SlicedDataset::categorical(data.x().to_owned(), data.labels().to_vec()).unwrap();
        let problem = sir_build(&sliced).unwrap();
        prop_assert!(sym_eig(problem.pair.a()).unwrap().min() >= -1e-8);
    }
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn scenarios_regenerate_identically(seed in any::<u64>(), n in 2usize..=30) {
        let a = gen_fda_binary(50, n, &mut rng_substream(seed, 3)).unwrap();
        let b = gen_fda_binary(50, n, &mut rng_substream(seed, 3)).unwrap();
        prop_assert_eq!(a, b);
        let a = gen_cca(50, n, &mut rng_substream(seed, 4)).unwrap();
        let b = gen_cca(50, n, &mut rng_substream(seed, 4)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn cross_validation_picks_from_the_grid(
        seed in any::<u64>(),
        grid in proptest::sample::subsequence(vec![1usize, 2, 3, 5, 8], 1..=5),
    ) {
        let data = gen_fda_binary(50, 15, &mut rng_substream(seed, 0)).unwrap().data;
        let settings = FitSettings { max_iter: 200, ..FitSettings::default() };
        let cv = cross_validate_k(CvData::Fda(&data), &grid, 3, &settings, &mut rng_substream(seed, 1)).unwrap();
        prop_assert!(grid.contains(&cv.selected_k));
        let best = cv.mean_scores.iter().copied().fold(f64::INFINITY, f64::min);
        if grid.len() > 1 {
            let first_best = grid[cv.mean_scores.iter().position(|s| *s == best).unwrap()];
            prop_assert_eq!(cv.selected_k, first_best);
        }
    }
}
