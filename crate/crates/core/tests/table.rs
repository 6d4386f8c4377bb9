use proptest::prelude::*;
use spectra::measure_analysis::{
    exact_rowsum_identity, g_beta, integral_g_beta, interval, table1_pipeline, wasserstein1, wasserstein1_rescaled,
    DiscreteMeasure, TABLE1_POLYNOMIALS,
};
use spectra::transition::{perron_limit, TransitionMatrix};
use spectra::NumberField;

/// Reference rows: matrix size, dimension bound, W1 on [−1, 1].
const REFERENCE: [(usize, f64, f64); 13] = [
    (7, 0.96422, 0.13925),
    (51, 0.999116, 0.0547178),
    (181, 0.99999, 0.0286671),
    (9, 0.973329, 0.187067),
    (1257, 0.999989, 0.0149032),
    (11, 0.983565, 0.222569),
    (745, 0.982269, 0.0803806),
    (951, 0.995758, 0.0246573),
    (339, 0.993043, 0.0356598),
    (351, 0.982434, 0.0571201),
    (5423, 0.999982, 0.00782515),
    (847, 0.999862, 0.0195581),
    (2651, 0.999833, 0.00890312),
];

#[test]
fn table_rows_reproduce() {
    let rows = table1_pipeline(&TABLE1_POLYNOMIALS, 1e-12);
    for ((p, row), (size, bound, w1)) in TABLE1_POLYNOMIALS.iter().zip(rows).zip(REFERENCE) {
        let r = row.unwrap();
        assert_eq!(r.matrix_size, size, "{p}");
        assert!((r.bound - bound).abs() < 1e-3, "{p}: bound {}", r.bound);
        assert!((r.w1 - w1).abs() < 1e-3, "{p}: w1 {}", r.w1);
        assert!(r.bound > 0.0 && r.bound <= 1.0 && r.w1 >= 0.0);
        assert!((2.0..4.0).contains(&r.lambda));
    }
}

#[test]
fn row_sum_identity_for_every_table_field() {
    for p in TABLE1_POLYNOMIALS {
        let f = NumberField::from_text(p).unwrap();
        let id = exact_rowsum_identity(&f, 1e-13).unwrap();
        assert!(id.row_sums_match, "{p}");
        assert!(id.residual < 1e-9, "{p}: {}", id.residual);
    }
}

#[test]
fn g_integrates_to_four_over_beta() {
    for p in TABLE1_POLYNOMIALS {
        let f = NumberField::from_text(p).unwrap();
        assert!((integral_g_beta(&f) - 4.0 / f.beta()).abs() < 1e-12);
        // a midpoint Riemann sum agrees with the exact integral
        let (lo, hi) = interval(&f);
        let n = 200_000;
        let h = (hi - lo) / n as f64;
        let sum: f64 = (0..n).map(|i| g_beta(&f, lo + (i as f64 + 0.5) * h) as f64).sum::<f64>() / n as f64;
        assert!((sum - 4.0 / f.beta()).abs() < 1e-4, "{p}");
    }
}

#[test]
fn single_atom_distances() {
    let m = DiscreteMeasure::new(vec![(0.0, 1.0)], -1.0, 1.0).unwrap();
    assert!((wasserstein1(&m, -1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
    let m = DiscreteMeasure::new(vec![(0.0, 1.0)], -2.0, 2.0).unwrap();
    assert!((wasserstein1(&m, -2.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
    assert!((wasserstein1_rescaled(&m, -2.0, 2.0).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn fine_grid_approaches_uniform() {
    let n = 1000;
    let atoms = (0..n).map(|i| (-1.0 + (2 * i + 1) as f64 / n as f64, 1.0)).collect();
    let m = DiscreteMeasure::new(atoms, -1.0, 1.0).unwrap();
    // each of n cells contributes 2·(1/2)·(1/n)·(1/(2n))
    assert!((wasserstein1(&m, -1.0, 1.0).unwrap() - 1.0 / (2.0 * n as f64)).abs() < 1e-12);
}

/// ρ = Σ_i p_i·r_i for the Perron probability vector p and row sums r.
#[test]
fn perron_row_sum_identity_on_a_small_matrix() {
    // index 0 dominates, as the Perron routine requires
    let rows = vec![
        vec![(0, 5), (1, 1), (3, 2)],
        vec![(0, 3), (2, 1)],
        vec![(0, 2), (1, 2), (2, 1), (4, 1)],
        vec![(0, 4), (3, 1), (4, 2)],
        vec![(0, 2), (2, 1), (4, 1)],
    ];
    let index = (0..5).map(|i| spectra::LatticePoint(vec![i])).collect();
    let m = TransitionMatrix::from_rows(rows, index).unwrap();
    let spec = perron_limit(&m, 1e-14).unwrap();
    let rhs: f64 = spec.probability().iter().enumerate().map(|(i, p)| p * m.row_sum(i) as f64).sum();
    assert!((spec.lambda - rhs).abs() < 1e-12);
}

fn measure_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::btree_map(-1000i32..1000, 0.01f64..10.0, 1..40)
        .prop_map(|m| m.into_iter().map(|(k, w)| (k as f64 / 1000.0, w)).collect())
}

proptest! {
    #[test]
    fn reflection_leaves_w1_unchanged(atoms in measure_strategy()) {
        let m = DiscreteMeasure::new(atoms, -1.0, 1.0).unwrap();
        let a = wasserstein1(&m, -1.0, 1.0).unwrap();
        let b = wasserstein1(&m.reflected(), -1.0, 1.0).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn cdf_is_a_distribution_function(atoms in measure_strategy(), ts in prop::collection::vec(-1.5f64..1.5, 2..20)) {
        let m = DiscreteMeasure::new(atoms, -1.0, 1.0).unwrap();
        prop_assert!((m.cdf(1.0) - 1.0).abs() < 1e-12);
        let mut ts = ts;
        ts.sort_by(f64::total_cmp);
        let values: Vec<f64> = ts.iter().map(|&t| m.cdf(t)).collect();
        prop_assert!(values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn smaller_growth_gives_larger_bound(beta in 1.05f64..1.99, l1 in 2.0f64..3.99, l2 in 2.0f64..3.99) {
        let bound = |l: f64| (4f64.ln() - l.ln()) / beta.ln();
        let (lo, hi) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
        prop_assert!(bound(lo) >= bound(hi));
    }
}
