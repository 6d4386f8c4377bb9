use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectra::projective::{
    contraction_constants, delta_spanning_check, f_translation, find_mixing_word, hilbert_distance, non_expansion,
    power_support, proj_distance, to_dense, trichotomy, word_support, ProjectiveVector,
};
use spectra::spectrum::{compute_delta, enumerate_patch};
use spectra::transition::{build_digit_matrices, golden_matrices, DigitMatrices, MeasureModel};
use spectra::NumberField;

fn pv(v: &[f64]) -> ProjectiveVector {
    ProjectiveVector::from_vector(v).unwrap()
}

fn digit_family(p: &str) -> (spectra::spectrum::DeltaSet, DigitMatrices) {
    let f = NumberField::from_text(p).unwrap();
    let delta = compute_delta(&f).unwrap();
    let mats = build_digit_matrices(&delta).unwrap();
    (delta, mats)
}

fn row_times(u: &[f64], a: &[Vec<f64>]) -> Vec<f64> {
    (0..a[0].len()).map(|j| u.iter().zip(a).map(|(x, r)| x * r[j]).sum()).collect()
}

#[test]
fn mixing_words_verify() {
    for p in ["x^2-x-1", "x^3-x^2-x-1"] {
        let (delta, mats) = digit_family(p);
        let mw = find_mixing_word(&mats, &delta).unwrap();
        assert!(mw.word.len() <= 40 * delta.len());
        let (rows, cols) = trichotomy(&word_support(&mats, &mw.word).unwrap()).unwrap();
        assert_eq!(rows, mw.zero_rows);
        assert_eq!(cols, mw.zero_cols);
        assert!(!rows.contains(&0) && !cols.contains(&0));
        for i in 0..mats.dim() {
            for j in 0..mats.dim() {
                let zero = rows.contains(&i) || cols.contains(&j);
                assert_eq!(mw.product[i][j] == 0.0, zero, "{p}: ({i}, {j})");
            }
        }
    }
}

#[test]
fn golden_mixing_word_uses_zero_runs() {
    let (delta, mats) = digit_family("x^2-x-1");
    let w = find_mixing_word(&mats, &delta).unwrap().word;
    assert!(w.windows(2).any(|p| p == [0, 0]), "{w:?}");
}

#[test]
fn mixing_word_contracts() {
    for p in ["x^2-x-1", "x^3-x^2-x-1"] {
        let (delta, mats) = digit_family(p);
        let mw = find_mixing_word(&mats, &delta).unwrap();
        let cc = contraction_constants(&mw, 10_000, 0).unwrap();
        assert!(cc.c2 < 1.0 && cc.c2 > 0.0, "{p}: {cc:?}");
        assert!(cc.c1.is_finite() && cc.c1 > 0.0);
        assert!(cc.c2_birkhoff < 1.0);

        // iterating A_w pulls two vectors together at the certified rate
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut u: Vec<f64> = (0..mats.dim()).map(|_| rng.random_range(0.1..10.0)).collect();
        let mut v: Vec<f64> = (0..mats.dim()).map(|_| rng.random_range(0.1..10.0)).collect();
        let d0 = proj_distance(&pv(&u), &pv(&v));
        let steps = ((d0 / 1e-8).ln() / (1.0 / cc.c2).ln()).ceil() as usize;
        for _ in 0..steps.max(1) {
            u = row_times(&u, &mw.product);
            v = row_times(&v, &mw.product);
            let s = u[0];
            u.iter_mut().for_each(|x| *x /= s);
            let s = v[0];
            v.iter_mut().for_each(|x| *x /= s);
        }
        assert!(proj_distance(&pv(&u), &pv(&v)) < 1e-8, "{p}");
    }
}

#[test]
fn contraction_sampling_is_reproducible() {
    let (delta, mats) = digit_family("x^2-x-1");
    let mw = find_mixing_word(&mats, &delta).unwrap();
    let a = contraction_constants(&mw, 500, 42).unwrap();
    let b = contraction_constants(&mw, 500, 42).unwrap();
    assert_eq!((a.c1, a.c2), (b.c1, b.c2));
}

/// M_0^n never has the zero-row / zero-column / positive pattern: T_{−1}
/// fixes φ, so the row of φ never vanishes, yet φ never reaches 0 under digit 0.
#[test]
fn no_power_of_the_golden_m0_is_mixing() {
    let f = NumberField::from_text("x^2-x-1").unwrap();
    let m = golden_matrices(&f).unwrap();
    let a = digit_family("x^2-x-1").1;
    for n in 1..=40 {
        for mat in [m.get(0).unwrap(), a.get(0).unwrap()] {
            assert!(trichotomy(&power_support(mat, n)).is_none(), "n = {n}");
            assert!(trichotomy(&power_support(&mat.transpose(), n)).is_none(), "n = {n}");
        }
    }
}

#[test]
fn ratio_metric_can_expand_under_a_single_matrix() {
    // d((UA)', (VA)') ≈ 2·d(U', V') for this A with positive top-left entry
    let e = std::f64::consts::E;
    let eps = 1e-6;
    let a = vec![vec![eps, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]];
    let (u, v) = (vec![1.0, 1.0, 1.0], vec![1.0, e, 1.0 / e]);
    let before = proj_distance(&pv(&u), &pv(&v));
    let after = proj_distance(&pv(&row_times(&u, &a)), &pv(&row_times(&v, &a)));
    assert!((before - 1.0).abs() < 1e-12);
    assert!(after > 1.99);
    assert!(hilbert_distance(&row_times(&u, &a), &row_times(&v, &a)) <= hilbert_distance(&u, &v) + 1e-12);
}

#[test]
fn single_digit_matrices_do_not_expand_the_hilbert_metric() {
    for p in ["x^2-x-1", "x^3-x^2-x-1"] {
        let mats = digit_family(p).1;
        let report = non_expansion(&mats, 10_000, 0).unwrap();
        assert_eq!(report.hilbert_violations, [0, 0, 0], "{p}");
        // the ratio metric itself is expanded on a sizeable fraction of pairs
        assert!(!report.holds() && report.worst_ratio <= 2.0 + 1e-9, "{p}: {report:?}");
    }
}

#[test]
fn translation_ratios() {
    let f = NumberField::from_text("x^2-x-1").unwrap();
    let m = MeasureModel::new(&f, 1e-13).unwrap();
    assert_eq!(f_translation(&m.spectral, &m.matrices, &[1, 0, -1], 0).unwrap(), 0.0);
    // φ² coded as 100 and as 011
    for j in 0..m.delta.len() {
        let a = f_translation(&m.spectral, &m.matrices, &[1, 0, 0], j);
        let b = f_translation(&m.spectral, &m.matrices, &[0, 1, 1], j);
        match (a, b) {
            (Ok(a), Ok(b)) => assert!((a - b).abs() < 1e-10),
            (Err(_), Err(_)) => {}
            other => panic!("codings disagree at {j}: {other:?}"),
        }
    }
}

#[test]
fn local_vectors_behind_two_mixing_words_are_close() {
    let (delta, mats) = digit_family("x^2-x-1");
    let f = NumberField::from_text("x^2-x-1").unwrap();
    let m = MeasureModel::new(&f, 1e-13).unwrap();
    let mw = find_mixing_word(&mats, &delta).unwrap();
    let cc = contraction_constants(&mw, 10_000, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let suffix = [mw.word.clone(), mw.word.clone()].concat();
    for _ in 0..200 {
        let mut code = || {
            let len = rng.random_range(0..7);
            let mut w: Vec<i64> = (0..len).map(|_| rng.random_range(-1..=1)).collect();
            w.extend(&suffix);
            w
        };
        let (a, b) = (code(), code());
        let (u, v) = (m.local_vector(&a).unwrap(), m.local_vector(&b).unwrap());
        assert!(proj_distance(&pv(&u), &pv(&v)) <= cc.c1 * cc.c2);
    }
}

#[test]
fn delta_spans_the_patches() {
    for p in ["x^2-x-1", "x^3-x^2-x-1"] {
        let f = NumberField::from_text(p).unwrap();
        let delta = compute_delta(&f).unwrap();
        assert!(delta.index_of(&f.apply_t(1, &f.zero()).unwrap()).is_some());
        assert!(delta_spanning_check(&delta, &enumerate_patch(&f, 2.0).unwrap()).unwrap());
    }
}

#[test]
fn dense_matches_sparse() {
    let mats = digit_family("x^2-x-1").1;
    let d = to_dense(mats.get(1).unwrap());
    for (i, row) in d.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            assert_eq!(x, mats.get(1).unwrap().get(i, j) as f64);
        }
    }
}

fn vector() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..100.0], 4).prop_map(|mut v| {
        v.insert(0, 1.0);
        v
    })
}

proptest! {
    #[test]
    fn distance_is_symmetric(u in vector(), v in vector()) {
        prop_assert_eq!(proj_distance(&pv(&u), &pv(&v)), proj_distance(&pv(&v), &pv(&u)));
        prop_assert_eq!(proj_distance(&pv(&u), &pv(&u)), 0.0);
    }

    #[test]
    fn triangle_inequality(u in vector(), v in vector(), w in vector()) {
        let (a, b, c) = (pv(&u), pv(&v), pv(&w));
        prop_assert!(proj_distance(&a, &c) <= proj_distance(&a, &b) + proj_distance(&b, &c) + 1e-12);
    }

    #[test]
    fn distance_ignores_scale(u in vector(), v in vector(), s in 0.001f64..1000.0) {
        let scaled: Vec<f64> = u.iter().map(|x| x * s).collect();
        let (d1, d2) = (proj_distance(&pv(&u), &pv(&v)), proj_distance(&pv(&scaled), &pv(&v)));
        prop_assert!(d1 == d2 || (d1 - d2).abs() < 1e-9);
    }
}
