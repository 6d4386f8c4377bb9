use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectra::measure_analysis::restricted_measure;
use spectra::spectrum::{code_of, compute_v_interval, enumerate_patch, point_of_code};
use spectra::transition::{build_m0_pisot, perron_limit, MeasureModel};
use spectra::{LatticePoint, NumberField};

fn model(p: &str) -> MeasureModel {
    MeasureModel::new(&NumberField::from_text(p).unwrap(), 1e-13).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

#[test]
fn stationarity_under_l() {
    for p in ["x^2-x-1", "x^3-x^2-x-1"] {
        let m = model(p);
        let f = m.field().clone();
        let lambda = m.spectral.lambda;
        let patch = enumerate_patch(&f, 2.0).unwrap();
        for x in patch.points() {
            let pre = |i: i64| m.measure_of_point(&f.apply_t_inverse(i, x).unwrap()).unwrap();
            let lhs = (pre(-1) + 2.0 * pre(0) + pre(1)) / lambda;
            let mu = m.measure_of_point(x).unwrap();
            assert!(rel(lhs, mu) < 1e-9, "{p}: x = {x}: {lhs} vs {mu}");
        }
    }
}

#[test]
fn perron_limit_converges() {
    for p in ["x^2-x-1", "x^3-x^2-x-1"] {
        let m = model(p);
        assert!(m.spectral.step < 1e-9);
        assert!(m.spectral.residual < 1e-9);
        assert!(m.spectral.lambda < 4.0 && m.spectral.lambda >= 2.0);
        let max = m.spectral.w.iter().cloned().fold(0.0, f64::max);
        assert_eq!(max, m.spectral.w[0]);
    }
}

/// Words of length ≤ 8 grouped by the point they code.
fn codings(f: &NumberField) -> BTreeMap<LatticePoint, Vec<Vec<i64>>> {
    let mut out: BTreeMap<LatticePoint, Vec<Vec<i64>>> = BTreeMap::new();
    let mut words = vec![vec![]];
    for _ in 0..8 {
        words = words.into_iter().flat_map(|w: Vec<i64>| [-1, 0, 1].map(|c| [w.clone(), vec![c]].concat())).collect();
        for w in &words {
            out.entry(point_of_code(f, w).unwrap()).or_default().push(w.clone());
        }
    }
    out
}

#[test]
fn coding_invariance_on_random_pairs() {
    let m = model("x^2-x-1");
    let groups: Vec<Vec<Vec<i64>>> = codings(m.field()).into_values().filter(|g| g.len() > 1).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let g = groups.choose(&mut rng).unwrap();
        let a = g.choose(&mut rng).unwrap();
        let b = g.iter().find(|w| *w != a).unwrap();
        let (ma, mb) = (m.measure_at(a).unwrap(), m.measure_at(b).unwrap());
        assert!(rel(ma, mb) < 1e-10, "{a:?} vs {b:?}");
    }
}

#[test]
fn golden_ratio_identity_codings_agree() {
    let m = model("x^2-x-1");
    // φ² = φ + 1
    let a = m.measure_at(&[1, 0, 0]).unwrap();
    let b = m.measure_at(&[0, 1, 1]).unwrap();
    assert!(rel(a, b) < 1e-10);
    // leading zeros change nothing
    assert!(rel(m.measure_at(&[0, 0, 0, 1]).unwrap(), m.measure_at(&[1]).unwrap()) < 1e-12);
    assert!(rel(m.measure_at(&[0; 5]).unwrap(), m.spectral.mu0) < 1e-12);
}

#[test]
fn local_vector_entries_are_translates() {
    let m = model("x^2-x-1");
    let f = m.field().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 100 {
        let len = rng.random_range(1..9);
        let word: Vec<i64> = (0..len).map(|_| rng.random_range(-1..=1)).collect();
        let x = point_of_code(&f, &word).unwrap();
        let j = rng.random_range(0..m.delta.len());
        let y = x.checked_add(&m.delta.elements()[j]).unwrap();
        let Some(code) = code_of(&f, &y).unwrap() else { continue };
        let v = m.local_vector(&word).unwrap();
        assert!(rel(v[j], m.measure_at(&code).unwrap()) < 1e-10, "x = {x}, j = {j}");
        checked += 1;
    }
}

#[test]
fn total_mass_keeps_growing() {
    let m = model("x^2-x-1");
    let f = m.field().clone();
    let masses: Vec<f64> = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&r| {
            let patch = enumerate_patch(&f, r).unwrap();
            patch.points().iter().map(|x| m.measure_of_point(x).unwrap()).sum()
        })
        .collect();
    assert!(masses.windows(2).all(|w| w[1] > w[0]), "{masses:?}");
    assert!(masses[3] > 10.0 * m.spectral.mu0);
}

#[test]
fn restricted_measure_is_symmetric_with_peak_at_zero() {
    for p in ["x^2-x-1", "x^3-x^2-x-1"] {
        let f = NumberField::from_text(p).unwrap();
        let v = compute_v_interval(&f).unwrap();
        let spec = perron_limit(&build_m0_pisot(&f, &v).unwrap(), 1e-13).unwrap();
        let p = spec.probability();
        for (i, x) in v.iter().enumerate() {
            let j = v.iter().position(|y| *y == x.neg()).unwrap();
            assert!((p[i] - p[j]).abs() < 1e-12);
            assert!(p[i] <= p[0]);
        }
        let m = restricted_measure(&f, &v, &spec).unwrap();
        assert!((m.cdf(f64::INFINITY) - 1.0).abs() < 1e-12);
    }
}
