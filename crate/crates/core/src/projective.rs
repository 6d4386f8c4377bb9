//! The projective log-metric on local vectors, mixing words, contraction
//! constants, and the translation ratios f_j.

use std::collections::{HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebraic::LatticePoint;
use crate::error::{Result, SpectraError};
use crate::spectrum::{DeltaSet, SpectrumPatch, DIGITS};
use crate::transition::{local_vector, DigitMatrices, SpectralData, TransitionMatrix};

/// Longest connector word the mixing-word search will try.
pub const CONNECTOR_CAP: usize = 40;
/// Multiplier applied to sampled suprema.
pub const SAFETY_FACTOR: f64 = 1.05;

/// A vector with positive first entry, seen through its ratios to that entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveVector {
    ratios: Vec<f64>,
}

impl ProjectiveVector {
    pub fn from_vector(v: &[f64]) -> Result<Self> {
        match v.first() {
            Some(&first) if first > 0.0 => {
                if v.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                    return Err(SpectraError::InvalidArgument("entries must be finite and ≥ 0".into()));
                }
                Ok(Self { ratios: v[1..].iter().map(|x| x / first).collect() })
            }
            _ => Err(SpectraError::InvalidArgument("first entry must be positive".into())),
        }
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }
}

/// max_i |ln V_i − ln U_i|, with ln 0 − ln 0 = 0 and ∞ when exactly one side vanishes.
pub fn proj_distance(u: &ProjectiveVector, v: &ProjectiveVector) -> f64 {
    u.ratios
        .iter()
        .zip(&v.ratios)
        .map(|(&a, &b)| match (a > 0.0, b > 0.0) {
            (false, false) => 0.0,
            (true, true) => (b.ln() - a.ln()).abs(),
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

/// Hilbert projective distance max_i ln(V_i/U_i) − min_i ln(V_i/U_i) for
/// vectors with a common zero pattern; ∞ otherwise.
pub fn hilbert_distance(u: &[f64], v: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&a, &b) in u.iter().zip(v) {
        match (a > 0.0, b > 0.0) {
            (false, false) => {}
            (true, true) => {
                let r = b.ln() - a.ln();
                lo = lo.min(r);
                hi = hi.max(r);
            }
            _ => return f64::INFINITY,
        }
    }
    if hi < lo {
        0.0
    } else {
        hi - lo
    }
}

fn distance_of(u: &[f64], v: &[f64]) -> Result<f64> {
    Ok(proj_distance(&ProjectiveVector::from_vector(u)?, &ProjectiveVector::from_vector(v)?))
}

/// Row vector times a dense matrix.
fn vec_mat(u: &[f64], a: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; a.first().map_or(0, Vec::len)];
    for (ui, row) in u.iter().zip(a) {
        if *ui != 0.0 {
            for (o, aij) in out.iter_mut().zip(row) {
                *o += ui * aij;
            }
        }
    }
    out
}

pub fn to_dense(m: &TransitionMatrix) -> Vec<Vec<f64>> {
    (0..m.dim())
        .map(|i| {
            let mut row = vec![0.0; m.dim()];
            for &(j, w) in m.row(i) {
                row[j] = w as f64;
            }
            row
        })
        .collect()
}

fn bool_mul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    a.iter()
        .map(|row| {
            let mut out = vec![false; b[0].len()];
            for (k, _) in row.iter().enumerate().filter(|(_, &x)| x) {
                for (o, &y) in out.iter_mut().zip(&b[k]) {
                    *o |= y;
                }
            }
            out
        })
        .collect()
}

/// Support pattern of A_{w_1}⋯A_{w_n}, computed over the boolean semiring.
pub fn word_support(mats: &DigitMatrices, word: &[i64]) -> Result<Vec<Vec<bool>>> {
    let k = mats.dim();
    let mut s: Vec<Vec<bool>> = (0..k).map(|i| (0..k).map(|j| i == j).collect()).collect();
    for &c in word {
        s = bool_mul(&s, &mats.get(c)?.support());
    }
    Ok(s)
}

/// Support pattern of M^n.
pub fn power_support(m: &TransitionMatrix, n: usize) -> Vec<Vec<bool>> {
    let k = m.dim();
    let base = m.support();
    let mut s: Vec<Vec<bool>> = (0..k).map(|i| (0..k).map(|j| i == j).collect()).collect();
    for _ in 0..n {
        s = bool_mul(&s, &base);
    }
    s
}

/// Zero rows I and zero columns J when every entry outside them is positive
/// and the top-left entry is positive; `None` otherwise.
pub fn trichotomy(support: &[Vec<bool>]) -> Option<(Vec<usize>, Vec<usize>)> {
    if !*support.first()?.first()? {
        return None;
    }
    let k = support.len();
    let zero_rows: Vec<usize> = (0..k).filter(|&i| support[i].iter().all(|x| !x)).collect();
    let zero_cols: Vec<usize> = (0..k).filter(|&j| support.iter().all(|r| !r[j])).collect();
    let rows: HashSet<_> = zero_rows.iter().copied().collect();
    let cols: HashSet<_> = zero_cols.iter().copied().collect();
    let ok = (0..k).all(|i| (0..k).all(|j| !support[i][j] == (rows.contains(&i) || cols.contains(&j))));
    ok.then_some((zero_rows, zero_cols))
}

/// A word whose product has the zero-row / zero-column / positive structure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MixingWordResult {
    pub word: Vec<i64>,
    pub zero_rows: Vec<usize>,
    pub zero_cols: Vec<usize>,
    /// A_w scaled so that its largest entry is 1.
    pub product: Vec<Vec<f64>>,
}

/// Shortest word c with (A_c)_{from,0} > 0, by BFS over indices.
fn connector(supports: &[(i64, Vec<Vec<bool>>)], from: usize) -> Result<Vec<i64>> {
    let k = supports[0].1.len();
    let mut prev: Vec<Option<(usize, i64)>> = vec![None; k];
    let mut depth = vec![usize::MAX; k];
    depth[from] = 0;
    let mut queue = VecDeque::from([from]);
    // a path of length ≥ 1 is needed even when from == 0
    let mut reached_zero: Option<(usize, i64)> = None;
    while let Some(p) = queue.pop_front() {
        if depth[p] >= CONNECTOR_CAP {
            break;
        }
        for (c, s) in supports {
            for q in (0..k).filter(|&q| s[p][q]) {
                if q == 0 && reached_zero.is_none() {
                    reached_zero = Some((p, *c));
                }
                if depth[q] == usize::MAX {
                    depth[q] = depth[p] + 1;
                    prev[q] = Some((p, *c));
                    queue.push_back(q);
                }
            }
        }
        if reached_zero.is_some() {
            break;
        }
    }
    let (mut p, c) = reached_zero.ok_or(SpectraError::SearchExhausted { from, cap: CONNECTOR_CAP })?;
    let mut word = vec![c];
    while p != from {
        let (q, c) = prev[p].expect("BFS predecessor");
        word.push(c);
        p = q;
    }
    word.reverse();
    Ok(word)
}

/// One pass of the row construction: every row either vanishes or gets a
/// positive first-column entry.
fn row_phase(supports: &[(i64, Vec<Vec<bool>>)]) -> Result<Vec<i64>> {
    let k = supports[0].1.len();
    let by_digit = |c: i64| &supports.iter().find(|s| s.0 == c).expect("digit present").1;
    let mut word = Vec::new();
    let mut s: Vec<Vec<bool>> = (0..k).map(|i| (0..k).map(|j| i == j).collect()).collect();
    for i in 0..k {
        if s[i][0] || s[i].iter().all(|x| !x) {
            continue;
        }
        let mut best: Option<Vec<i64>> = None;
        for p in (0..k).filter(|&p| s[i][p]) {
            if let Ok(w) = connector(supports, p) {
                if best.as_ref().is_none_or(|b| w.len() < b.len()) {
                    best = Some(w);
                }
            }
        }
        let piece = best.ok_or(SpectraError::SearchExhausted { from: i, cap: CONNECTOR_CAP })?;
        for &c in &piece {
            s = bool_mul(&s, by_digit(c));
        }
        word.extend(piece);
    }
    Ok(word)
}

/// Builds a mixing word: rows are routed to the first column, then columns
/// are routed from the first row using the transposed family.
pub fn find_mixing_word(mats: &DigitMatrices, delta: &DeltaSet) -> Result<MixingWordResult> {
    if mats.dim() != delta.len() {
        return Err(SpectraError::InvalidArgument("matrices and Δ differ in size".into()));
    }
    for (c, m) in mats.iter() {
        if m.get(0, 0) == 0 {
            return Err(SpectraError::InvalidArgument(format!("A_{c} has zero top-left entry")));
        }
    }
    // digit 0 first, so that ties in the connector search favour zeros
    let mut order: Vec<(i64, &TransitionMatrix)> = mats.iter().collect();
    order.sort_by_key(|(c, _)| c.abs());
    let supports: Vec<(i64, Vec<Vec<bool>>)> = order.iter().map(|(c, m)| (*c, m.support())).collect();
    let transposed: Vec<(i64, Vec<Vec<bool>>)> = order.iter().map(|(c, m)| (*c, m.transpose().support())).collect();
    let mut word = row_phase(&supports)?;
    let mut tail = row_phase(&transposed)?;
    tail.reverse();
    word.extend(tail);
    if word.is_empty() {
        word.push(0);
    }

    let support = word_support(mats, &word)?;
    let (zero_rows, zero_cols) = trichotomy(&support)
        .filter(|(i, j)| !i.contains(&0) && !j.contains(&0))
        .ok_or_else(|| SpectraError::InvalidArgument("mixing word failed verification".into()))?;

    let mut product = to_dense(mats.get(word[0])?);
    for &c in &word[1..] {
        let a = to_dense(mats.get(c)?);
        product = product.iter().map(|row| vec_mat(row, &a)).collect();
        let max = product.iter().flatten().fold(0.0f64, |m, &x| m.max(x));
        product.iter_mut().flatten().for_each(|x| *x /= max);
    }
    let max = product.iter().flatten().fold(0.0f64, |m, &x| m.max(x));
    product.iter_mut().flatten().for_each(|x| *x /= max);
    Ok(MixingWordResult { word, zero_rows, zero_cols, product })
}

/// Empirical and analytic contraction data for a mixing-word product.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContractionConstants {
    /// Sampled sup of d(UA, VA), times the safety factor.
    pub c1: f64,
    /// Sampled sup of d(UA, VA)/d(U, V) over finite-distance pairs, times the safety factor.
    pub c2: f64,
    /// tanh(D/4) for the projective diameter D of the positive block.
    pub c2_birkhoff: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Log-uniform entries on [e^{-8}, e^8]; with probability 1/2 some entries
/// after the first are zeroed.
fn sample_vector(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let sparse = rng.random_bool(0.5);
    (0..k)
        .map(|i| if i > 0 && sparse && rng.random_bool(0.3) { 0.0 } else { rng.random_range(-8.0..8.0f64).exp() })
        .collect()
}

/// A vector with the same zero pattern as `u`, perturbed in log scale by at
/// most a log-uniform amount in [10^{-3}, 10].
fn perturb(rng: &mut impl Rng, u: &[f64]) -> Vec<f64> {
    let s = 10f64.powf(rng.random_range(-3.0..1.0));
    u.iter().map(|&x| x * rng.random_range(-s..s).exp()).collect()
}

fn birkhoff(product: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> f64 {
    let k = product.len();
    let live_rows: Vec<usize> = (0..k).filter(|i| !rows.contains(i)).collect();
    let live_cols: Vec<usize> = (0..k).filter(|j| !cols.contains(j)).collect();
    let mut diameter = 0.0f64;
    for &i in &live_rows {
        for &l in &live_rows {
            let logs = live_cols.iter().map(|&j| (product[i][j] / product[l][j]).ln());
            let (lo, hi) = logs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
            diameter = diameter.max(hi - lo);
        }
    }
    (diameter / 4.0).tanh()
}

pub fn contraction_constants(mw: &MixingWordResult, trials: usize, seed: u64) -> Result<ContractionConstants> {
    let k = mw.product.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut c1, mut c2) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let u = sample_vector(&mut rng, k);
        let v = sample_vector(&mut rng, k);
        c1 = c1.max(distance_of(&vec_mat(&u, &mw.product), &vec_mat(&v, &mw.product))?);
        let v = perturb(&mut rng, &u);
        let before = distance_of(&u, &v)?;
        if before > 0.0 {
            let after = distance_of(&vec_mat(&u, &mw.product), &vec_mat(&v, &mw.product))?;
            c2 = c2.max(after / before);
        }
    }
    let (c1, c2) = (c1 * SAFETY_FACTOR, c2 * SAFETY_FACTOR);
    if !(c2 < 1.0) {
        return Err(SpectraError::NoContraction(c2));
    }
    Ok(ContractionConstants { c1, c2, c2_birkhoff: birkhoff(&mw.product, &mw.zero_rows, &mw.zero_cols), trials, seed })
}

/// Outcome of testing d(UA_i, VA_i) ≤ d(U, V) on sampled pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NonExpansionReport {
    pub trials: usize,
    /// Violations per digit −1, 0, 1.
    pub violations: [usize; 3],
    /// Largest observed d(UA_i, VA_i)/d(U, V).
    pub worst_ratio: f64,
    /// Violations of the same inequality in the Hilbert metric.
    pub hilbert_violations: [usize; 3],
}

impl NonExpansionReport {
    pub fn holds(&self) -> bool {
        self.violations.iter().all(|&v| v == 0)
    }
}

/// Samples finite-distance pairs and applies each single-digit matrix.
pub fn non_expansion(mats: &DigitMatrices, trials: usize, seed: u64) -> Result<NonExpansionReport> {
    let dense: Vec<Vec<Vec<f64>>> = DIGITS.iter().map(|&c| Ok(to_dense(mats.get(c)?))).collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = [0; 3];
    let mut worst_ratio = 0.0f64;
    let mut hilbert_violations = [0; 3];
    for _ in 0..trials {
        let u = sample_vector(&mut rng, mats.dim());
        let v = perturb(&mut rng, &u);
        let before = distance_of(&u, &v)?;
        if before == 0.0 {
            continue;
        }
        let hilbert_before = hilbert_distance(&u, &v);
        for (slot, a) in dense.iter().enumerate() {
            let (ua, va) = (vec_mat(&u, a), vec_mat(&v, a));
            let after = distance_of(&ua, &va)?;
            worst_ratio = worst_ratio.max(after / before);
            if after > before * (1.0 + 1e-12) {
                violations[slot] += 1;
            }
            if hilbert_distance(&ua, &va) > hilbert_before * (1.0 + 1e-12) {
                hilbert_violations[slot] += 1;
            }
        }
    }
    Ok(NonExpansionReport { trials, violations, worst_ratio, hilbert_violations })
}

/// ln μ(x + v_j) − ln μ(x) from the local vector of a code of x.
pub fn f_translation(spec: &SpectralData, mats: &DigitMatrices, word: &[i64], j: usize) -> Result<f64> {
    let v = local_vector(spec, mats, word)?;
    let vj = *v.get(j).ok_or_else(|| SpectraError::InvalidArgument(format!("index {j} outside Δ")))?;
    if !(v[0] > 0.0) {
        return Err(SpectraError::ZeroMass(0));
    }
    if !(vj > 0.0) {
        return Err(SpectraError::ZeroMass(j));
    }
    Ok(vj.ln() - v[0].ln())
}

/// A word a_1⋯a_m over {−1, 0, 1} with a_1 = 1 whose value vanishes, found by
/// BFS in the patch graph.
pub fn find_null_word(patch: &SpectrumPatch) -> Result<Vec<i64>> {
    let start =
        patch.index_of(&patch.field().apply_t(1, &patch.field().zero())?).ok_or(SpectraError::NullWordNotFound)?;
    let mut prev: Vec<Option<(usize, i64)>> = vec![None; patch.len()];
    let mut seen = vec![false; patch.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(p) = queue.pop_front() {
        for (&c, q) in DIGITS.iter().zip(patch.edges(p)) {
            let Some(q) = q else { continue };
            if seen[q] {
                continue;
            }
            seen[q] = true;
            prev[q] = Some((p, c));
            if patch.points()[q].is_zero() {
                let mut word = Vec::new();
                let mut at = q;
                while let Some((p, c)) = prev[at] {
                    word.push(c);
                    at = p;
                }
                word.push(1);
                word.reverse();
                return Ok(word);
            }
            queue.push_back(q);
        }
    }
    Err(SpectraError::NullWordNotFound)
}

/// Checks that every patch point is a finite sum of elements of Δ, by BFS
/// over additive steps inside the bounding box of the patch.
pub fn delta_spanning_check(delta: &DeltaSet, patch: &SpectrumPatch) -> Result<bool> {
    find_null_word(patch)?;
    let d = patch.field().degree();
    let (mut lo, mut hi) = (vec![i64::MAX; d], vec![i64::MIN; d]);
    for p in patch.points() {
        for (i, &c) in p.0.iter().enumerate() {
            lo[i] = lo[i].min(c);
            hi[i] = hi[i].max(c);
        }
    }
    let in_box = |p: &LatticePoint| p.0.iter().enumerate().all(|(i, &c)| lo[i] <= c && c <= hi[i]);
    let zero = patch.field().zero();
    let mut seen = HashSet::from([zero.clone()]);
    let mut queue = VecDeque::from([zero]);
    while let Some(p) = queue.pop_front() {
        for e in delta.elements() {
            let q = LatticePoint(p.0.iter().zip(&e.0).map(|(a, b)| a + b).collect());
            if in_box(&q) && seen.insert(q.clone()) {
                queue.push_back(q);
            }
        }
    }
    Ok(patch.points().iter().all(|p| seen.contains(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{compute_delta, enumerate_patch};
    use crate::transition::build_digit_matrices;
    use crate::NumberField;

    fn pv(v: &[f64]) -> ProjectiveVector {
        ProjectiveVector::from_vector(v).unwrap()
    }

    #[test]
    fn distance_examples() {
        let e = std::f64::consts::E;
        assert_eq!(proj_distance(&pv(&[1.0, 1.0, 1.0]), &pv(&[1.0, 1.0, 1.0])), 0.0);
        assert!((proj_distance(&pv(&[1.0, 1.0, 1.0]), &pv(&[1.0, e, 1.0])) - 1.0).abs() < 1e-15);
        assert_eq!(proj_distance(&pv(&[1.0, 0.0, 1.0]), &pv(&[1.0, 1.0, 1.0])), f64::INFINITY);
        assert_eq!(proj_distance(&pv(&[1.0, 0.0]), &pv(&[2.0, 0.0])), 0.0);
        assert!(ProjectiveVector::from_vector(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn golden_mixing_word() {
        let f = NumberField::from_text("x^2-x-1").unwrap();
        let delta = compute_delta(&f).unwrap();
        let mats = build_digit_matrices(&delta).unwrap();
        let mw = find_mixing_word(&mats, &delta).unwrap();
        assert!(trichotomy(&word_support(&mats, &mw.word).unwrap()).is_some());
        let cc = contraction_constants(&mw, 2000, 0).unwrap();
        assert!(cc.c2 < 1.0 && cc.c1.is_finite());
    }

    #[test]
    fn golden_null_word_and_span() {
        let f = NumberField::from_text("x^2-x-1").unwrap();
        let patch = enumerate_patch(&f, 2.0).unwrap();
        assert_eq!(find_null_word(&patch).unwrap(), vec![1, -1, -1]);
        assert!(delta_spanning_check(&compute_delta(&f).unwrap(), &patch).unwrap());
    }
}
