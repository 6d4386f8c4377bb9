//! Counting matrices on finite point sets, their growth constant and Perron
//! limit, exact word counts, and the measure values they produce.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algebraic::{LatticePoint, NumberField};
use crate::error::{Result, SpectraError};
use crate::spectrum::{code_of, difference_interval_set, DeltaSet, SpectrumPatch, DIGITS};

/// Weight of digit difference d in a counting step: one pair (a, b) gives
/// a − b = ±1, two pairs give 0.
pub fn digit_weight(d: i64) -> u32 {
    if d == 0 {
        2
    } else {
        1
    }
}

/// Sparse non-negative integer matrix, rows and columns indexed by `index`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionMatrix {
    rows: Vec<Vec<(usize, u32)>>,
    index: Vec<LatticePoint>,
}

impl TransitionMatrix {
    /// Builds from per-row entry lists; duplicate columns are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, u32)>>, index: Vec<LatticePoint>) -> Result<Self> {
        let k = rows.len();
        if !index.is_empty() && index.len() != k {
            return Err(SpectraError::InvalidArgument(format!("index has {} points for {} rows", index.len(), k)));
        }
        let rows = rows
            .into_iter()
            .map(|row| {
                let mut m: BTreeMap<usize, u32> = BTreeMap::new();
                for (j, v) in row {
                    if j >= k {
                        return Err(SpectraError::InvalidArgument(format!(
                            "column {j} out of range for dimension {k}"
                        )));
                    }
                    *m.entry(j).or_default() += v;
                }
                Ok(m.into_iter().filter(|&(_, v)| v > 0).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rows, index })
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn index(&self) -> &[LatticePoint] {
        &self.index
    }

    pub fn row(&self, i: usize) -> &[(usize, u32)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.rows[i].iter().find(|&&(c, _)| c == j).map_or(0, |&(_, v)| v)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row_sum(&self, i: usize) -> u32 {
        self.rows[i].iter().map(|&(_, v)| v).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut rows = vec![Vec::new(); self.dim()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                rows[j].push((i, v));
            }
        }
        Self { rows, index: self.index.clone() }
    }

    /// Relabels rows and columns: entry (i, j) moves to (perm[i], perm[j]).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut rows = vec![Vec::new(); self.dim()];
        for (i, row) in self.rows.iter().enumerate() {
            let mut r: Vec<(usize, u32)> = row.iter().map(|&(j, v)| (perm[j], v)).collect();
            r.sort_unstable();
            rows[perm[i]] = r;
        }
        let mut index = self.index.clone();
        for (i, p) in self.index.iter().enumerate() {
            index[perm[i]] = p.clone();
        }
        Self { rows, index }
    }

    /// Row vector times matrix.
    pub fn left_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (xi, row) in x.iter().zip(&self.rows) {
            if *xi == 0.0 {
                continue;
            }
            for &(j, v) in row {
                out[j] += xi * v as f64;
            }
        }
        out
    }

    /// Exact row vector times matrix.
    pub fn left_mul_exact(&self, x: &[BigUint]) -> Vec<BigUint> {
        let mut out = vec![BigUint::zero(); self.dim()];
        for (xi, row) in x.iter().zip(&self.rows) {
            if xi.is_zero() {
                continue;
            }
            for &(j, v) in row {
                out[j] += xi * v;
            }
        }
        out
    }

    /// Boolean support as dense rows.
    pub fn support(&self) -> Vec<Vec<bool>> {
        let mut s = vec![vec![false; self.dim()]; self.dim()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, _) in row {
                s[i][j] = true;
            }
        }
        s
    }

    /// Indices reachable from `start` along nonzero entries, `start` included.
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.dim()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for &(j, _) in &self.rows[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen
    }

    /// Writes Matrix Market coordinate format; `header` lines become `%` comments
    /// and the point index is stored as `% index` comments.
    pub fn write_matrix_market<W: Write>(&self, mut w: W, header: &[String]) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate integer general")?;
        for h in header {
            writeln!(w, "% {h}")?;
        }
        for (i, p) in self.index.iter().enumerate() {
            let coords: Vec<String> = p.coords().iter().map(i64::to_string).collect();
            writeln!(w, "% index {} {}", i + 1, coords.join(" "))?;
        }
        writeln!(w, "{} {} {}", self.dim(), self.dim(), self.nnz())?;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                writeln!(w, "{} {} {}", i + 1, j + 1, v)?;
            }
        }
        Ok(())
    }

    pub fn read_matrix_market<R: BufRead>(r: R) -> Result<Self> {
        let bad = |s: &str| SpectraError::Format(s.to_string());
        let mut lines = r.lines();
        let banner = lines.next().ok_or_else(|| bad("empty file"))??;
        if !banner.starts_with("%%MatrixMarket matrix coordinate") {
            return Err(bad("missing Matrix Market banner"));
        }
        let mut index: Vec<(usize, LatticePoint)> = Vec::new();
        let mut size: Option<(usize, usize)> = None;
        let mut entries: Vec<(usize, usize, u32)> = Vec::new();
        for line in lines {
            let line = line?;
            let line = line.trim();
            if let Some(rest) = line.strip_prefix("% index ") {
                let mut it = rest.split_whitespace().map(str::parse::<i64>);
                let i = it.next().ok_or_else(|| bad("index line"))?.map_err(|_| bad("index line"))?;
                if i < 1 {
                    return Err(bad("index line"));
                }
                let coords = it.collect::<std::result::Result<Vec<_>, _>>().map_err(|_| bad("index line"))?;
                index.push((i as usize - 1, LatticePoint(coords)));
                continue;
            }
            if line.is_empty() || line.starts_with('%') {
                continue;
            }
            let nums: Vec<usize> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(line))?;
            match (size, nums.as_slice()) {
                (None, &[r, c, nnz]) => {
                    if r != c {
                        return Err(bad("matrix is not square"));
                    }
                    size = Some((r, nnz));
                    entries.reserve(nnz);
                }
                (Some(_), &[i, j, v]) if i >= 1 && j >= 1 => entries.push((i - 1, j - 1, v as u32)),
                _ => return Err(bad(line)),
            }
        }
        let (k, nnz) = size.ok_or_else(|| bad("missing size line"))?;
        if entries.len() != nnz {
            return Err(bad("entry count does not match header"));
        }
        let mut rows = vec![Vec::new(); k];
        for (i, j, v) in entries {
            if i >= k {
                return Err(bad("row out of range"));
            }
            rows[i].push((j, v));
        }
        index.sort_by_key(|(i, _)| *i);
        let index: Vec<LatticePoint> = index.into_iter().map(|(_, p)| p).collect();
        Self::from_rows(rows, index)
    }
}

/// Λ_R on a patch: weight 2 for T_0 edges, 1 for T_{±1} edges.
pub fn build_lambda_r(patch: &SpectrumPatch) -> TransitionMatrix {
    let rows = (0..patch.len())
        .map(|i| patch.edges(i).iter().zip(DIGITS).filter_map(|(e, d)| e.map(|j| (j, digit_weight(d)))).collect())
        .collect();
    TransitionMatrix::from_rows(rows, patch.points().to_vec()).expect("patch edges are in range")
}

/// The three matrices of a digit family, indexed by digit −1, 0, 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitMatrices {
    mats: [TransitionMatrix; 3],
}

impl DigitMatrices {
    pub fn new(minus: TransitionMatrix, zero: TransitionMatrix, plus: TransitionMatrix) -> Self {
        Self { mats: [minus, zero, plus] }
    }

    /// Matrix for digit c ∈ {−1, 0, 1}.
    pub fn get(&self, c: i64) -> Result<&TransitionMatrix> {
        match c {
            -1..=1 => Ok(&self.mats[(c + 1) as usize]),
            _ => Err(SpectraError::BadDigit(c)),
        }
    }

    pub fn dim(&self) -> usize {
        self.mats[1].dim()
    }

    pub fn index(&self) -> &[LatticePoint] {
        self.mats[1].index()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &TransitionMatrix)> {
        DIGITS.into_iter().zip(self.mats.iter())
    }
}

/// Matrices on `points` where digit c moves v_m to T_{s·(d−c)}(v_m) with weight
/// `digit_weight(d)` for each other digit d. s = 1 gives the A_i family,
/// s = −1 the golden-mean M_i family.
fn difference_matrices(field: &NumberField, points: &[LatticePoint], sign: i64) -> Result<DigitMatrices> {
    let index: HashMap<&LatticePoint, usize> = points.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let build = |c: i64| -> Result<TransitionMatrix> {
        let mut rows = Vec::with_capacity(points.len());
        for v in points {
            let mut row = Vec::new();
            for d in DIGITS {
                if let Some(&n) = index.get(&field.apply_t(sign * (d - c), v)?) {
                    row.push((n, digit_weight(d)));
                }
            }
            rows.push(row);
        }
        TransitionMatrix::from_rows(rows, points.to_vec())
    };
    Ok(DigitMatrices::new(build(-1)?, build(0)?, build(1)?))
}

/// A_i on Δ: (A_i)_{m,n} = Σ_d weight(d)·[T_{d−i}(v_m) = v_n].
pub fn build_digit_matrices(delta: &DeltaSet) -> Result<DigitMatrices> {
    difference_matrices(delta.field(), delta.elements(), 1)
}

/// The golden-mean counting matrices: indexed by the difference interval set,
/// with (M_c)_{ij} the weighted number of d with T_{c−d}(v_i) = v_j.
pub fn golden_matrices(field: &NumberField) -> Result<DigitMatrices> {
    let v = difference_interval_set(field)?;
    difference_matrices(field, &v, -1)
}

/// M_0 on the interval set V of a Pisot number: weight 1 when v_j = β·v_i ± 1,
/// 2 when v_j = β·v_i.
pub fn build_m0_pisot(field: &NumberField, v: &[LatticePoint]) -> Result<TransitionMatrix> {
    field.require_pisot()?;
    let index: HashMap<&LatticePoint, usize> = v.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let rows = v
        .iter()
        .map(|p| {
            let mut row = Vec::new();
            for d in DIGITS {
                if let Some(&j) = index.get(&field.apply_t(d, p)?) {
                    row.push((j, digit_weight(d)));
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    TransitionMatrix::from_rows(rows, v.to_vec())
}

/// Default iteration cap for power iterations.
pub const MAX_ITERATIONS: usize = 1_000_000;

/// Growth rate of e_1·M^n: power iteration from e_1 with the norm ratio
/// averaged geometrically over a window of 4 steps. Converged once successive
/// estimates agree within `tol` and the normalized iterate matches the one
/// four steps back within `tol` (which tolerates periods dividing 4).
pub fn spectral_radius(m: &TransitionMatrix, tol: f64) -> Result<f64> {
    spectral_radius_with(m, tol, MAX_ITERATIONS)
}

pub fn spectral_radius_with(m: &TransitionMatrix, tol: f64, max_iter: usize) -> Result<f64> {
    if m.dim() == 0 {
        return Err(SpectraError::InvalidArgument("empty matrix".into()));
    }
    let mut x = vec![0.0; m.dim()];
    x[0] = 1.0;
    let mut logs: Vec<f64> = Vec::new();
    let mut history: std::collections::VecDeque<Vec<f64>> = std::collections::VecDeque::new();
    let mut prev: Option<f64> = None;
    for _ in 0..max_iter {
        let y = m.left_mul(&x);
        let s: f64 = y.iter().sum();
        if s == 0.0 {
            return Ok(0.0);
        }
        logs.push(s.ln());
        history.push_back(x);
        if history.len() > 4 {
            history.pop_front();
        }
        x = y.into_iter().map(|v| v / s).collect();
        if logs.len() >= 4 {
            let est = (logs[logs.len() - 4..].iter().sum::<f64>() / 4.0).exp();
            let top = x.iter().cloned().fold(0.0, f64::max);
            let drift = x.iter().zip(&history[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if let Some(p) = prev {
                if (est - p).abs() <= tol * est && drift <= tol * top {
                    return Ok(est);
                }
            }
            prev = Some(est);
        }
    }
    Err(SpectraError::ConvergenceFailure(format!("spectral radius after {max_iter} iterations")))
}

/// Growth constant, Perron limit vector, and diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralData {
    pub lambda: f64,
    /// lim e_1·M^n/λ^n.
    pub w: Vec<f64>,
    pub mu0: f64,
    pub index: Vec<LatticePoint>,
    /// Iterations until successive iterates agreed within tolerance.
    pub iterations: usize,
    /// ∞-norm gap between the last two iterates.
    pub step: f64,
    /// First n at which e_1·M^n is positive on every index reachable from 1.
    pub positive_at: Option<usize>,
    /// ‖(1/λ)·W·M − W‖_∞.
    pub residual: f64,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// W normalized to total mass 1.
    pub fn probability(&self) -> Vec<f64> {
        let s: f64 = self.w.iter().sum();
        self.w.iter().map(|v| v / s).collect()
    }
}

/// λ and W = lim e_1·M^n/λ^n, checking M(1,1) > 0 and that index 1 stays
/// maximal along the run.
pub fn perron_limit(m: &TransitionMatrix, tol: f64) -> Result<SpectralData> {
    perron_limit_with(m, tol, MAX_ITERATIONS)
}

pub fn perron_limit_with(m: &TransitionMatrix, tol: f64, max_iter: usize) -> Result<SpectralData> {
    if m.dim() == 0 || m.get(0, 0) == 0 {
        return Err(SpectraError::InvalidArgument("matrix must have a positive (1,1) entry".into()));
    }
    let lambda = spectral_radius_with(m, 0.1 * tol, max_iter)?;
    let reach = m.reachable_from(0);
    let mut x = vec![0.0; m.dim()];
    x[0] = 1.0;
    let mut positive_at = None;
    for n in 1..=max_iter {
        let y: Vec<f64> = m.left_mul(&x).into_iter().map(|v| v / lambda).collect();
        if let Some(j) = (1..y.len()).find(|&j| y[j] > y[0] * (1.0 + 1e-12)) {
            return Err(SpectraError::AssumptionViolated { n, index: j });
        }
        if positive_at.is_none() && y.iter().zip(&reach).all(|(v, &r)| !r || *v > 0.0) {
            positive_at = Some(n);
        }
        let step = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = y;
        if step < tol && n >= 4 {
            let residual = m.left_mul(&x).iter().zip(&x).map(|(a, b)| (a / lambda - b).abs()).fold(0.0, f64::max);
            return Ok(SpectralData {
                lambda,
                mu0: x[0],
                w: x,
                index: m.index().to_vec(),
                iterations: n,
                step,
                positive_at,
                residual,
            });
        }
    }
    Err(SpectraError::ConvergenceFailure(format!("Perron limit after {max_iter} iterations")))
}

/// Largest n accepted by the brute-force counter.
pub const BRUTE_FORCE_MAX: usize = 14;

/// Every value Σ (a_i − b_i)β^{n−i}, a, b ∈ {0,1}^n, with the number of pairs
/// producing it. All 4^n pairs are enumerated.
pub fn brute_force_counts(field: &NumberField, n: usize) -> Result<BTreeMap<LatticePoint, u64>> {
    if n > BRUTE_FORCE_MAX {
        return Err(SpectraError::TooLarge(n));
    }
    let mut out = BTreeMap::new();
    let mut stack = vec![(field.zero(), 0usize)];
    while let Some((x, depth)) = stack.pop() {
        if depth == n {
            *out.entry(x).or_insert(0) += 1;
            continue;
        }
        for a in 0..=1 {
            for b in 0..=1 {
                stack.push((field.apply_t(a - b, &x)?, depth + 1));
            }
        }
    }
    Ok(out)
}

/// 𝒩_n(x) by exhaustive enumeration.
pub fn brute_force_n(field: &NumberField, x: &LatticePoint, n: usize) -> Result<u64> {
    Ok(brute_force_counts(field, n)?.get(x).copied().unwrap_or(0))
}

/// (e_1·M_{c_1}⋯M_{c_n})_1 in exact arithmetic: 𝒩_n(x) when c codes x.
pub fn count_by_word(mats: &DigitMatrices, word: &[i64]) -> Result<BigUint> {
    Ok(exact_row(mats, word)?.swap_remove(0))
}

/// e_1·M_{c_1}⋯M_{c_n} in exact arithmetic.
pub fn exact_row(mats: &DigitMatrices, word: &[i64]) -> Result<Vec<BigUint>> {
    let mut x = vec![BigUint::zero(); mats.dim()];
    x[0] = BigUint::from(1u32);
    for &c in word {
        x = mats.get(c)?.left_mul_exact(&x);
    }
    Ok(x)
}

/// 𝒩_n(x) from the digit matrices, using a shortest code of x padded with
/// leading zeros; 0 when x has no code of length n.
pub fn count_n(mats: &DigitMatrices, field: &NumberField, x: &LatticePoint, n: usize) -> Result<BigUint> {
    match code_of(field, x)? {
        Some(code) if code.len() <= n => {
            let mut word = vec![0; n - code.len()];
            word.extend(code);
            count_by_word(mats, &word)
        }
        _ => Ok(BigUint::zero()),
    }
}

/// Finitely supported integer measure on the lattice.
pub type Counts = BTreeMap<LatticePoint, BigUint>;

/// (Lν)(x) = ν(T_{−1}^{−1}x) + 2ν(T_0^{−1}x) + ν(T_1^{−1}x).
pub fn apply_l(field: &NumberField, nu: &Counts) -> Result<Counts> {
    let mut out = Counts::new();
    for (y, m) in nu {
        for d in DIGITS {
            *out.entry(field.apply_t(d, y)?).or_default() += m * digit_weight(d);
        }
    }
    Ok(out)
}

/// L^n δ_0.
pub fn iterate_l(field: &NumberField, n: usize) -> Result<Counts> {
    let mut nu = Counts::from([(field.zero(), BigUint::from(1u32))]);
    for _ in 0..n {
        nu = apply_l(field, &nu)?;
    }
    Ok(nu)
}

/// λ^{−n}·W·M_{c_1}⋯M_{c_n}, rescaling at every step.
pub fn local_vector(spec: &SpectralData, mats: &DigitMatrices, word: &[i64]) -> Result<Vec<f64>> {
    if spec.dim() != mats.dim() {
        return Err(SpectraError::InvalidArgument(format!(
            "spectral data has dimension {} but matrices have {}",
            spec.dim(),
            mats.dim()
        )));
    }
    let mut v = spec.w.clone();
    for &c in word {
        v = mats.get(c)?.left_mul(&v).into_iter().map(|x| x / spec.lambda).collect();
    }
    Ok(v)
}

/// μ(x) = λ^{−n}·(W·M_{c_1}⋯M_{c_n})_1 for a code c of x.
pub fn measure_at(spec: &SpectralData, mats: &DigitMatrices, word: &[i64]) -> Result<f64> {
    Ok(local_vector(spec, mats, word)?[0])
}

/// μ(x) for a lattice point, found through a shortest code; 0 off the spectrum.
pub fn measure_of_point(
    spec: &SpectralData,
    mats: &DigitMatrices,
    field: &NumberField,
    x: &LatticePoint,
) -> Result<f64> {
    match code_of(field, x)? {
        Some(code) => measure_at(spec, mats, &code),
        None => Ok(0.0),
    }
}

/// Everything needed to evaluate μ on X̄(β): Δ, the A_i, and the Perron data of A_0.
#[derive(Clone, Debug)]
pub struct MeasureModel {
    pub delta: DeltaSet,
    pub matrices: DigitMatrices,
    pub spectral: SpectralData,
}

impl MeasureModel {
    pub fn new(field: &NumberField, tol: f64) -> Result<Self> {
        let delta = crate::spectrum::compute_delta(field)?;
        let matrices = build_digit_matrices(&delta)?;
        let spectral = perron_limit(matrices.get(0)?, tol)?;
        Ok(Self { delta, matrices, spectral })
    }

    pub fn field(&self) -> &NumberField {
        self.delta.field()
    }

    pub fn measure_at(&self, word: &[i64]) -> Result<f64> {
        measure_at(&self.spectral, &self.matrices, word)
    }

    pub fn local_vector(&self, word: &[i64]) -> Result<Vec<f64>> {
        local_vector(&self.spectral, &self.matrices, word)
    }

    pub fn measure_of_point(&self, x: &LatticePoint) -> Result<f64> {
        measure_of_point(&self.spectral, &self.matrices, self.field(), x)
    }
}

/// Converts an exact count to f64 (saturating at infinity).
pub fn to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}
