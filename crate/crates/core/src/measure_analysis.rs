//! The limit measure restricted to I_β, the function g_β, the row-sum
//! identity, Wasserstein distances to Lebesgue measure, and the dimension table.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebraic::{LatticePoint, Membership, NumberField};
use crate::error::{Result, SpectraError};
use crate::spectrum::{compute_v_interval, compute_v_interval_padded, DIGITS};
use crate::transition::{build_m0_pisot, digit_weight, perron_limit, SpectralData, TransitionMatrix};

/// Band used by the floating-point indicator of I_β.
pub const INDICATOR_BAND: f64 = 1e-9;

/// The thirteen Pisot numbers in (1, 2) of degree below six.
pub const TABLE1_POLYNOMIALS: [&str; 13] = [
    "x^3-x^2-x-1",
    "x^3-x^2-1",
    "x^3-x-1",
    "x^4-x^3-x^2-x-1",
    "x^4-x^3-1",
    "x^5-x^4-x^3-x^2-x-1",
    "x^5-x^4-x^3-x^2-1",
    "x^5-x^4-x^3-x^2+1",
    "x^5-x^4-x^3-1",
    "x^5-x^4-x^3-x-1",
    "x^5-x^4-x^3+x^2-1",
    "x^5-x^4-x^2-1",
    "x^5-x^3-x^2-x-1",
];

/// Finitely many weighted atoms on the line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    atoms: Vec<(f64, f64)>,
    lo: f64,
    hi: f64,
}

impl DiscreteMeasure {
    /// Sorts atoms by position and normalizes the masses to sum 1. The support
    /// interval is widened to contain every atom.
    pub fn new(mut atoms: Vec<(f64, f64)>, lo: f64, hi: f64) -> Result<Self> {
        if atoms.iter().any(|&(x, m)| !x.is_finite() || !(m >= 0.0)) {
            return Err(SpectraError::InvalidArgument("atoms need finite positions and masses ≥ 0".into()));
        }
        atoms.retain(|&(_, m)| m > 0.0);
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if atoms.is_empty() || total <= 0.0 {
            return Err(SpectraError::InvalidArgument("measure has no mass".into()));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(SpectraError::InvalidArgument("atom positions must be distinct".into()));
        }
        for a in &mut atoms {
            a.1 /= total;
        }
        let lo = lo.min(atoms[0].0);
        let hi = hi.max(atoms[atoms.len() - 1].0);
        Ok(Self { atoms, lo, hi })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// F(t) = mass of (−∞, t].
    pub fn cdf(&self, t: f64) -> f64 {
        self.atoms.iter().take_while(|a| a.0 <= t).map(|a| a.1).sum()
    }

    /// Mirror image about the midpoint of the support.
    pub fn reflected(&self) -> Self {
        let c = self.lo + self.hi;
        let atoms = self.atoms.iter().rev().map(|&(x, m)| (c - x, m)).collect();
        Self { atoms, lo: self.lo, hi: self.hi }
    }
}

/// ∫ |F_m − F_U| dt for U uniform on [lo, hi], integrated exactly: F_m is a
/// step function and F_U is piecewise linear.
pub fn wasserstein1(m: &DiscreteMeasure, lo: f64, hi: f64) -> Result<f64> {
    if !(hi > lo) {
        return Err(SpectraError::InvalidArgument("reference interval is empty".into()));
    }
    let fu = |t: f64| ((t - lo) / (hi - lo)).clamp(0.0, 1.0);
    let mut breaks: Vec<f64> = m.atoms.iter().map(|a| a.0).collect();
    breaks.extend([lo, hi]);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut total = 0.0;
    let mut mass = 0.0;
    let mut next_atom = 0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        while next_atom < m.atoms.len() && m.atoms[next_atom].0 <= a {
            mass += m.atoms[next_atom].1;
            next_atom += 1;
        }
        // on [a, b] the difference is linear unless b crosses lo or hi; lo and
        // hi are breakpoints, so it is linear throughout
        let (ga, gb) = (mass - fu(a), mass - fu(b));
        let len = b - a;
        total += if ga * gb >= 0.0 {
            0.5 * (ga + gb).abs() * len
        } else {
            let t = ga / (ga - gb);
            0.5 * (ga.abs() * t + gb.abs() * (1.0 - t)) * len
        };
    }
    Ok(total)
}

/// W1 after mapping [lo, hi] affinely onto [−1, 1].
pub fn wasserstein1_rescaled(m: &DiscreteMeasure, lo: f64, hi: f64) -> Result<f64> {
    Ok(wasserstein1(m, lo, hi)? * 2.0 / (hi - lo))
}

/// I_β = [−1/(β−1), 1/(β−1)].
pub fn interval(field: &NumberField) -> (f64, f64) {
    let h = 1.0 / (field.beta() - 1.0);
    (-h, h)
}

/// Atoms at the real values of `v` with the Perron probability vector as masses.
pub fn restricted_measure(field: &NumberField, v: &[LatticePoint], spec: &SpectralData) -> Result<DiscreteMeasure> {
    field.require_pisot()?;
    if v.len() != spec.dim() {
        return Err(SpectraError::InvalidArgument("point list and spectral data differ in size".into()));
    }
    let (lo, hi) = interval(field);
    let atoms = v.iter().map(|p| field.value(p)).zip(spec.probability()).collect();
    DiscreteMeasure::new(atoms, lo, hi)
}

/// χ(βx−1) + 2χ(βx) + χ(βx+1) for the closed interval I_β, evaluated in floating
/// point with a band of [`INDICATOR_BAND`] counted as inside.
pub fn g_beta(field: &NumberField, x: f64) -> u32 {
    let (_, h) = interval(field);
    let b = field.beta();
    DIGITS.iter().filter(|&&d| (b * x + d as f64).abs() <= h + INDICATOR_BAND).map(|&d| digit_weight(d)).sum()
}

/// g_β at a lattice point, with the closed interval tested exactly.
pub fn g_beta_lattice(field: &NumberField, x: &LatticePoint) -> Result<u32> {
    let mut g = 0;
    for d in DIGITS {
        let y = field.apply_t(d, x)?;
        match field.in_box_coords(&y, 1.0, true, [0]) {
            Membership::Inside => g += digit_weight(d),
            Membership::Outside => {}
            Membership::Ambiguous => return Err(SpectraError::BoundaryAmbiguous(y)),
        }
    }
    Ok(g)
}

/// (1/|I_β|)·∫_{I_β} g_β, integrated piece by piece; equals 4/β.
pub fn integral_g_beta(field: &NumberField) -> f64 {
    let (lo, hi) = interval(field);
    let b = field.beta();
    let total: f64 = DIGITS
        .iter()
        .map(|&d| {
            // {x ∈ I : βx + d ∈ I}
            let a = ((lo - d as f64) / b).max(lo);
            let c = ((hi - d as f64) / b).min(hi);
            digit_weight(d) as f64 * (c - a).max(0.0)
        })
        .sum();
    total / (hi - lo)
}

/// Both sides of λ = Σ_j g_β(v_j)·p_j.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RowSumIdentity {
    pub lambda: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Whether every row sum of M_0 equals g_β at its point.
    pub row_sums_match: bool,
}

pub fn rowsum_identity(
    field: &NumberField,
    v: &[LatticePoint],
    m: &TransitionMatrix,
    spec: &SpectralData,
) -> Result<RowSumIdentity> {
    let p = spec.probability();
    let mut rhs = 0.0;
    let mut row_sums_match = true;
    for (i, (x, pi)) in v.iter().zip(&p).enumerate() {
        let g = g_beta_lattice(field, x)?;
        row_sums_match &= g == m.row_sum(i);
        rhs += g as f64 * pi;
    }
    Ok(RowSumIdentity { lambda: spec.lambda, rhs, residual: (spec.lambda - rhs).abs(), row_sums_match })
}

/// One row of the dimension table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DimensionReport {
    pub polynomial: String,
    pub beta: f64,
    pub lambda: f64,
    /// (log 4 − log λ)/log β, capped at 1.
    pub bound: f64,
    /// W1 with I_β rescaled to [−1, 1].
    pub w1: f64,
    /// W1 on I_β itself.
    pub w1_native: f64,
    pub matrix_size: usize,
    pub entropy_lb: f64,
}

/// Runs the whole chain for one Pisot polynomial on the table point set.
pub fn dimension_report(field: &NumberField, tol: f64) -> Result<DimensionReport> {
    let v = compute_v_interval(field)?;
    let m = build_m0_pisot(field, &v)?;
    let spec = perron_limit(&m, tol)?;
    let measure = restricted_measure(field, &v, &spec)?;
    let (lo, hi) = interval(field);
    let w1_native = wasserstein1(&measure, lo, hi)?;
    let entropy_lb = 4f64.ln() - spec.lambda.ln();
    Ok(DimensionReport {
        polynomial: field.minpoly().to_text(),
        beta: field.beta(),
        lambda: spec.lambda,
        bound: (entropy_lb / field.beta().ln()).min(1.0),
        w1: w1_native * 2.0 / (hi - lo),
        w1_native,
        matrix_size: v.len(),
        entropy_lb,
    })
}

/// The row-sum identity on the exact closed-interval point set.
pub fn exact_rowsum_identity(field: &NumberField, tol: f64) -> Result<RowSumIdentity> {
    let v = compute_v_interval_padded(field, 0.0)?;
    let m = build_m0_pisot(field, &v)?;
    let spec = perron_limit(&m, tol)?;
    rowsum_identity(field, &v, &m, &spec)
}

/// Dimension reports for each polynomial, computed in parallel; failures are
/// reported per row.
pub fn table1_pipeline(polynomials: &[&str], tol: f64) -> Vec<Result<DimensionReport>> {
    polynomials.par_iter().map(|p| dimension_report(&NumberField::from_text(p)?, tol)).collect()
}
