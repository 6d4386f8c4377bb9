//! Exact arithmetic in Z[β] on integer coordinate vectors, root finding and
//! classification of β, and the expanding/contracting embeddings.

use std::cmp::Ordering;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpectraError};

/// Distance from the unit circle below which a root makes the field non-hyperbolic.
pub const UNIT_CIRCLE_TOL: f64 = 1e-9;
/// Width of the band around a box boundary inside which float comparisons are not trusted.
pub const BOX_BAND: f64 = 1e-9;
/// Default root tolerance.
pub const ROOT_TOL: f64 = 1e-12;

const MAX_DEGREE: usize = 16;

/// Monic integer polynomial with constant term ±1, stored leading coefficient first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalPolynomial {
    coeffs: Vec<i64>,
}

impl MinimalPolynomial {
    /// Validates the coefficient list (leading first) without the irreducibility test.
    fn checked(coeffs: Vec<i64>) -> Result<Self> {
        let coeffs: Vec<i64> = coeffs.into_iter().skip_while(|&c| c == 0).collect();
        if coeffs.len() < 3 {
            return Err(SpectraError::DegreeTooSmall(coeffs.len().saturating_sub(1)));
        }
        if coeffs.len() - 1 > MAX_DEGREE {
            return Err(SpectraError::InvalidArgument(format!("degree {} exceeds {MAX_DEGREE}", coeffs.len() - 1)));
        }
        if coeffs[0] != 1 {
            return Err(SpectraError::NotMonic(coeffs[0]));
        }
        let c0 = *coeffs.last().unwrap();
        if c0.abs() != 1 {
            return Err(SpectraError::BadConstantTerm(c0));
        }
        Ok(Self { coeffs })
    }

    /// Builds the polynomial from coefficients (leading first), rejecting
    /// non-monic, bad constant term and reducible input.
    pub fn new(coeffs: Vec<i64>) -> Result<Self> {
        let p = Self::checked(coeffs)?;
        let roots = polished_roots(&p)?;
        if let Some(factor) = find_factor(&p, &roots) {
            return Err(SpectraError::Reducible(format!(
                "{} divides {}",
                MinimalPolynomial { coeffs: factor }.to_text(),
                p.to_text()
            )));
        }
        Ok(p)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of x^k.
    pub fn coeff_of(&self, k: usize) -> i64 {
        self.coeffs[self.degree() - k]
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c as f64)
    }

    fn eval_with_derivative(&self, x: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in &self.coeffs {
            dp = dp * x + p;
            p = p * x + c as f64;
        }
        (p, dp)
    }

    /// `x^3-x^2-x-1` style rendering.
    pub fn to_text(&self) -> String {
        let d = self.degree();
        let mut out = String::new();
        for (pos, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let k = d - pos;
            let sign = if c < 0 {
                "-"
            } else if out.is_empty() {
                ""
            } else {
                "+"
            };
            let mag = c.unsigned_abs();
            let body = match (k, mag) {
                (0, m) => m.to_string(),
                (1, 1) => "x".to_string(),
                (1, m) => format!("{m}x"),
                (k, 1) => format!("x^{k}"),
                (k, m) => format!("{m}x^{k}"),
            };
            out.push_str(sign);
            out.push_str(&body);
        }
        out
    }
}

impl fmt::Display for MinimalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Parses `x^k±…` notation, a comma-separated coefficient list, or a JSON
/// integer array (leading coefficient first).
pub fn parse_polynomial(text: &str) -> Result<MinimalPolynomial> {
    let t = text.trim();
    let coeffs = if t.starts_with('[') {
        serde_json::from_str::<Vec<i64>>(t).map_err(|_| SpectraError::Parse(text.into()))?
    } else if t.contains('x') || t.contains('X') {
        parse_monomials(t).ok_or_else(|| SpectraError::Parse(text.into()))?
    } else {
        t.split(',')
            .map(|s| s.trim().parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| SpectraError::Parse(text.into()))?
    };
    MinimalPolynomial::new(coeffs)
}

fn parse_monomials(t: &str) -> Option<Vec<i64>> {
    let s: String = t.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    if s.is_empty() {
        return None;
    }
    let mut terms: Vec<(i64, &str)> = Vec::new();
    let bytes = s.as_bytes();
    let mut start = 0;
    let mut sign = 1i64;
    if bytes[0] == b'+' || bytes[0] == b'-' {
        sign = if bytes[0] == b'-' { -1 } else { 1 };
        start = 1;
    }
    let mut i = start;
    while i <= bytes.len() {
        if i == bytes.len() || ((bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'^') {
            let body = &s[start..i];
            if body.is_empty() {
                return None;
            }
            terms.push((sign, body));
            if i < bytes.len() {
                sign = if bytes[i] == b'-' { -1 } else { 1 };
            }
            start = i + 1;
        }
        i += 1;
    }
    let mut by_degree: Vec<i64> = Vec::new();
    for (sign, body) in terms {
        let (coef, deg) = match body.find('x') {
            None => (body.parse::<i64>().ok()?, 0usize),
            Some(p) => {
                let head = body[..p].trim_end_matches('*');
                let coef = if head.is_empty() { 1 } else { head.parse::<i64>().ok()? };
                let tail = &body[p + 1..];
                let deg = if tail.is_empty() { 1 } else { tail.strip_prefix('^')?.parse::<usize>().ok()? };
                (coef, deg)
            }
        };
        if deg > MAX_DEGREE {
            return None;
        }
        if by_degree.len() <= deg {
            by_degree.resize(deg + 1, 0);
        }
        by_degree[deg] += sign * coef;
    }
    by_degree.reverse();
    Some(by_degree)
}

/// Companion-matrix eigenvalues refined by Newton's method.
fn polished_roots(p: &MinimalPolynomial) -> Result<Vec<Complex64>> {
    let d = p.degree();
    let mut comp = DMatrix::<f64>::zeros(d, d);
    for k in 1..d {
        comp[(k, k - 1)] = 1.0;
    }
    for k in 0..d {
        comp[(k, d - 1)] = -(p.coeff_of(k) as f64);
    }
    let eig = comp.complex_eigenvalues();
    let mut roots = Vec::with_capacity(d);
    for z0 in eig.iter() {
        let mut z = *z0;
        for _ in 0..100 {
            let (v, dv) = p.eval_with_derivative(z);
            if dv.norm() == 0.0 {
                break;
            }
            let step = v / dv;
            z -= step;
            if step.norm() <= 1e-16 * z.norm().max(1.0) {
                break;
            }
        }
        if z.im.abs() < 1e-13 {
            z.im = 0.0;
        }
        roots.push(z);
    }
    Ok(roots)
}

/// Looks for a monic integer factor of degree ≤ deg/2 among products of root subsets,
/// confirming candidates by exact division.
fn find_factor(p: &MinimalPolynomial, roots: &[Complex64]) -> Option<Vec<i64>> {
    let d = roots.len();
    for k in 1..=d / 2 {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let mut prod = vec![Complex64::new(1.0, 0.0)];
            for &i in &idx {
                let mut next = vec![Complex64::new(0.0, 0.0); prod.len() + 1];
                for (j, &c) in prod.iter().enumerate() {
                    next[j] += c;
                    next[j + 1] -= c * roots[i];
                }
                prod = next;
            }
            let near_int = prod.iter().all(|c| c.im.abs() < 1e-6 && (c.re - c.re.round()).abs() < 1e-6);
            if near_int {
                let cand: Vec<i64> = prod.iter().map(|c| c.re.round() as i64).collect();
                if divides_exactly(&cand, p.coeffs()) {
                    return Some(cand);
                }
            }
            // next k-subset
            let mut pos = k;
            while pos > 0 && idx[pos - 1] == d - k + pos - 1 {
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            idx[pos - 1] += 1;
            for j in pos..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    None
}

fn divides_exactly(divisor: &[i64], dividend: &[i64]) -> bool {
    let mut rem: Vec<i128> = dividend.iter().map(|&c| c as i128).collect();
    let m = divisor.len();
    if m > rem.len() {
        return false;
    }
    for i in 0..=rem.len() - m {
        let q = rem[i];
        for (j, &c) in divisor.iter().enumerate() {
            rem[i + j] -= q * c as i128;
        }
    }
    rem.iter().all(|&r| r == 0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Pisot,
    HyperbolicNonPisot,
    NonHyperbolic,
}

/// An element of Z[β] given by its coefficients in the basis 1, β, …, β^{deg−1}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn zero(deg: usize) -> Self {
        Self(vec![0; deg])
    }

    /// The integer `n` as a lattice point.
    pub fn integer(deg: usize, n: i64) -> Self {
        let mut v = vec![0; deg];
        v[0] = n;
        Self(v)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_add(*b).ok_or(SpectraError::IntegerOverflow))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b).ok_or(SpectraError::IntegerOverflow))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    /// Largest absolute coordinate.
    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Coordinates of a point under every embedding, split by root type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub expanding: Vec<Complex64>,
    pub contracting: Vec<Complex64>,
}

/// Three-valued outcome of a box test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Inside,
    Outside,
    Ambiguous,
}

impl Membership {
    pub fn is_inside(self) -> bool {
        self == Membership::Inside
    }
}

/// Z[β] together with its ordered conjugates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NumberField {
    minpoly: MinimalPolynomial,
    roots: Vec<Complex64>,
    root_err: Vec<f64>,
    n_expanding: usize,
    companion: Vec<Vec<i64>>,
    classification: Classification,
}

/// Sort key: decreasing modulus, ties by argument in [0, 2π).
fn root_order(a: &Complex64, b: &Complex64) -> Ordering {
    let arg = |z: &Complex64| {
        let t = z.im.atan2(z.re);
        if t < 0.0 {
            t + std::f64::consts::TAU
        } else {
            t
        }
    };
    b.norm()
        .partial_cmp(&a.norm())
        .unwrap_or(Ordering::Equal)
        .then(arg(a).partial_cmp(&arg(b)).unwrap_or(Ordering::Equal))
}

/// Finds and classifies the conjugates of β. β_1 is the largest real root in (1, 2).
pub fn analyze_field(p: &MinimalPolynomial, root_tol: f64) -> Result<NumberField> {
    if !(root_tol > 0.0) {
        return Err(SpectraError::InvalidArgument("root tolerance must be positive".into()));
    }
    let mut roots = polished_roots(p)?;
    for r in &roots {
        let res = p.eval(*r).norm();
        let scale: f64 =
            p.coeffs().iter().enumerate().map(|(i, &c)| c.abs() as f64 * r.norm().powi((p.degree() - i) as i32)).sum();
        if res > root_tol.max(1e-10) * scale.max(1.0) {
            return Err(SpectraError::ConvergenceFailure(format!("root {r} has residual {res:e}")));
        }
    }
    for r in &roots {
        if (r.norm() - 1.0).abs() < UNIT_CIRCLE_TOL {
            return Err(SpectraError::NonHyperbolic { modulus: r.norm(), tol: UNIT_CIRCLE_TOL });
        }
    }
    let b1 = roots
        .iter()
        .enumerate()
        .filter(|(_, r)| r.im == 0.0 && r.re > 1.0 && r.re < 2.0)
        .max_by(|a, b| a.1.re.partial_cmp(&b.1.re).unwrap())
        .map(|(i, _)| i)
        .ok_or(SpectraError::NoRootInRange)?;
    let beta = roots.remove(b1);
    let mut expanding: Vec<Complex64> = roots.iter().copied().filter(|r| r.norm() > 1.0).collect();
    let mut contracting: Vec<Complex64> = roots.iter().copied().filter(|r| r.norm() < 1.0).collect();
    expanding.sort_by(root_order);
    contracting.sort_by(root_order);
    let n_expanding = 1 + expanding.len();
    let mut ordered = vec![beta];
    ordered.extend(expanding);
    ordered.extend(contracting);
    // pair complex conjugates exactly so that embeddings of conjugate roots are conjugate
    for i in 0..ordered.len() {
        if ordered[i].im < 0.0 {
            if let Some(j) =
                (0..ordered.len()).find(|&j| ordered[j].im > 0.0 && (ordered[j].conj() - ordered[i]).norm() < 1e-8)
            {
                ordered[i] = ordered[j].conj();
            }
        }
    }
    let root_err = ordered
        .iter()
        .map(|r| {
            let (v, dv) = p.eval_with_derivative(*r);
            let rounding: f64 = p.coeffs().iter().map(|&c| c.abs() as f64).sum::<f64>()
                * r.norm().max(1.0).powi(p.degree() as i32)
                * f64::EPSILON
                * (p.degree() as f64 + 1.0);
            2.0 * (v.norm() + rounding) / dv.norm() + 4.0 * f64::EPSILON * r.norm()
        })
        .collect();
    let d = p.degree();
    let mut companion = vec![vec![0i64; d]; d];
    for k in 1..d {
        companion[k][k - 1] = 1;
    }
    for k in 0..d {
        companion[k][d - 1] -= p.coeff_of(k);
    }
    let classification = if n_expanding == 1 { Classification::Pisot } else { Classification::HyperbolicNonPisot };
    Ok(NumberField { minpoly: p.clone(), roots: ordered, root_err, n_expanding, companion, classification })
}

impl NumberField {
    /// Parses and analyzes in one step with the default root tolerance.
    pub fn from_text(text: &str) -> Result<Self> {
        analyze_field(&parse_polynomial(text)?, ROOT_TOL)
    }

    pub fn minpoly(&self) -> &MinimalPolynomial {
        &self.minpoly
    }

    pub fn degree(&self) -> usize {
        self.minpoly.degree()
    }

    pub fn beta(&self) -> f64 {
        self.roots[0].re
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    /// A-priori bound on |stored root − true root|.
    pub fn root_error(&self, j: usize) -> f64 {
        self.root_err[j]
    }

    pub fn n_expanding(&self) -> usize {
        self.n_expanding
    }

    pub fn n_contracting(&self) -> usize {
        self.roots.len() - self.n_expanding
    }

    pub fn companion(&self) -> &[Vec<i64>] {
        &self.companion
    }

    pub fn classification(&self) -> Classification {
        self.classification
    }

    pub fn is_pisot(&self) -> bool {
        self.classification == Classification::Pisot
    }

    pub fn require_pisot(&self) -> Result<()> {
        if self.is_pisot() {
            Ok(())
        } else {
            Err(SpectraError::NotPisot)
        }
    }

    /// Indices of contracting roots with non-negative imaginary part, one per
    /// conjugate pair: the real coordinates of the contracting space.
    pub fn contracting_reps(&self) -> Vec<usize> {
        (self.n_expanding..self.roots.len()).filter(|&j| self.roots[j].im >= 0.0).collect()
    }

    /// Same for expanding roots (β_1 always first).
    pub fn expanding_reps(&self) -> Vec<usize> {
        (0..self.n_expanding).filter(|&j| self.roots[j].im >= 0.0).collect()
    }

    /// Half-width R/||β_j|−1| of the box factor at root j.
    pub fn box_bound(&self, j: usize, r: f64) -> f64 {
        r / (self.roots[j].norm() - 1.0).abs()
    }

    pub fn zero(&self) -> LatticePoint {
        LatticePoint::zero(self.degree())
    }

    /// Multiplication by β.
    pub fn mul_beta(&self, x: &LatticePoint) -> Result<LatticePoint> {
        let d = self.degree();
        let top = x.0[d - 1];
        let mut out = vec![0i64; d];
        for k in 0..d {
            let shifted = if k == 0 { 0 } else { x.0[k - 1] };
            let t = self.minpoly.coeff_of(k).checked_mul(top).ok_or(SpectraError::IntegerOverflow)?;
            out[k] = shifted.checked_sub(t).ok_or(SpectraError::IntegerOverflow)?;
        }
        Ok(LatticePoint(out))
    }

    /// Division by β, exact because the constant coefficient is ±1.
    pub fn div_beta(&self, x: &LatticePoint) -> Result<LatticePoint> {
        let d = self.degree();
        let c0 = self.minpoly.coeff_of(0);
        let z0 = x.0[0];
        let mut out = vec![0i64; d];
        for k in 0..d {
            let shifted = if k + 1 < d { x.0[k + 1] } else { 0 };
            // 1/β = −c0 (β^{d−1} + a_{d−1} β^{d−2} + … + a_1)
            let t = c0
                .checked_mul(z0)
                .and_then(|v| v.checked_mul(self.minpoly.coeff_of(k + 1)))
                .ok_or(SpectraError::IntegerOverflow)?;
            out[k] = shifted.checked_sub(t).ok_or(SpectraError::IntegerOverflow)?;
        }
        Ok(LatticePoint(out))
    }

    /// T_i(x) = βx + i.
    pub fn apply_t(&self, i: i64, x: &LatticePoint) -> Result<LatticePoint> {
        let mut y = self.mul_beta(x)?;
        y.0[0] = y.0[0].checked_add(i).ok_or(SpectraError::IntegerOverflow)?;
        Ok(y)
    }

    /// T_i^{-1}(x) = (x − i)/β.
    pub fn apply_t_inverse(&self, i: i64, x: &LatticePoint) -> Result<LatticePoint> {
        let mut y = x.clone();
        y.0[0] = y.0[0].checked_sub(i).ok_or(SpectraError::IntegerOverflow)?;
        self.div_beta(&y)
    }

    /// Applies T_{c_n} ∘ … ∘ T_{c_1} to x (the word is read left to right).
    pub fn apply_word(&self, word: &[i64], x: &LatticePoint) -> Result<LatticePoint> {
        word.iter().try_fold(x.clone(), |acc, &c| self.apply_t(c, &acc))
    }

    /// Σ z_k β_j^k for root j.
    pub fn coordinate(&self, j: usize, x: &LatticePoint) -> Complex64 {
        let r = self.roots[j];
        x.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * r + c as f64)
    }

    /// Bound on the floating error of `coordinate(j, x)`, including root error.
    pub fn coordinate_error(&self, j: usize, x: &LatticePoint) -> f64 {
        let m = self.roots[j].norm();
        let e = self.root_err[j];
        let mut value_scale = 0.0;
        let mut deriv = 0.0;
        for (k, &c) in x.0.iter().enumerate() {
            let c = c.abs() as f64;
            value_scale += c * m.powi(k as i32);
            if k > 0 {
                deriv += c * k as f64 * (m + e).powi(k as i32 - 1);
            }
        }
        deriv * e + value_scale * 4.0 * (x.0.len() as f64) * f64::EPSILON
    }

    /// Real value of x at β_1.
    pub fn value(&self, x: &LatticePoint) -> f64 {
        self.coordinate(0, x).re
    }

    pub fn embed(&self, x: &LatticePoint) -> Embedding {
        let all: Vec<Complex64> = (0..self.roots.len()).map(|j| self.coordinate(j, x)).collect();
        Embedding { expanding: all[..self.n_expanding].to_vec(), contracting: all[self.n_expanding..].to_vec() }
    }

    /// Decides whether coordinate j of x lies exactly on |·| = r/||β_j|−1|.
    /// Only real roots and integral r admit an exact answer; otherwise `None`.
    fn exactly_on_boundary(&self, j: usize, x: &LatticePoint, r: f64) -> Option<bool> {
        let root = self.roots[j];
        if root.im != 0.0 || r.fract() != 0.0 || r.abs() > 1e15 {
            return None;
        }
        // (|β_j| − 1)·x_j = ±r  ⟺  (β ∓ 1)·x = ±r in Z[β]
        let shift = if root.re > 0.0 { -1 } else { 1 };
        let mut w = self.mul_beta(x).ok()?;
        for (k, c) in x.0.iter().enumerate() {
            w.0[k] = w.0[k].checked_add(shift * c)?;
        }
        let n = r as i64;
        let rest_zero = w.0[1..].iter().all(|&c| c == 0);
        Some(rest_zero && (w.0[0] == n || w.0[0] == -n))
    }

    /// Membership in B_β(r) (open) or its closure, three-valued.
    pub fn in_box(&self, x: &LatticePoint, r: f64, closed: bool) -> Membership {
        self.in_box_coords(x, r, closed, 0..self.roots.len())
    }

    /// Box test restricted to the given root indices.
    pub fn in_box_coords(
        &self,
        x: &LatticePoint,
        r: f64,
        closed: bool,
        coords: impl IntoIterator<Item = usize>,
    ) -> Membership {
        let mut ambiguous = false;
        for j in coords {
            if self.roots[j].im < 0.0 {
                continue;
            }
            let bound = self.box_bound(j, r);
            let m = self.coordinate(j, x).norm();
            let exact = self.exactly_on_boundary(j, x, r);
            if exact == Some(true) {
                if closed {
                    continue;
                }
                return Membership::Outside;
            }
            let band = BOX_BAND.max(self.coordinate_error(j, x));
            if (m - bound).abs() <= band && exact.is_none() {
                ambiguous = true;
            } else if m > bound {
                return Membership::Outside;
            }
        }
        if ambiguous {
            Membership::Ambiguous
        } else {
            Membership::Inside
        }
    }
}

/// Free-function forms matching the operation names.
pub fn apply_t(field: &NumberField, i: i64, x: &LatticePoint) -> Result<LatticePoint> {
    field.apply_t(i, x)
}

pub fn apply_t_inverse(field: &NumberField, i: i64, x: &LatticePoint) -> Result<LatticePoint> {
    field.apply_t_inverse(i, x)
}

pub fn embed(field: &NumberField, x: &LatticePoint) -> Embedding {
    field.embed(x)
}

pub fn in_box(field: &NumberField, x: &LatticePoint, r: f64, closed: bool) -> Membership {
    field.in_box(x, r, closed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> NumberField {
        NumberField::from_text("x^2-x-1").unwrap()
    }

    #[test]
    fn parses_notations() {
        assert_eq!(parse_polynomial("x^2-x-1").unwrap().coeffs(), &[1, -1, -1]);
        assert_eq!(parse_polynomial("x^3-x^2-x-1").unwrap().coeffs(), &[1, -1, -1, -1]);
        assert_eq!(parse_polynomial("[1, 0, -1, -1]").unwrap().coeffs(), &[1, 0, -1, -1]);
        assert_eq!(parse_polynomial("1,-1,-1").unwrap().coeffs(), &[1, -1, -1]);
        assert_eq!(parse_polynomial("x^5 - x^4 - x^3 + x^2 - 1").unwrap().coeffs(), &[1, -1, -1, 1, 0, -1]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_polynomial("x^2-2x"), Err(SpectraError::BadConstantTerm(0))));
        assert!(matches!(parse_polynomial("2x^2-x-1"), Err(SpectraError::NotMonic(2))));
        assert!(matches!(parse_polynomial("x^2+"), Err(SpectraError::Parse(_))));
        // (x^2-x-1)(x+1) = x^3 - 2x - 1
        assert!(matches!(parse_polynomial("x^3-2x-1"), Err(SpectraError::Reducible(_))));
        assert!(matches!(parse_polynomial("x-1"), Err(SpectraError::DegreeTooSmall(1))));
    }

    #[test]
    fn text_round_trip() {
        for t in ["x^2-x-1", "x^5-x^4-x^3+x^2-1", "x^3-x-1"] {
            assert_eq!(parse_polynomial(t).unwrap().to_text(), t);
        }
    }

    #[test]
    fn golden_roots() {
        let f = golden();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((f.beta() - phi).abs() < 1e-14);
        assert!((f.roots()[1].re + 1.0 / phi).abs() < 1e-14);
        assert_eq!(f.classification(), Classification::Pisot);
        assert_eq!(f.n_contracting(), 1);
    }

    #[test]
    fn tribonacci_and_smallest_pisot() {
        let t = NumberField::from_text("x^3-x^2-x-1").unwrap();
        assert!((t.beta() - 1.839286755214161).abs() < 1e-12);
        assert!(t.roots()[1].im > 0.0);
        assert!((t.roots()[1] - t.roots()[2].conj()).norm() == 0.0);
        assert!(t.is_pisot());
        let p = NumberField::from_text("x^3-x-1").unwrap();
        assert!((p.beta() - 1.324717957244746).abs() < 1e-12);
    }

    #[test]
    fn no_root_in_range() {
        assert!(matches!(NumberField::from_text("x^2-3x+1"), Err(SpectraError::NoRootInRange)));
    }

    #[test]
    fn t_maps() {
        let f = golden();
        let one = f.apply_t(1, &f.zero()).unwrap();
        assert_eq!(one, LatticePoint(vec![1, 0]));
        // φ is (z0, z1) = (0, 1); φ² = φ + 1
        let phi = LatticePoint(vec![0, 1]);
        assert_eq!(f.apply_t(0, &phi).unwrap(), LatticePoint(vec![1, 1]));
        assert_eq!(f.apply_t_inverse(1, &one).unwrap(), f.zero());
        assert_eq!(f.apply_t_inverse(0, &LatticePoint(vec![1, 1])).unwrap(), phi);
        let t = NumberField::from_text("x^3-x^2-x-1").unwrap();
        assert_eq!(t.apply_t(-1, &t.zero()).unwrap(), LatticePoint(vec![-1, 0, 0]));
    }

    #[test]
    fn golden_embedding() {
        let f = golden();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let e = f.embed(&LatticePoint(vec![0, 1]));
        assert!((e.expanding[0].re - phi).abs() < 1e-14);
        assert!((e.contracting[0].re + 1.0 / phi).abs() < 1e-14);
        let e = f.embed(&LatticePoint(vec![1, 0]));
        assert_eq!(e.expanding[0].re, 1.0);
        assert_eq!(e.contracting[0].re, 1.0);
    }

    #[test]
    fn golden_boxes() {
        let f = golden();
        assert!(f.in_box(&f.zero(), 0.5, false).is_inside());
        // 2φ
        assert_eq!(f.in_box(&LatticePoint(vec![0, 2]), 1.0, false), Membership::Outside);
        assert!(f.in_box(&LatticePoint(vec![1, 0]), 1.0, false).is_inside());
        // 2 − φ has conjugate φ² exactly: on the boundary of the contracting factor
        let p = LatticePoint(vec![2, -1]);
        assert_eq!(f.in_box(&p, 1.0, false), Membership::Outside);
        assert_eq!(f.in_box(&p, 1.0, true), Membership::Inside);
        // φ has expanding coordinate φ = 1/(φ−1): boundary of the expanding factor
        let q = LatticePoint(vec![0, 1]);
        assert_eq!(f.in_box(&q, 1.0, false), Membership::Outside);
        assert_eq!(f.in_box(&q, 1.0, true), Membership::Inside);
    }

    #[test]
    fn companion_determinant_is_unit() {
        for t in ["x^2-x-1", "x^3-x^2-x-1", "x^5-x^4-x^3+x^2-1"] {
            let f = NumberField::from_text(t).unwrap();
            let d = f.degree();
            let m = DMatrix::<f64>::from_fn(d, d, |i, j| f.companion()[i][j] as f64);
            assert!((m.determinant().abs() - 1.0).abs() < 1e-9);
        }
    }
}
