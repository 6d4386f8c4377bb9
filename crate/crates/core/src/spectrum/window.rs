//! The contracting space K_c, the window R (attractor of S_i(y) = β_c·y + i),
//! exact membership of lattice projections in R, and cylinder covers.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DEFAULT_CAP, DIGITS};
use crate::algebraic::{LatticePoint, NumberField};
use crate::error::{Result, SpectraError};

/// Slack on the outer polydisc when pruning lattice searches.
pub(crate) const OUTER_TOL: f64 = 1e-9;

/// Contracting coordinates, one factor per real root or conjugate pair.
#[derive(Clone, Debug)]
pub struct ContractingSpace {
    reps: Vec<usize>,
    roots: Vec<Complex64>,
    moduli: Vec<f64>,
    outer: Vec<f64>,
}

impl ContractingSpace {
    pub fn new(field: &NumberField) -> Self {
        let reps = field.contracting_reps();
        let roots: Vec<Complex64> = reps.iter().map(|&j| field.roots()[j]).collect();
        let moduli: Vec<f64> = roots.iter().map(|r| r.norm()).collect();
        let outer = moduli.iter().map(|m| 1.0 / (1.0 - m)).collect();
        Self { reps, roots, moduli, outer }
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    /// Whether factor `j` is a real line (as opposed to a complex plane).
    pub fn is_real(&self, j: usize) -> bool {
        self.roots[j].im == 0.0
    }

    pub fn moduli(&self) -> &[f64] {
        &self.moduli
    }

    /// Radii of the polydisc centred at 0 that contains R.
    pub fn outer(&self) -> &[f64] {
        &self.outer
    }

    pub fn min_modulus(&self) -> f64 {
        self.moduli.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_modulus(&self) -> f64 {
        self.moduli.iter().cloned().fold(0.0, f64::max)
    }

    /// π_c(x).
    pub fn project(&self, field: &NumberField, x: &LatticePoint) -> Vec<Complex64> {
        self.reps.iter().map(|&j| field.coordinate(j, x)).collect()
    }

    /// S_i(y) = β_c·y + i.
    pub fn s_map(&self, i: i64, y: &[Complex64]) -> Vec<Complex64> {
        y.iter().zip(&self.roots).map(|(v, b)| b * v + i as f64).collect()
    }

    /// S_i^{-1}(y) = (y − i)/β_c.
    pub fn s_inv(&self, i: i64, y: &[Complex64]) -> Vec<Complex64> {
        y.iter().zip(&self.roots).map(|(v, b)| (v - i as f64) / b).collect()
    }

    pub fn in_outer(&self, y: &[Complex64], tol: f64) -> bool {
        y.iter().zip(&self.outer).all(|(v, r)| v.norm() <= r + tol)
    }

    /// Sup over factors of the distance from y to the outer polydisc.
    pub fn outer_dist(&self, y: &[Complex64]) -> f64 {
        y.iter().zip(&self.outer).map(|(v, r)| (v.norm() - r).max(0.0)).fold(0.0, f64::max)
    }

    /// Certifies y ∉ R: y leaves the outer polydisc, or every preimage
    /// S_i^{-1}(y) is certified outside at one less depth.
    pub fn excluded(&self, y: &[Complex64], depth: usize) -> bool {
        if !self.in_outer(y, OUTER_TOL) {
            return true;
        }
        depth > 0 && DIGITS.iter().all(|&i| self.excluded(&self.s_inv(i, y), depth - 1))
    }

    /// Lower bound on the sup-distance from y to R.
    pub fn dist_lower_bound(&self, y: &[Complex64], depth: usize) -> f64 {
        let o = self.outer_dist(y);
        if depth == 0 || o > 0.0 {
            return o;
        }
        let r = self.min_modulus();
        let inner = DIGITS
            .iter()
            .map(|&i| r * self.dist_lower_bound(&self.s_inv(i, y), depth - 1))
            .fold(f64::INFINITY, f64::min);
        o.max(inner)
    }
}

/// Exact test of π_c(x) ∈ R for lattice points, with memoisation.
///
/// The backward graph under T_i^{-1} restricted to the outer polydisc is finite;
/// π_c(x) ∈ R exactly when x has an infinite backward path, i.e. reaches a cycle.
#[derive(Debug)]
pub struct WindowOracle<'a> {
    field: &'a NumberField,
    space: ContractingSpace,
    cache: HashMap<LatticePoint, bool>,
    cap: usize,
}

impl<'a> WindowOracle<'a> {
    pub fn new(field: &'a NumberField) -> Self {
        Self::with_cap(field, DEFAULT_CAP)
    }

    pub fn with_cap(field: &'a NumberField, cap: usize) -> Self {
        Self { field, space: ContractingSpace::new(field), cache: HashMap::new(), cap }
    }

    pub fn space(&self) -> &ContractingSpace {
        &self.space
    }

    pub fn field(&self) -> &NumberField {
        self.field
    }

    pub fn project(&self, x: &LatticePoint) -> Vec<Complex64> {
        self.space.project(self.field, x)
    }

    /// Whether π_c(x) lies in the closed window R.
    pub fn contains(&mut self, x: &LatticePoint) -> Result<bool> {
        if let Some(&b) = self.cache.get(x) {
            return Ok(b);
        }
        if !self.space.in_outer(&self.project(x), OUTER_TOL) {
            self.cache.insert(x.clone(), false);
            return Ok(false);
        }
        let mut ids: HashMap<LatticePoint, usize> = HashMap::new();
        let mut nodes = vec![x.clone()];
        let mut children: Vec<Vec<usize>> = Vec::new();
        ids.insert(x.clone(), 0);
        let mut k = 0;
        while k < nodes.len() {
            let p = nodes[k].clone();
            let mut kids = Vec::with_capacity(3);
            for &i in &DIGITS {
                let q = self.field.apply_t_inverse(i, &p)?;
                if let Some(&id) = ids.get(&q) {
                    kids.push(id);
                    continue;
                }
                let known = self.cache.get(&q).copied();
                if known == Some(false) {
                    continue;
                }
                if known.is_none() && !self.space.in_outer(&self.project(&q), OUTER_TOL) {
                    continue;
                }
                let id = nodes.len();
                ids.insert(q.clone(), id);
                nodes.push(q);
                kids.push(id);
                if nodes.len() > self.cap {
                    return Err(SpectraError::PatchTooLarge { cap: self.cap });
                }
            }
            children.push(kids);
            k += 1;
            // a node already known to be inside needs no further expansion
            while k < nodes.len() && self.cache.get(&nodes[k]) == Some(&true) {
                children.push(vec![k]);
                k += 1;
            }
        }
        // greatest fixed point: drop nodes without surviving children
        let n = nodes.len();
        let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut live_kids: Vec<usize> = vec![0; n];
        for (p, kids) in children.iter().enumerate() {
            live_kids[p] = kids.len();
            for &c in kids {
                parents[c].push(p);
            }
        }
        let mut alive = vec![true; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| live_kids[i] == 0).collect();
        while let Some(d) = queue.pop_front() {
            if !alive[d] {
                continue;
            }
            alive[d] = false;
            for &p in &parents[d] {
                live_kids[p] -= 1;
                if live_kids[p] == 0 && alive[p] {
                    queue.push_back(p);
                }
            }
        }
        for (p, a) in nodes.into_iter().zip(alive.iter()) {
            self.cache.insert(p, *a);
        }
        Ok(alive[0])
    }

    /// Preimages T_i^{-1}(x) whose projection stays in R, with their digits.
    pub fn admissible_children(&mut self, x: &LatticePoint) -> Result<Vec<(i64, LatticePoint)>> {
        let mut out = Vec::new();
        for &i in &DIGITS {
            let q = self.field.apply_t_inverse(i, x)?;
            if self.contains(&q)? {
                out.push((i, q));
            }
        }
        Ok(out)
    }
}

/// S_{a_1}∘…∘S_{a_n}(R) with its certified outer polydisc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub word: Vec<i64>,
    pub center: Vec<Complex64>,
    pub radius: Vec<f64>,
}

/// Outer cover of R by the depth-n cylinders.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WindowApprox {
    pub depth: usize,
    pub cylinders: Vec<Cylinder>,
    /// Radii of the polydisc about 0 that contains R.
    pub outer: Vec<f64>,
}

impl WindowApprox {
    /// Whether y lies in some cylinder's outer polydisc.
    pub fn covers(&self, y: &[Complex64]) -> bool {
        self.cylinders
            .iter()
            .any(|c| y.iter().zip(&c.center).zip(&c.radius).all(|((v, z), r)| (v - z).norm() <= r + OUTER_TOL))
    }

    pub fn max_radius(&self) -> f64 {
        self.cylinders.iter().flat_map(|c| c.radius.iter().cloned()).fold(0.0, f64::max)
    }
}

/// Depth-n cylinder cover of R. Words with equal centres are merged exactly:
/// S_a(0) is the contracting projection of the lattice point T_{a_1}∘…∘T_{a_n}(0),
/// so equal centres are equal lattice points.
pub fn approximate_attractor(field: &NumberField, depth: usize) -> Result<WindowApprox> {
    approximate_attractor_with(field, depth, DEFAULT_CAP)
}

pub fn approximate_attractor_with(field: &NumberField, depth: usize, cap: usize) -> Result<WindowApprox> {
    if depth == 0 {
        return Err(SpectraError::InvalidArgument("depth must be at least 1".into()));
    }
    let space = ContractingSpace::new(field);
    let mut level: BTreeMap<LatticePoint, Vec<i64>> = BTreeMap::new();
    level.insert(field.zero(), Vec::new());
    for _ in 0..depth {
        let mut next: BTreeMap<LatticePoint, Vec<i64>> = BTreeMap::new();
        for (p, w) in &level {
            for &a in &DIGITS {
                let q = field.apply_t(a, p)?;
                next.entry(q).or_insert_with(|| {
                    let mut v = Vec::with_capacity(w.len() + 1);
                    v.push(a);
                    v.extend_from_slice(w);
                    v
                });
            }
        }
        if next.len() > cap {
            return Err(SpectraError::DepthTooLarge { depth });
        }
        level = next;
    }
    let radius: Vec<f64> = space.outer().iter().zip(space.moduli()).map(|(o, m)| o * m.powi(depth as i32)).collect();
    let cylinders = level
        .into_iter()
        .map(|(p, word)| Cylinder { word, center: space.project(field, &p), radius: radius.clone() })
        .collect();
    Ok(WindowApprox { depth, cylinders, outer: space.outer().to_vec() })
}

/// Outcome of locating a point in the depth-n cylinder partition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CylinderCode {
    Word(Vec<i64>),
    Ambiguous,
}

/// A word a_1..a_n with π_c(x) ∈ S_{a_1}∘…∘S_{a_n}(R). Membership is decided
/// exactly through the lattice, preferring at each step the digit whose
/// preimage lies closest to the centre of the window.
pub fn cylinder_of(field: &NumberField, x: &LatticePoint, n: usize) -> Result<CylinderCode> {
    let mut oracle = WindowOracle::new(field);
    cylinder_of_with(&mut oracle, x, n)
}

pub fn cylinder_of_with(oracle: &mut WindowOracle<'_>, x: &LatticePoint, n: usize) -> Result<CylinderCode> {
    if !oracle.contains(x)? {
        let y = oracle.project(x);
        return Err(SpectraError::OutOfWindow(y.first().map(|c| c.norm()).unwrap_or(0.0)));
    }
    let mut word = Vec::with_capacity(n);
    let mut cur = x.clone();
    for _ in 0..n {
        let kids = oracle.admissible_children(&cur)?;
        let best = kids.into_iter().min_by(|a, b| {
            let na = oracle.space.outer_scaled_norm(&oracle.project(&a.1));
            let nb = oracle.space.outer_scaled_norm(&oracle.project(&b.1));
            na.total_cmp(&nb)
        });
        match best {
            Some((i, q)) => {
                word.push(i);
                cur = q;
            }
            None => return Ok(CylinderCode::Ambiguous),
        }
    }
    Ok(CylinderCode::Word(word))
}

impl ContractingSpace {
    /// Sup over factors of |y_j| / outer_j.
    pub fn outer_scaled_norm(&self, y: &[Complex64]) -> f64 {
        y.iter().zip(&self.outer).map(|(v, r)| v.norm() / r).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> NumberField {
        NumberField::from_text("x^2-x-1").unwrap()
    }

    #[test]
    fn golden_window_is_the_interval() {
        let f = golden();
        let mut o = WindowOracle::new(&f);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        // scan lattice points with small coordinates and compare with |π_c| ≤ φ²
        for a in -6..=6 {
            for b in -6..=6 {
                let x = LatticePoint(vec![a, b]);
                let y = a as f64 - b as f64 / phi;
                let expect = y.abs() <= phi * phi + 1e-12;
                assert_eq!(o.contains(&x).unwrap(), expect, "{x}");
            }
        }
    }

    #[test]
    fn golden_cover() {
        let f = golden();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let w1 = approximate_attractor(&f, 1).unwrap();
        assert_eq!(w1.cylinders.len(), 3);
        for c in &w1.cylinders {
            assert!((c.center[0].re - c.word[0] as f64).abs() < 1e-15);
            assert!((c.radius[0] - phi).abs() < 1e-12);
        }
        for n in 1..=12 {
            let w = approximate_attractor(&f, n).unwrap();
            assert!(w.max_radius() <= phi * phi * phi.powi(-(n as i32)) + 1e-12);
            for y in [-phi * phi, -1.0, 0.0, 0.3, phi * phi] {
                assert!(w.covers(&[Complex64::new(y, 0.0)]));
            }
        }
    }

    #[test]
    fn golden_cylinders() {
        let f = golden();
        assert_eq!(cylinder_of(&f, &f.zero(), 1).unwrap(), CylinderCode::Word(vec![0]));
        assert_eq!(cylinder_of(&f, &LatticePoint(vec![1, 0]), 1).unwrap(), CylinderCode::Word(vec![1]));
        // 1 − φ has conjugate 1 + 1/φ = φ
        let x = LatticePoint(vec![1, -1]);
        let CylinderCode::Word(w) = cylinder_of(&f, &x, 3).unwrap() else { panic!("ambiguous") };
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        // check π_c(x) = S_w(y) for some y ∈ [−φ², φ²]
        let mut y = phi;
        for &a in &w {
            y = (y - a as f64) * -phi;
        }
        assert!(y.abs() <= phi * phi + 1e-9);
    }

    #[test]
    fn exclusion_and_distance() {
        let f = golden();
        let s = ContractingSpace::new(&f);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(s.excluded(&[Complex64::new(phi * phi + 0.01, 0.0)], 10));
        assert!(!s.excluded(&[Complex64::new(2.0, 0.0)], 10));
        let d = s.dist_lower_bound(&[Complex64::new(3.0, 0.0)], 10);
        assert!(d > 0.0 && d <= 3.0 - phi * phi + 1e-12);
    }
}
