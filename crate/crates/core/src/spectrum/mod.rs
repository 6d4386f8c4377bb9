//! Finite pieces of the spectrum: box patches, the interval set V, the
//! difference set Δ, codes of points, and the contracting window.

mod condition1;
mod window;

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::algebraic::{LatticePoint, Membership, NumberField};
use crate::error::{Result, SpectraError};

pub use condition1::{check_condition1, check_condition1_with_lhs, Condition1Report, Condition1Verdict, PointStatus};
pub use window::{
    approximate_attractor, cylinder_of, ContractingSpace, Cylinder, CylinderCode, WindowApprox, WindowOracle,
};

/// Digits of the spectrum alphabet, in the order used for edge slots.
pub const DIGITS: [i64; 3] = [-1, 0, 1];
/// Differences of two digits.
pub const DIFF_DIGITS: [i64; 5] = [-2, -1, 0, 1, 2];
/// Default cap on the number of points any enumeration may produce.
pub const DEFAULT_CAP: usize = 10_000_000;
/// Slack added to I_β when enumerating the interval set V for the dimension table.
pub const TABLE_PAD: f64 = 0.01;

/// X̄(β) ∩ B_β(R) with its T_i edges.
#[derive(Clone, Debug)]
pub struct SpectrumPatch {
    field: NumberField,
    r: f64,
    closed: bool,
    points: Vec<LatticePoint>,
    layers: Vec<usize>,
    edges: Vec<[Option<usize>; 3]>,
    index: HashMap<LatticePoint, usize>,
}

/// Serializable view of a patch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatchExport {
    pub polynomial: String,
    pub r: f64,
    pub closed: bool,
    pub points: Vec<Vec<i64>>,
    /// Real value of each point at β_1.
    pub values: Vec<f64>,
    /// Contracting coordinates as (re, im) pairs.
    pub contracting: Vec<Vec<(f64, f64)>>,
    /// For each point, target index under T_{-1}, T_0, T_1.
    pub edges: Vec<[Option<usize>; 3]>,
}

impl SpectrumPatch {
    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// BFS layer (word length of a shortest code) of point `i`.
    pub fn layer(&self, i: usize) -> usize {
        self.layers[i]
    }

    /// Edge targets of point `i` for digits -1, 0, 1.
    pub fn edges(&self, i: usize) -> [Option<usize>; 3] {
        self.edges[i]
    }

    pub fn index_of(&self, x: &LatticePoint) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn contains(&self, x: &LatticePoint) -> bool {
        self.index.contains_key(x)
    }

    pub fn export(&self) -> PatchExport {
        let reps = self.field.contracting_reps();
        PatchExport {
            polynomial: self.field.minpoly().to_text(),
            r: self.r,
            closed: self.closed,
            points: self.points.iter().map(|p| p.0.clone()).collect(),
            values: self.points.iter().map(|p| self.field.value(p)).collect(),
            contracting: self
                .points
                .iter()
                .map(|p| {
                    reps.iter()
                        .map(|&j| {
                            let c = self.field.coordinate(j, p);
                            (c.re, c.im)
                        })
                        .collect()
                })
                .collect(),
            edges: self.edges.clone(),
        }
    }
}

/// Result of a constrained BFS: points in layer-then-lexicographic order.
struct Closure {
    points: Vec<LatticePoint>,
    layers: Vec<usize>,
    ambiguous: Vec<LatticePoint>,
}

/// BFS from 0 under T_i for the given digits, keeping points accepted by `keep`.
/// Each layer is sorted lexicographically before the next one is expanded.
fn forward_closure<F>(field: &NumberField, digits: &[i64], cap: usize, mut keep: F) -> Result<Closure>
where
    F: FnMut(&LatticePoint) -> Membership,
{
    let mut seen: std::collections::HashSet<LatticePoint> = std::collections::HashSet::new();
    let zero = field.zero();
    seen.insert(zero.clone());
    let mut points = vec![zero.clone()];
    let mut layers = vec![0];
    let mut ambiguous = Vec::new();
    let mut frontier = vec![zero];
    let mut depth = 0;
    while !frontier.is_empty() {
        depth += 1;
        let mut next = BTreeSet::new();
        for p in &frontier {
            for &i in digits {
                let q = field.apply_t(i, p)?;
                if seen.contains(&q) || next.contains(&q) {
                    continue;
                }
                match keep(&q) {
                    Membership::Inside => {
                        next.insert(q);
                    }
                    Membership::Ambiguous => {
                        ambiguous.push(q.clone());
                        next.insert(q);
                    }
                    Membership::Outside => {}
                }
            }
        }
        if points.len() + next.len() > cap {
            return Err(SpectraError::PatchTooLarge { cap });
        }
        for q in &next {
            seen.insert(q.clone());
            points.push(q.clone());
            layers.push(depth);
        }
        frontier = next.into_iter().collect();
    }
    Ok(Closure { points, layers, ambiguous })
}

fn build_patch(field: &NumberField, r: f64, closed: bool, c: Closure) -> Result<SpectrumPatch> {
    let index: HashMap<LatticePoint, usize> = c.points.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    let edges = c
        .points
        .iter()
        .map(|p| {
            let mut e = [None; 3];
            for (slot, &i) in DIGITS.iter().enumerate() {
                e[slot] = index.get(&field.apply_t(i, p)?).copied();
            }
            Ok(e)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumPatch { field: field.clone(), r, closed, points: c.points, layers: c.layers, edges, index })
}

/// X̄(β) ∩ B_β(R) by BFS from the origin. Leaving the box is irreversible for
/// R ≥ 1, so the BFS is complete.
pub fn enumerate_patch(field: &NumberField, r: f64) -> Result<SpectrumPatch> {
    enumerate_patch_with(field, r, false, DEFAULT_CAP)
}

/// Patch enumeration with an explicit open/closed box and point cap.
/// A point inside the tolerance band of the box boundary is an error.
pub fn enumerate_patch_with(field: &NumberField, r: f64, closed: bool, cap: usize) -> Result<SpectrumPatch> {
    let (patch, ambiguous) = enumerate_patch_lenient(field, r, closed, cap)?;
    if let Some(p) = ambiguous.into_iter().next() {
        return Err(SpectraError::BoundaryAmbiguous(p));
    }
    Ok(patch)
}

/// Like [`enumerate_patch_with`] but keeps boundary-ambiguous points and reports them.
pub fn enumerate_patch_lenient(
    field: &NumberField,
    r: f64,
    closed: bool,
    cap: usize,
) -> Result<(SpectrumPatch, Vec<LatticePoint>)> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(SpectraError::InvalidArgument(format!("box radius must be at least 1, got {r}")));
    }
    let c = forward_closure(field, &DIGITS, cap, |q| field.in_box(q, r, closed))?;
    let ambiguous = c.ambiguous.clone();
    Ok((build_patch(field, r, closed, c)?, ambiguous))
}

/// X(β) ∩ I_β widened by [`TABLE_PAD`]; the point set behind the dimension table.
pub fn compute_v_interval(field: &NumberField) -> Result<Vec<LatticePoint>> {
    compute_v_interval_padded(field, TABLE_PAD)
}

/// X(β) ∩ [−1/(β−1) − pad, 1/(β−1) + pad], ordered with 0 first and then by value.
/// With `pad == 0` the closed interval is tested exactly.
pub fn compute_v_interval_padded(field: &NumberField, pad: f64) -> Result<Vec<LatticePoint>> {
    field.require_pisot()?;
    if !(pad >= 0.0) {
        return Err(SpectraError::InvalidArgument("pad must be non-negative".into()));
    }
    let h = 1.0 / (field.beta() - 1.0);
    let c = forward_closure(field, &DIGITS, DEFAULT_CAP, |q| {
        if pad == 0.0 {
            match field.in_box_coords(q, 1.0, true, [0]) {
                Membership::Outside => Membership::Outside,
                _ => Membership::Inside,
            }
        } else if field.value(q).abs() <= h + pad {
            Membership::Inside
        } else {
            Membership::Outside
        }
    })?;
    let mut rest: Vec<(f64, LatticePoint)> = c.points.into_iter().skip(1).map(|p| (field.value(&p), p)).collect();
    rest.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut out = vec![field.zero()];
    out.extend(rest.into_iter().map(|(_, p)| p));
    Ok(out)
}

/// Differences of spectrum points that can merge in the future.
#[derive(Clone, Debug)]
pub struct DeltaSet {
    field: NumberField,
    elements: Vec<LatticePoint>,
    index: HashMap<LatticePoint, usize>,
}

impl DeltaSet {
    /// Wraps an explicit element list (first element must be 0).
    pub fn from_elements(field: &NumberField, elements: Vec<LatticePoint>) -> Result<Self> {
        if elements.first().map(|p| !p.is_zero()).unwrap_or(true) {
            return Err(SpectraError::InvalidArgument("first element must be 0".into()));
        }
        let index = elements.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        Ok(Self { field: field.clone(), elements, index })
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn elements(&self) -> &[LatticePoint] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, x: &LatticePoint) -> Option<usize> {
        self.index.get(x).copied()
    }
}

/// Points of cl B_β(2) reachable from 0 under T_j, j ∈ {−2..2}, that can also
/// return to 0. Ordered with 0 first, then lexicographically.
pub fn compute_delta(field: &NumberField) -> Result<DeltaSet> {
    compute_delta_with(field, DEFAULT_CAP)
}

pub fn compute_delta_with(field: &NumberField, cap: usize) -> Result<DeltaSet> {
    let c = forward_closure(field, &DIFF_DIGITS, cap, |q| field.in_box(q, 2.0, true))?;
    let index: HashMap<&LatticePoint, usize> = c.points.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); c.points.len()];
    for (i, p) in c.points.iter().enumerate() {
        for &j in &DIFF_DIGITS {
            if let Some(&t) = index.get(&field.apply_t(j, p)?) {
                preds[t].push(i);
            }
        }
    }
    let mut back = vec![false; c.points.len()];
    back[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(t) = queue.pop_front() {
        for &s in &preds[t] {
            if !back[s] {
                back[s] = true;
                queue.push_back(s);
            }
        }
    }
    let mut rest: Vec<LatticePoint> =
        c.points.iter().enumerate().skip(1).filter(|(i, _)| back[*i]).map(|(_, p)| p.clone()).collect();
    rest.sort();
    let mut elements = vec![field.zero()];
    elements.extend(rest);
    DeltaSet::from_elements(field, elements)
}

/// Points T_{e_m}∘…∘T_{e_1}(0), e_i ∈ {−2..2}, all of whose partial images have
/// real value in the open interval (−2/(β−1), 2/(β−1)): the state space of the
/// golden-mean counting argument, which must agree with Δ.
pub fn difference_interval_set(field: &NumberField) -> Result<Vec<LatticePoint>> {
    let c = forward_closure(field, &DIFF_DIGITS, DEFAULT_CAP, |q| match field.in_box_coords(q, 2.0, false, [0]) {
        Membership::Ambiguous => Membership::Inside,
        m => m,
    })?;
    let mut rest = c.points[1..].to_vec();
    rest.sort();
    let mut out = vec![field.zero()];
    out.extend(rest);
    Ok(out)
}

/// A shortest word c_1..c_n with x = T_{c_n}∘…∘T_{c_1}(0), or `None` when x ∉ X̄(β).
pub fn code_of(field: &NumberField, x: &LatticePoint) -> Result<Option<Vec<i64>>> {
    let space = ContractingSpace::new(field);
    if x.is_zero() {
        return Ok(Some(Vec::new()));
    }
    if !space.in_outer(&space.project(field, x), window::OUTER_TOL) {
        return Ok(None);
    }
    let mut parent: HashMap<LatticePoint, (LatticePoint, i64)> = HashMap::new();
    let mut queue = VecDeque::from([x.clone()]);
    parent.insert(x.clone(), (x.clone(), 0));
    while let Some(p) = queue.pop_front() {
        for &i in &DIGITS {
            let q = field.apply_t_inverse(i, &p)?;
            if parent.contains_key(&q) {
                continue;
            }
            if !space.in_outer(&space.project(field, &q), window::OUTER_TOL) {
                continue;
            }
            parent.insert(q.clone(), (p.clone(), i));
            if q.is_zero() {
                // walk back to x collecting the digits; they come out in forward order
                let mut word = Vec::new();
                let mut cur = q;
                while &cur != x {
                    let (next, d) = parent[&cur].clone();
                    word.push(d);
                    cur = next;
                }
                return Ok(Some(word));
            }
            if parent.len() > DEFAULT_CAP {
                return Err(SpectraError::PatchTooLarge { cap: DEFAULT_CAP });
            }
            queue.push_back(q);
        }
    }
    Ok(None)
}

/// Applies a code c_1..c_n to 0.
pub fn point_of_code(field: &NumberField, word: &[i64]) -> Result<LatticePoint> {
    if let Some(&d) = word.iter().find(|d| !DIGITS.contains(d)) {
        return Err(SpectraError::BadDigit(d));
    }
    field.apply_word(word, &field.zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> NumberField {
        NumberField::from_text("x^2-x-1").unwrap()
    }

    #[test]
    fn unit_box_patch_for_golden() {
        let f = golden();
        let p = enumerate_patch(&f, 1.0).unwrap();
        assert_eq!(p.points()[0], f.zero());
        assert!(p.contains(&LatticePoint(vec![1, 0])));
        assert!(p.contains(&LatticePoint(vec![-1, 0])));
        assert!(matches!(enumerate_patch(&f, 0.5), Err(SpectraError::InvalidArgument(_))));
    }

    #[test]
    fn patch_is_closed_under_in_box_steps() {
        for poly in ["x^2-x-1", "x^3-x^2-x-1"] {
            let f = NumberField::from_text(poly).unwrap();
            let p = enumerate_patch(&f, 2.0).unwrap();
            for (k, x) in p.points().iter().enumerate() {
                for (slot, &i) in DIGITS.iter().enumerate() {
                    let y = f.apply_t(i, x).unwrap();
                    let inside = f.in_box(&y, 2.0, false).is_inside();
                    assert_eq!(inside, p.edges(k)[slot].is_some());
                }
            }
        }
    }

    #[test]
    fn patch_order_is_layer_then_lex() {
        let f = NumberField::from_text("x^3-x^2-x-1").unwrap();
        let p = enumerate_patch(&f, 2.0).unwrap();
        for k in 1..p.len() {
            let a = (p.layer(k - 1), &p.points()[k - 1]);
            let b = (p.layer(k), &p.points()[k]);
            assert!(a < b);
        }
    }

    #[test]
    fn interval_sets() {
        let t = NumberField::from_text("x^3-x^2-x-1").unwrap();
        assert_eq!(compute_v_interval(&t).unwrap().len(), 7);
        let g = golden();
        let v = compute_v_interval_padded(&g, 0.0).unwrap();
        // X(φ) ∩ [−φ, φ] = {0, ±(φ−1), ±1, ±φ}
        assert_eq!(v.len(), 7);
        assert!(v[0].is_zero());
        let values: Vec<f64> = v[1..].iter().map(|p| g.value(p)).collect();
        assert!(values.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn golden_delta_matches_interval_construction() {
        let f = golden();
        let d = compute_delta(&f).unwrap();
        assert_eq!(d.len(), 29);
        let v = difference_interval_set(&f).unwrap();
        assert_eq!(v, d.elements());
        assert!(d.index_of(&LatticePoint(vec![-1, 1])).is_some());
    }

    #[test]
    fn codes_round_trip() {
        let f = NumberField::from_text("x^3-x^2-x-1").unwrap();
        let p = enumerate_patch(&f, 2.0).unwrap();
        for x in p.points() {
            let w = code_of(&f, x).unwrap().expect("patch point has a code");
            assert_eq!(&point_of_code(&f, &w).unwrap(), x);
        }
        // π_c(3) = 3 lies outside the golden window
        let g = golden();
        assert_eq!(code_of(&g, &LatticePoint(vec![3, 0])).unwrap(), None);
        assert_eq!(code_of(&g, &LatticePoint(vec![2, 0])).unwrap().map(|w| w.len()), Some(3));
    }
}
