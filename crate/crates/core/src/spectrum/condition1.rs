//! Condition 1: X̄(β) ∩ cl B_β(1) equals the set of lattice points of cl B_β(1)
//! whose contracting projection lies in the interior of R.
//!
//! Membership in the closed window is exact (see [`WindowOracle`]). Interior and
//! boundary points are then separated by two certificates:
//!
//! * interior: a union K of polydiscs about projections of spectrum points with
//!   K ⊂ ∪ S_i(K) lies inside R, and so do all its forward images. A point whose
//!   neighbourhood is covered by such polydiscs is interior.
//! * boundary: lattice perturbations y + β^n v, whose projections tend to
//!   π_c(y), are shown to lie outside R for every large n by induction over the
//!   backward graph of y.

use std::collections::{BTreeSet, HashMap, HashSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::window::{ContractingSpace, WindowOracle, OUTER_TOL};
use super::{enumerate_patch_lenient, forward_closure, DEFAULT_CAP, DIGITS};
use crate::algebraic::{LatticePoint, Membership, NumberField};
use crate::error::{Result, SpectraError};

const MAX_DEPTH: usize = 40;
/// Expanding-coordinate bounds and relative disc radii tried for the core.
const CORE_ATTEMPTS: [(f64, f64); 4] = [(20.0, 0.1), (40.0, 0.06), (60.0, 0.04), (100.0, 0.025)];
/// Half-widths (relative to the outer radii) of the neighbourhoods tested for cover.
const NEIGHBOURHOODS: [f64; 3] = [0.02, 0.005, 0.001];
const MAX_BOXES: usize = 400_000;
/// Exponents tried for the base case of the boundary certificate.
const PERTURBATION_TRIES: usize = 4;
/// Largest period of the residue classes used by the boundary certificate.
const MAX_PERIOD: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition1Verdict {
    Holds,
    Fails(LatticePoint),
    Undetermined(Vec<LatticePoint>),
}

/// Classification of a candidate lattice point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointStatus {
    /// π_c(x) ∉ R.
    OutsideWindow,
    /// π_c(x) ∈ ∂R, certified.
    Boundary,
    /// π_c(x) ∈ R°, certified.
    Interior,
    /// In R but neither certificate succeeded, or the box test was ambiguous.
    Unresolved,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidateReport {
    pub point: LatticePoint,
    pub in_lhs: bool,
    pub status: PointStatus,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Condition1Report {
    pub verdict: Condition1Verdict,
    pub depth: usize,
    pub lhs_size: usize,
    pub rhs_size: usize,
    pub candidates: Vec<CandidateReport>,
}

impl Condition1Report {
    pub fn undetermined_count(&self) -> usize {
        match &self.verdict {
            Condition1Verdict::Undetermined(v) => v.len(),
            _ => self.candidates.iter().filter(|c| c.status == PointStatus::Unresolved).count(),
        }
    }
}

/// Checks Condition 1 with certificates searched to the given depth.
pub fn check_condition1(field: &NumberField, depth: usize) -> Result<Condition1Report> {
    let (patch, ambiguous) = enumerate_patch_lenient(field, 1.0, true, DEFAULT_CAP)?;
    let lhs: Vec<LatticePoint> = patch.points().to_vec();
    run(field, depth, lhs, ambiguous)
}

/// As [`check_condition1`] but with a caller-supplied left-hand side.
pub fn check_condition1_with_lhs(
    field: &NumberField,
    depth: usize,
    lhs: Vec<LatticePoint>,
) -> Result<Condition1Report> {
    run(field, depth, lhs, Vec::new())
}

fn run(
    field: &NumberField,
    depth: usize,
    lhs: Vec<LatticePoint>,
    lhs_ambiguous: Vec<LatticePoint>,
) -> Result<Condition1Report> {
    if depth == 0 {
        return Err(SpectraError::InvalidArgument("depth must be at least 1".into()));
    }
    if depth > MAX_DEPTH {
        return Err(SpectraError::DepthTooLarge { depth });
    }
    let lhs_set: HashSet<LatticePoint> = lhs.iter().cloned().collect();
    let mut box_ambiguous: HashSet<LatticePoint> = lhs_ambiguous.into_iter().collect();
    let mut candidates: BTreeSet<LatticePoint> = lhs.iter().cloned().collect();
    for (p, m) in scan_closed_unit_box(field)? {
        if m == Membership::Ambiguous {
            box_ambiguous.insert(p.clone());
        }
        candidates.insert(p);
    }

    let mut cert = Certifier::new(field, depth);
    let mut reports = Vec::with_capacity(candidates.len());
    for p in candidates {
        let in_lhs = lhs_set.contains(&p);
        let status = cert.classify(&p)?;
        reports.push(CandidateReport { point: p, in_lhs, status });
    }
    for c in reports.iter_mut() {
        if box_ambiguous.contains(&c.point) && c.status != PointStatus::OutsideWindow {
            c.status = PointStatus::Unresolved;
        }
    }

    let witness = reports.iter().find(|c| match c.status {
        PointStatus::Interior => !c.in_lhs,
        PointStatus::Boundary | PointStatus::OutsideWindow => c.in_lhs,
        PointStatus::Unresolved => false,
    });
    let unresolved: Vec<LatticePoint> =
        reports.iter().filter(|c| c.status == PointStatus::Unresolved).map(|c| c.point.clone()).collect();
    let verdict = match (witness, unresolved.is_empty()) {
        (Some(w), _) => Condition1Verdict::Fails(w.point.clone()),
        (None, true) => Condition1Verdict::Holds,
        (None, false) => Condition1Verdict::Undetermined(unresolved),
    };
    let rhs_size = reports.iter().filter(|c| c.status == PointStatus::Interior).count();
    Ok(Condition1Report { verdict, depth, lhs_size: lhs.len(), rhs_size, candidates: reports })
}

/// All lattice points of cl B_β(1), found by scanning the integer box that the
/// inverse embedding maps the closed box into (with a margin of one).
fn scan_closed_unit_box(field: &NumberField) -> Result<Vec<(LatticePoint, Membership)>> {
    let d = field.degree();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut bounds = Vec::with_capacity(d);
    for (j, root) in field.roots().iter().enumerate() {
        if root.im < 0.0 {
            continue;
        }
        let b = field.box_bound(j, 1.0);
        let powers: Vec<Complex64> = (0..d).map(|k| root.powu(k as u32)).collect();
        rows.push(powers.iter().map(|z| z.re).collect());
        bounds.push(b);
        if root.im > 0.0 {
            rows.push(powers.iter().map(|z| z.im).collect());
            bounds.push(b);
        }
    }
    let m = DMatrix::from_fn(d, d, |i, k| rows[i][k]);
    let inv = m.try_inverse().ok_or_else(|| SpectraError::ConvergenceFailure("singular embedding matrix".into()))?;
    let limits: Vec<i64> = (0..d)
        .map(|k| {
            let s: f64 = (0..d).map(|i| inv[(k, i)].abs() * bounds[i]).sum();
            s.ceil() as i64 + 1
        })
        .collect();
    let total: f64 = limits.iter().map(|&l| (2 * l + 1) as f64).product();
    if total > 5e7 {
        return Err(SpectraError::TooLarge(total as usize));
    }
    let mut out = Vec::new();
    let mut z: Vec<i64> = limits.iter().map(|l| -l).collect();
    loop {
        let p = LatticePoint(z.clone());
        match field.in_box(&p, 1.0, true) {
            Membership::Outside => {}
            m => out.push((p, m)),
        }
        let mut k = 0;
        while k < d {
            z[k] += 1;
            if z[k] <= limits[k] {
                break;
            }
            z[k] = -limits[k];
            k += 1;
        }
        if k == d {
            break;
        }
    }
    Ok(out)
}

/// Polydisc in the contracting space: one radius per factor.
#[derive(Clone, Debug)]
struct Disc {
    center: Vec<Complex64>,
    radius: Vec<f64>,
}

/// Axis-aligned box: per factor, [re_lo, re_hi, im_lo, im_hi].
type Cell = Vec<[f64; 4]>;

fn corners(c: &[f64; 4], real: bool) -> Vec<Complex64> {
    if real {
        vec![Complex64::new(c[0], 0.0), Complex64::new(c[1], 0.0)]
    } else {
        vec![
            Complex64::new(c[0], c[2]),
            Complex64::new(c[1], c[2]),
            Complex64::new(c[0], c[3]),
            Complex64::new(c[1], c[3]),
        ]
    }
}

fn nearest_dist(c: &[f64; 4], p: Complex64) -> f64 {
    let x = p.re.clamp(c[0], c[1]);
    let y = p.im.clamp(c[2], c[3]);
    (Complex64::new(x, y) - p).norm()
}

struct Geometry<'s> {
    space: &'s ContractingSpace,
}

impl Geometry<'_> {
    fn cell_inside(&self, cell: &Cell, disc: &Disc) -> bool {
        cell.iter().enumerate().all(|(j, c)| {
            corners(c, self.space.is_real(j))
                .iter()
                .all(|z| (z - disc.center[j]).norm() < disc.radius[j] * (1.0 - 1e-9))
        })
    }

    fn cell_misses(&self, cell: &Cell, disc: &Disc) -> bool {
        cell.iter().enumerate().any(|(j, c)| nearest_dist(c, disc.center[j]) > disc.radius[j])
    }

    fn split(&self, cell: &Cell) -> Vec<Cell> {
        let mut out = vec![Vec::with_capacity(cell.len())];
        for (j, c) in cell.iter().enumerate() {
            let mx = 0.5 * (c[0] + c[1]);
            let mut halves = vec![[c[0], mx, c[2], c[3]], [mx, c[1], c[2], c[3]]];
            if !self.space.is_real(j) {
                let my = 0.5 * (c[2] + c[3]);
                halves = halves.into_iter().flat_map(|h| [[h[0], h[1], h[2], my], [h[0], h[1], my, h[3]]]).collect();
            }
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    halves.iter().map(move |h| {
                        let mut v = prefix.clone();
                        v.push(*h);
                        v
                    })
                })
                .collect();
        }
        out
    }

    /// Whether `cell ∩ region` is covered by the union of `cover` (region = None
    /// means the whole cell must be covered).
    fn covered(&self, start: Cell, region: Option<&Disc>, cover: &[&Disc], max_level: usize) -> bool {
        let mut stack = vec![(start, 0usize)];
        let mut work = 0usize;
        while let Some((cell, level)) = stack.pop() {
            work += 1;
            if work > MAX_BOXES {
                return false;
            }
            if let Some(r) = region {
                if self.cell_misses(&cell, r) {
                    continue;
                }
            }
            if cover.iter().any(|d| self.cell_inside(&cell, d)) {
                continue;
            }
            if level >= max_level {
                return false;
            }
            for child in self.split(&cell) {
                stack.push((child, level + 1));
            }
        }
        true
    }

    fn bounding_cell(&self, d: &Disc) -> Cell {
        d.center
            .iter()
            .zip(&d.radius)
            .enumerate()
            .map(|(j, (c, r))| {
                if self.space.is_real(j) {
                    [c.re - r, c.re + r, 0.0, 0.0]
                } else {
                    [c.re - r, c.re + r, c.im - r, c.im + r]
                }
            })
            .collect()
    }

    fn max_level(&self) -> usize {
        let dims: usize = (0..self.space.dim()).map(|j| if self.space.is_real(j) { 1 } else { 2 }).sum();
        match dims {
            1 => 24,
            2 => 14,
            3 => 9,
            _ => 6,
        }
    }

    fn near<'d>(&self, target: &Disc, pool: &'d [Disc]) -> Vec<&'d Disc> {
        pool.iter()
            .filter(|d| {
                d.center
                    .iter()
                    .zip(&target.center)
                    .zip(d.radius.iter().zip(&target.radius))
                    .all(|((a, b), (ra, rb))| (a - b).norm() < ra + rb)
            })
            .collect()
    }
}

/// Polydiscs known to lie inside R.
struct InnerCover {
    discs: Vec<Disc>,
    /// Whether the origin's disc survived, which certifies every spectrum point.
    origin_inside: bool,
    index: HashMap<LatticePoint, usize>,
}

struct Certifier<'a> {
    field: &'a NumberField,
    oracle: WindowOracle<'a>,
    space: ContractingSpace,
    depth: usize,
    inner: Option<Option<InnerCover>>,
}

impl<'a> Certifier<'a> {
    fn new(field: &'a NumberField, depth: usize) -> Self {
        Self { field, oracle: WindowOracle::new(field), space: ContractingSpace::new(field), depth, inner: None }
    }

    fn classify(&mut self, p: &LatticePoint) -> Result<PointStatus> {
        if !self.oracle.contains(p)? {
            return Ok(PointStatus::OutsideWindow);
        }
        if self.interior(p)? {
            return Ok(PointStatus::Interior);
        }
        if self.boundary(p)? {
            return Ok(PointStatus::Boundary);
        }
        Ok(PointStatus::Unresolved)
    }

    fn expanding_within(&self, x: &LatticePoint, e: f64) -> Membership {
        let ok = self.field.expanding_reps().into_iter().all(|j| self.field.coordinate(j, x).norm() <= e);
        if ok {
            Membership::Inside
        } else {
            Membership::Outside
        }
    }

    /// Builds the self-covering core and its forward images.
    fn build_inner(&self) -> Result<Option<InnerCover>> {
        let geo = Geometry { space: &self.space };
        for (e, rho) in CORE_ATTEMPTS {
            let pts = forward_closure(self.field, &DIGITS, 1_000_000, |x| self.expanding_within(x, e))?.points;
            let radius: Vec<f64> = self.space.outer().iter().map(|o| o * rho).collect();
            let image_radius: Vec<f64> = radius.iter().zip(self.space.moduli()).map(|(r, m)| r * m).collect();
            let mut alive: Vec<bool> = vec![true; pts.len()];
            let centers: Vec<Vec<Complex64>> = pts.iter().map(|p| self.space.project(self.field, p)).collect();
            loop {
                let images: Vec<Disc> = centers
                    .iter()
                    .zip(&alive)
                    .filter(|(_, a)| **a)
                    .flat_map(|(c, _)| {
                        DIGITS.iter().map(|&i| Disc { center: self.space.s_map(i, c), radius: image_radius.clone() })
                    })
                    .collect();
                let mut changed = false;
                for k in 0..pts.len() {
                    if !alive[k] {
                        continue;
                    }
                    let disc = Disc { center: centers[k].clone(), radius: radius.clone() };
                    let near = geo.near(&disc, &images);
                    if !geo.covered(geo.bounding_cell(&disc), Some(&disc), &near, geo.max_level()) {
                        alive[k] = false;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            if !alive.iter().any(|a| *a) {
                continue;
            }
            let origin_inside = alive[0];
            // forward images of the core: T_w(x) carries a disc scaled by β_c^{|w|}
            let core: Vec<LatticePoint> = pts.iter().zip(&alive).filter(|(_, a)| **a).map(|(p, _)| p.clone()).collect();
            let reach = 4.0 * e;
            let mut index: HashMap<LatticePoint, usize> = HashMap::new();
            let mut discs = Vec::new();
            let mut frontier: Vec<(LatticePoint, Vec<f64>)> = core.into_iter().map(|p| (p, radius.clone())).collect();
            let mut steps = 0;
            while !frontier.is_empty() && steps <= self.depth {
                let mut next = Vec::new();
                for (p, r) in frontier {
                    if index.contains_key(&p) {
                        continue;
                    }
                    index.insert(p.clone(), discs.len());
                    discs.push(Disc { center: self.space.project(self.field, &p), radius: r.clone() });
                    let rr: Vec<f64> = r.iter().zip(self.space.moduli()).map(|(a, m)| a * m).collect();
                    for &i in &DIGITS {
                        let q = self.field.apply_t(i, &p)?;
                        if !index.contains_key(&q) && self.expanding_within(&q, reach) == Membership::Inside {
                            next.push((q, rr.clone()));
                        }
                    }
                }
                frontier = next;
                steps += 1;
            }
            return Ok(Some(InnerCover { discs, origin_inside, index }));
        }
        Ok(None)
    }

    fn interior(&mut self, p: &LatticePoint) -> Result<bool> {
        if self.inner.is_none() {
            self.inner = Some(self.build_inner()?);
        }
        let Some(Some(inner)) = &self.inner else {
            return Ok(false);
        };
        if inner.origin_inside && super::code_of(self.field, p)?.is_some() {
            // every spectrum point is the centre of a forward image of the origin's disc
            return Ok(true);
        }
        let y = self.space.project(self.field, p);
        if inner.index.contains_key(p) {
            return Ok(true);
        }
        let geo = Geometry { space: &self.space };
        for s in NEIGHBOURHOODS {
            let target = Disc { center: y.clone(), radius: self.space.outer().iter().map(|o| o * s).collect() };
            let near = geo.near(&target, &inner.discs);
            if near.is_empty() {
                continue;
            }
            if geo.covered(geo.bounding_cell(&target), None, &near, geo.max_level()) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Certifies π_c(y) ∈ ∂R. Let G be the part of the backward graph of y that
    /// stays in R, and d a lower bound on the distance from R of every exit from
    /// G. Fix a period L and a set S of pairs (p, n mod L), p ∈ G, containing y
    /// and closed under passing to preimages in G (which lowers n by one). If for
    /// a lattice v with |β_c^{n₀}v| < d every p + β^n v with (p, n mod L) ∈ S and
    /// n ∈ [n₀, n₀ + L) is outside R, induction shows the same for all n ≥ n₀:
    /// the preimages are exits moved by less than d, or points covered by S.
    /// These points converge to y in K_c.
    fn boundary(&mut self, y: &LatticePoint) -> Result<bool> {
        let mut live: BTreeSet<LatticePoint> = BTreeSet::from([y.clone()]);
        let mut kids: HashMap<LatticePoint, Vec<LatticePoint>> = HashMap::new();
        let mut stack = vec![y.clone()];
        let mut d_min = f64::INFINITY;
        while let Some(p) = stack.pop() {
            let mut ks = Vec::new();
            for &i in &DIGITS {
                let q = self.field.apply_t_inverse(i, &p)?;
                if self.oracle.contains(&q)? {
                    ks.push(q.clone());
                    if live.insert(q.clone()) {
                        stack.push(q);
                    }
                } else {
                    let yq = self.space.project(self.field, &q);
                    d_min = d_min.min(self.space.dist_lower_bound(&yq, self.depth));
                }
            }
            kids.insert(p, ks);
            if live.len() > 10_000 {
                return Ok(false);
            }
        }
        if !(d_min > OUTER_TOL) || !d_min.is_finite() {
            return Ok(false);
        }
        let size = |w: &LatticePoint| self.space.project(self.field, w).iter().map(|z| z.norm()).fold(0.0, f64::max);
        // powers β^n v from the first n with |β_c^n v| < d
        let mut ladders: Vec<Vec<LatticePoint>> = Vec::new();
        for v in self.perturbations() {
            let mut w = v;
            let mut ok = true;
            while size(&w) >= d_min {
                match self.field.mul_beta(&w) {
                    Ok(next) => w = next,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            let mut ladder = vec![w];
            while ok && ladder.len() < MAX_PERIOD + PERTURBATION_TRIES {
                match self.field.mul_beta(ladder.last().unwrap()) {
                    Ok(next) => ladder.push(next),
                    Err(_) => ok = false,
                }
            }
            if ok {
                ladders.push(ladder);
            }
        }
        for l in 1..=MAX_PERIOD {
            for r0 in 0..l {
                let mut pairs: BTreeSet<(LatticePoint, usize)> = BTreeSet::from([(y.clone(), r0)]);
                let mut stack = vec![(y.clone(), r0)];
                while let Some((p, r)) = stack.pop() {
                    for q in &kids[&p] {
                        let pair = (q.clone(), (r + l - 1) % l);
                        if pairs.insert(pair.clone()) {
                            stack.push(pair);
                        }
                    }
                }
                for ladder in &ladders {
                    for shift in 0..PERTURBATION_TRIES {
                        if self.all_outside(&pairs, l, shift, ladder)? {
                            return Ok(true);
                        }
                    }
                }
            }
        }
        Ok(false)
    }

    /// Whether p + β^n v is outside R for each (p, r) in `pairs`, where n is
    /// the exponent in [shift, shift + l) congruent to r and `ladder[n]` = β^n v.
    fn all_outside(
        &mut self,
        pairs: &BTreeSet<(LatticePoint, usize)>,
        l: usize,
        shift: usize,
        ladder: &[LatticePoint],
    ) -> Result<bool> {
        for (p, r) in pairs {
            let n = shift + (r + l - shift % l) % l;
            let Ok(q) = p.checked_add(&ladder[n]) else {
                return Ok(false);
            };
            if self.oracle.contains(&q)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Nonzero lattice vectors with coordinates in {−1, 0, 1}.
    fn perturbations(&self) -> Vec<LatticePoint> {
        let d = self.field.degree();
        let mut out: Vec<Vec<i64>> = vec![Vec::new()];
        for _ in 0..d {
            out = out.into_iter().flat_map(|v| (-1..=1).map(move |c| [v.clone(), vec![c]].concat())).collect();
        }
        out.into_iter().filter(|v| v.iter().any(|&c| c != 0)).map(LatticePoint).collect()
    }
}
