//! The golden mean: nearest-neighbour gaps, the odometer on X(φ) and the
//! log-cocycle carried along it.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::algebraic::{LatticePoint, Membership, NumberField};
use crate::error::{Result, SpectraError};
use crate::projective::f_translation;
use crate::spectrum::code_of;
use crate::transition::MeasureModel;

pub const PHI: f64 = 1.618_033_988_749_895;
const PHI2: f64 = PHI + 1.0;

/// The three gaps between neighbours in X(φ), shortest first, as lattice points
/// in the basis (1, φ).
pub fn gap_points() -> [LatticePoint; 3] {
    [
        LatticePoint(vec![-3, 2]), // 2φ − 3
        LatticePoint(vec![2, -1]), // 2 − φ
        LatticePoint(vec![-1, 1]), // φ − 1
    ]
}

/// Gap to the right neighbour as a function of the contracting coordinate,
/// with branches [φ, φ²), (0, φ), (−φ², 0].
pub fn gap(y: f64) -> Result<f64> {
    if !(y.abs() < PHI2) {
        Err(SpectraError::OutOfWindow(y))
    } else if y >= PHI {
        Ok(2.0 * PHI - 3.0)
    } else if y > 0.0 {
        Ok(PHI - 1.0)
    } else {
        Ok(2.0 - PHI)
    }
}

/// A point of X(φ) with its contracting coordinate and ln(μ(x)/μ(0)).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdometerState {
    pub n: usize,
    pub point: LatticePoint,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl OdometerState {
    pub fn origin() -> Self {
        Self { n: 0, point: LatticePoint(vec![0, 0]), x: 0.0, y: 0.0, z: 0.0 }
    }

    pub fn mu(&self, mu0: f64) -> f64 {
        mu0 * self.z.exp()
    }
}

fn golden_field() -> Result<NumberField> {
    NumberField::from_text("x^2-x-1")
}

/// Moves to the next point of X(φ) to the right. The shortest gap that keeps
/// the contracting coordinate strictly inside (−φ², φ²) is taken, tested on
/// the exact lattice point; `f(x, g)` supplies ln μ(x + g) − ln μ(x).
pub fn odometer_step<F>(field: &NumberField, s: &OdometerState, f: F) -> Result<OdometerState>
where
    F: Fn(&LatticePoint, &LatticePoint) -> Result<f64>,
{
    for g in gap_points() {
        let next = LatticePoint(vec![s.point.0[0] + g.0[0], s.point.0[1] + g.0[1]]);
        if field.in_box_coords(&next, 1.0, false, [1]) == Membership::Inside {
            let y = field.coordinate(1, &next).re;
            return Ok(OdometerState { n: s.n + 1, x: field.value(&next), y, z: s.z + f(&s.point, &g)?, point: next });
        }
    }
    Err(SpectraError::WindowEscape(s.y))
}

/// The cocycle increment through the local vector of a shortest code.
pub struct Cocycle {
    model: MeasureModel,
}

impl Cocycle {
    pub fn new(tol: f64) -> Result<Self> {
        Ok(Self { model: MeasureModel::new(&golden_field()?, tol)? })
    }

    pub fn model(&self) -> &MeasureModel {
        &self.model
    }

    pub fn mu0(&self) -> f64 {
        self.model.spectral.mu0
    }

    /// ln μ(x + g) − ln μ(x) for g ∈ Δ.
    pub fn f(&self, x: &LatticePoint, g: &LatticePoint) -> Result<f64> {
        let j =
            self.model.delta.index_of(g).ok_or_else(|| SpectraError::InvalidArgument(format!("{g} is not in Δ")))?;
        let code = code_of(self.model.field(), x)?.ok_or(SpectraError::ZeroMass(0))?;
        f_translation(&self.model.spectral, &self.model.matrices, &code, j)
    }
}

/// States 0..=n of the odometer started at the origin.
pub fn walk_with<F>(n: usize, f: F) -> Result<Vec<OdometerState>>
where
    F: Fn(&LatticePoint, &LatticePoint) -> Result<f64>,
{
    let field = golden_field()?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(OdometerState::origin());
    for _ in 0..n {
        let next = odometer_step(&field, out.last().expect("nonempty"), &f)?;
        out.push(next);
    }
    Ok(out)
}

pub fn walk(cocycle: &Cocycle, n: usize) -> Result<Vec<OdometerState>> {
    walk_with(n, |x, g| cocycle.f(x, g))
}

/// CSV with columns n, x, y, z, mu, after `#` comment lines.
pub fn write_walk_csv<W: Write>(mut w: W, states: &[OdometerState], mu0: f64, header: &[String]) -> Result<()> {
    for line in header {
        writeln!(w, "# {line}")?;
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n", "x", "y", "z", "mu"])?;
    for s in states {
        out.write_record([
            s.n.to_string(),
            format!("{:.17e}", s.x),
            format!("{:.17e}", s.y),
            format!("{:.17e}", s.z),
            format!("{:.17e}", s.mu(mu0)),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_branches() {
        assert!((gap(0.0).unwrap() - 0.381_966_011_250_105).abs() < 1e-12);
        assert!((gap(1.0).unwrap() - 0.618_033_988_749_895).abs() < 1e-12);
        assert!((gap(PHI).unwrap() - 0.236_067_977_499_79).abs() < 1e-12);
        assert!(gap(-3.0).is_err());
    }

    #[test]
    fn first_steps_without_cocycle() {
        let s = walk_with(3, |_, _| Ok(0.0)).unwrap();
        // 0, φ−1, 1, φ
        let xs: Vec<f64> = s.iter().map(|s| s.x).collect();
        assert!((xs[1] - (PHI - 1.0)).abs() < 1e-12);
        assert!((xs[2] - 1.0).abs() < 1e-12);
        assert!((xs[3] - PHI).abs() < 1e-12);
    }
}
