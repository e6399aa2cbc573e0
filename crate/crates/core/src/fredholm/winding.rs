use std::f64::consts::TAU;

use serde::Serialize;

use crate::shifts::FiberEnd;
use crate::symbols::BivariateSymbol;
use crate::{Error, Result, C64};

/// Loops passing closer than this to the origin have no winding number.
pub const WIND_EPS: f64 = 1e-3;
/// Largest admissible distance of `Δarg/2π` from an integer.
pub const RESIDUE_TOLERANCE: f64 = 0.1;

/// Closed polygon traced by a symbol over the boundary of its domain.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryLoop {
    pub label: String,
    /// Samples in order; the last equals the first.
    pub points: Vec<C64>,
}

impl BoundaryLoop {
    /// Closes the polygon by repeating the first point if needed.
    pub fn from_points(label: impl Into<String>, mut points: Vec<C64>) -> Result<Self> {
        let label = label.into();
        let first = *points
            .first()
            .ok_or_else(|| Error::InvalidInput(format!("loop {label} is empty")))?;
        if points.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput(format!("loop {label} has non-finite samples")));
        }
        if points[points.len() - 1] != first {
            points.push(first);
        }
        Ok(Self { label, points })
    }

    /// Trace of `𝔞` for the fiber pair with the given phase index: the fiber
    /// over `0` for `x: -X → X`, the boundary row at `x = +∞` for
    /// `t: 0 → ∞`, the fiber over `∞` for `x: X → -X`, and the boundary row
    /// at `x = -∞` back to `t = 0`.
    pub fn from_symbol(a: &BivariateSymbol, phase_index: usize) -> Result<Self> {
        let pick = |end: FiberEnd| {
            a.fibers()
                .iter()
                .filter(|r| r.point.end == end)
                .nth(phase_index)
                .ok_or_else(|| Error::InvalidInput(format!("no fiber {phase_index} over {end:?}")))
        };
        let zero = pick(FiberEnd::Zero)?;
        let inf = pick(FiberEnd::Infinity)?;
        let mut points = zero.values.clone();
        points.extend(a.boundary_plus());
        points.extend(inf.values.iter().rev());
        points.extend(a.boundary_minus().iter().rev());
        Self::from_points(format!("{}@{}", a.label(), zero.point.phase), points)
    }

    /// One loop per sampled phase.
    pub fn all_from_symbol(a: &BivariateSymbol) -> Result<Vec<Self>> {
        let phases = a.sampling().phases;
        (0..phases).map(|k| Self::from_symbol(a, k)).collect()
    }

    /// The same closed curve with `factor - 1` linearly interpolated points
    /// inserted on each edge and the start moved by `shift` samples.
    pub fn reparametrized(&self, factor: usize, shift: usize) -> Self {
        let open = &self.points[..self.points.len() - 1];
        let n = open.len();
        let mut points = Vec::with_capacity(n * factor.max(1) + 1);
        for k in 0..n {
            let (a, b) = (open[(k + shift) % n], open[(k + shift + 1) % n]);
            for j in 0..factor.max(1) {
                points.push(a + (b - a) * (j as f64 / factor.max(1) as f64));
            }
        }
        points.push(points[0]);
        Self {
            label: self.label.clone(),
            points,
        }
    }

    /// Largest gap between consecutive samples.
    pub fn max_step(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WindingReport {
    pub label: String,
    pub winding: i64,
    /// Accumulated argument over `2π`.
    pub raw: f64,
    pub residue: f64,
    pub min_abs: f64,
    /// Largest argument increment between samples; near `π` the loop is
    /// undersampled.
    pub max_step_angle: f64,
}

/// Accumulated argument of a closed loop, divided by `2π`.
pub fn winding_number(l: &BoundaryLoop) -> Result<WindingReport> {
    let min_abs = l.points.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if min_abs < WIND_EPS {
        return Err(Error::DegenerateLoop(format!(
            "{} passes within {min_abs:.3e} of the origin",
            l.label
        )));
    }
    let (mut total, mut max_step_angle) = (0.0, 0.0f64);
    for w in l.points.windows(2) {
        let step = (w[1] / w[0]).arg();
        max_step_angle = max_step_angle.max(step.abs());
        total += step;
    }
    let raw = total / TAU;
    let winding = raw.round();
    let residue = (raw - winding).abs();
    if residue >= RESIDUE_TOLERANCE {
        return Err(Error::Numerical(format!("{}: winding residue {residue:.3}", l.label)));
    }
    Ok(WindingReport {
        label: l.label.clone(),
        winding: winding as i64,
        raw,
        residue,
        min_abs,
        max_step_angle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(k: i32, n: usize) -> BoundaryLoop {
        let pts = (0..n).map(|j| C64::from_polar(1.0, k as f64 * TAU * j as f64 / n as f64)).collect();
        BoundaryLoop::from_points("circle", pts).unwrap()
    }

    #[test]
    fn circles() {
        assert_eq!(winding_number(&circle(1, 64)).unwrap().winding, 1);
        assert_eq!(winding_number(&circle(-2, 64)).unwrap().winding, -2);
        let shifted = BoundaryLoop::from_points(
            "off",
            (0..64).map(|j| 3.0 + C64::from_polar(1.0, TAU * j as f64 / 64.0)).collect(),
        )
        .unwrap();
        assert_eq!(winding_number(&shifted).unwrap().winding, 0);
    }

    #[test]
    fn reparametrization_invariance() {
        let l = circle(3, 50);
        let r = l.reparametrized(3, 7);
        assert_eq!(winding_number(&r).unwrap().winding, 3);
    }

    #[test]
    fn degenerate_loop() {
        let l = BoundaryLoop::from_points("through0", vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        assert!(matches!(winding_number(&l), Err(Error::DegenerateLoop(_))));
    }
}
