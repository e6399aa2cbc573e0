//! Fredholm diagnostics: the two disk lemmas, ellipticity of boundary and
//! fiber values, winding numbers of boundary loops, and the homotopy scan
//! that connects `V_{1,2}` to the identity.

mod scan;
mod winding;

use serde::Serialize;

pub use scan::{homotopy_scan, ScanOptions, ScanReport, ScanRow};
pub use winding::{winding_number, BoundaryLoop, WindingReport, RESIDUE_TOLERANCE, WIND_EPS};

use crate::symbols::{p_minus, p_plus, BivariateSymbol};
use crate::{Error, Result, C64};

/// Default threshold for [`ellipticity_check`].
pub const ELLIPTICITY_THRESHOLD: f64 = 1e-3;

/// Containment of a curve in a closed disk.
#[derive(Debug, Clone, Serialize)]
pub struct DiskReport {
    pub center: C64,
    pub radius: f64,
    /// `max_x |f(x) - center|`.
    pub max_distance: f64,
    /// `min_x |f(x)|`.
    pub min_abs: f64,
    pub pass: bool,
}

fn disk_report(values: impl Iterator<Item = C64>, center: C64, radius: f64) -> DiskReport {
    let (mut max_distance, mut min_abs) = (0.0f64, f64::INFINITY);
    for z in values {
        max_distance = max_distance.max((z - center).norm());
        min_abs = min_abs.min(z.norm());
    }
    DiskReport {
        center,
        radius,
        max_distance,
        min_abs,
        pass: max_distance <= radius + 1e-12,
    }
}

/// `f(x) = (1 - ve^{iψx})p_2^+(x) + (1 - we^{iζx})p_2^-(x)` against the
/// disk `D(1, max(|v|, |w|))`.
pub fn disk_check_f(v: C64, w: C64, psi: f64, zeta: f64, x: &[f64]) -> DiskReport {
    let f = x.iter().map(|&x| {
        (1.0 - v * C64::from_polar(1.0, psi * x)) * p_plus(x, 2.0)
            + (1.0 - w * C64::from_polar(1.0, zeta * x)) * p_minus(x, 2.0)
    });
    disk_report(f, C64::new(1.0, 0.0), v.norm().max(w.norm()))
}

/// `g(x) = (1 - ve^{iψx})^{-1}p_2^+(x) + (1 - we^{iζx})^{-1}p_2^-(x)` against
/// the disk `D((1-r²)^{-1}, (1-r²)^{-1}r)`, `r = max(|v|, |w|) < 1`.
pub fn disk_check_g(v: C64, w: C64, psi: f64, zeta: f64, x: &[f64]) -> Result<DiskReport> {
    let r = v.norm().max(w.norm());
    if r >= 1.0 {
        return Err(Error::Domain(format!("disk lemma for g needs |v|, |w| < 1, got r = {r}")));
    }
    let g = x.iter().map(|&x| {
        p_plus(x, 2.0) / (1.0 - v * C64::from_polar(1.0, psi * x))
            + p_minus(x, 2.0) / (1.0 - w * C64::from_polar(1.0, zeta * x))
    });
    let scale = 1.0 / (1.0 - r * r);
    Ok(disk_report(g, C64::new(scale, 0.0), scale * r))
}

#[derive(Debug, Clone, Serialize)]
pub struct EllipticityReport {
    pub symbol: String,
    pub min_boundary: f64,
    pub min_fiber: f64,
    pub min_abs: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// `min |𝔞|` over the boundary rows `𝔞(t, ±∞)` and the sampled fiber rows.
pub fn ellipticity_check(a: &BivariateSymbol, threshold: f64) -> EllipticityReport {
    let min = |it: &mut dyn Iterator<Item = &C64>| it.map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let min_boundary = min(&mut a.boundary_minus().iter().chain(a.boundary_plus()));
    let min_fiber = min(&mut a.fibers().iter().flat_map(|r| r.values.iter()));
    let min_abs = min_boundary.min(min_fiber);
    EllipticityReport {
        symbol: a.label().to_owned(),
        min_boundary,
        min_fiber,
        min_abs,
        threshold,
        pass: min_abs > threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, GridSpec};
    use crate::shifts::FiberSampling;
    use crate::symbols::make_r_y;

    fn xs() -> Vec<f64> {
        (0..4001).map(|k| -20.0 + 0.01 * k as f64).collect()
    }

    #[test]
    fn disk_f_examples() {
        let x = xs();
        let zero = disk_check_f(C64::new(0.0, 0.0), C64::new(0.0, 0.0), 1.0, 2.0, &x);
        assert!(zero.max_distance < 1e-15);
        let r = disk_check_f(C64::new(0.5, 0.0), C64::new(0.3, 0.0), 1.0, 2.0, &x);
        assert!(r.pass && r.max_distance <= 0.5 + 1e-12);
        let tight = disk_check_f(C64::new(0.4, 0.0), C64::new(0.4, 0.0), 0.0, 0.0, &x);
        assert!((tight.max_distance - 0.4).abs() < 1e-15);
    }

    #[test]
    fn disk_g_examples() {
        let x = xs();
        let r = disk_check_g(C64::new(0.5, 0.0), C64::new(0.0, 0.5), 1.0, -3.0, &x).unwrap();
        assert!((r.center.re - 4.0 / 3.0).abs() < 1e-15);
        assert!((r.radius - 2.0 / 3.0).abs() < 1e-15);
        assert!(r.pass && r.min_abs > 0.0);
        assert!(disk_check_g(C64::new(1.0, 0.0), C64::new(0.0, 0.0), 0.0, 0.0, &x).is_err());
    }

    #[test]
    fn ellipticity_of_r_and_one() {
        let grid = Grid::new(GridSpec {
            n_t: 64,
            n_x: 64,
            x_max: 4.0,
            ..GridSpec::default()
        })
        .unwrap();
        let s = FiberSampling::default();
        let r = BivariateSymbol::x_only(&make_r_y(&grid, 2.0).unwrap(), s).unwrap();
        assert!(!ellipticity_check(&r, ELLIPTICITY_THRESHOLD).pass);
        let one = BivariateSymbol::constant(&grid, C64::new(1.0, 0.0), s);
        let rep = ellipticity_check(&one, ELLIPTICITY_THRESHOLD);
        assert!(rep.pass && rep.min_abs == 1.0);
    }
}
