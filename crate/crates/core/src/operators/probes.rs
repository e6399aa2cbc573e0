//! Test functions for defect measurements.

use std::ops::Range;
use std::sync::Arc;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::LinearOperator;
use crate::grid::Grid;
use crate::C64;

/// A named vector of weighted log samples.
#[derive(Debug, Clone, Serialize)]
pub struct Probe {
    pub label: String,
    #[serde(skip)]
    pub values: Vec<C64>,
}

impl Probe {
    /// `exp(-(u-c)²/(2σ²)) e^{i x0 u}`.
    pub fn packet(grid: &Grid, center: f64, sigma: f64, x0: f64, phase: f64) -> Self {
        let values = grid
            .u()
            .iter()
            .map(|&u| {
                let z = (u - center) / sigma;
                C64::from_polar((-0.5 * z * z).exp(), x0 * u + phase)
            })
            .collect();
        Self {
            label: format!("packet(c={center:.3},s={sigma:.3},x0={x0:.3})"),
            values,
        }
    }
}

/// Probes supported in the middle half of the grid, with the window on which
/// defects are measured.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeSet {
    pub probes: Vec<Probe>,
    pub seed: u64,
    pub window: Range<usize>,
}

impl ProbeSet {
    pub fn block(&self) -> Mat<C64> {
        let n = self.probes[0].values.len();
        Mat::from_fn(n, self.probes.len(), |i, j| self.probes[j].values[i])
    }

    /// `max_j ‖(A - B)g_j‖_window / ‖g_j‖` for blocks `A g` and `B g`.
    pub fn relative_defect(&self, grid: &Grid, a: &Mat<C64>, b: &Mat<C64>) -> f64 {
        self.probes
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let diff: Vec<C64> = (0..a.nrows()).map(|i| a[(i, j)] - b[(i, j)]).collect();
                grid.norm_on(&diff, self.window.clone()) / grid.norm(&p.values)
            })
            .fold(0.0, f64::max)
    }
}

/// Nine deterministic packets around the grid centre plus three seeded
/// random ones.
pub fn interior_probes(grid: &Arc<Grid>, seed: u64) -> ProbeSet {
    let spec = grid.spec();
    let center = 0.5 * (spec.u_min + spec.u_max);
    let a = 0.25 * (spec.u_max - spec.u_min);
    let sigma = a / 16.0;
    let mut probes = Vec::with_capacity(12);
    for offset in [-0.25, 0.0, 0.25] {
        for x0 in [0.0, spec.x_max / 8.0, -spec.x_max / 4.0] {
            probes.push(Probe::packet(grid, center + a * offset, sigma, x0, 0.0));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..3 {
        let c = center + a * rng.random_range(-0.25..0.25);
        let s = sigma * rng.random_range(0.8..1.5);
        let x0 = spec.x_max * rng.random_range(-0.25..0.25);
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let mut p = Probe::packet(grid, c, s, x0, phase);
        p.label = format!("random{k}:{}", p.label);
        probes.push(p);
    }
    ProbeSet {
        probes,
        seed,
        window: grid.middle_half(),
    }
}

/// Packets centred in the outer thirds of the grid. The first four carry
/// frequency `±X/2`; the last two are low-frequency.
pub fn edge_probes(grid: &Arc<Grid>) -> Vec<Probe> {
    let spec = grid.spec();
    let center = 0.5 * (spec.u_min + spec.u_max);
    let third = (spec.u_max - spec.u_min) / 3.0;
    let mut probes = Vec::with_capacity(6);
    for side in [-1.0, 1.0] {
        for x0 in [-0.5 * spec.x_max, 0.5 * spec.x_max] {
            probes.push(Probe::packet(grid, center + side * third, 0.5, x0, 0.0));
        }
    }
    for side in [-1.0, 1.0] {
        probes.push(Probe::packet(grid, center + side * third, 0.5, 0.0, 0.0));
    }
    probes
}

/// Largest windowed relative defect of `A - B` over a probe set.
pub fn defect(a: &dyn LinearOperator, b: &dyn LinearOperator, set: &ProbeSet) -> f64 {
    let block = set.block();
    let ya = a.apply_block(block.as_ref());
    let yb = b.apply_block(block.as_ref());
    set.relative_defect(a.grid(), &ya, &yb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn probes_are_interior_and_seeded() {
        let grid = Grid::new(GridSpec::default()).unwrap();
        let set = interior_probes(&grid, 7);
        assert_eq!(set.probes.len(), 12);
        for p in &set.probes {
            let total = grid.norm(&p.values);
            assert!((total - grid.norm_on(&p.values, set.window.clone())).abs() < 1e-12 * total);
        }
        let again = interior_probes(&grid, 7);
        assert_eq!(set.probes[11].values, again.probes[11].values);
        let other = interior_probes(&grid, 8);
        assert_ne!(set.probes[11].values, other.probes[11].values);
    }
}
