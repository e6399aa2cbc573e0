//! Finite-grid diagnostics for membership in `Ẽ(R+, V(R))`.

use serde::Serialize;

use super::bivariate::BivariateSymbol;
use crate::C64;

/// Calibration thresholds for [`check_e_tilde`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ETildeThresholds {
    /// Bound on the last point of the tail-variation curve.
    pub tail_final: f64,
    /// Bound on the oscillation modulus over the outermost windows.
    pub cm_outer: f64,
    /// Bound on `ω(Δx)/ω(2Δx)` for the translation modulus.
    pub translation_ratio: f64,
}

impl Default for ETildeThresholds {
    fn default() -> Self {
        Self {
            tail_final: 1e-6,
            cm_outer: 0.1,
            translation_ratio: 0.75,
        }
    }
}

/// A measured curve and its verdict.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub name: String,
    /// `(parameter, value)` pairs.
    pub curve: Vec<(f64, f64)>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ETildeReport {
    pub symbol: String,
    pub tail_variation: Diagnostic,
    pub slow_oscillation: Diagnostic,
    pub translation: Diagnostic,
    pub pass: bool,
}

/// Measures the three defining properties of `Ẽ` on the grid:
///
/// 1. `m ↦ sup_t Σ_{|x|>m} |Δ_x 𝔞|` at `m ∈ {1, 2, 5, 10, 15}·X/20`, which
///    must be non-increasing and end below `tail_final`;
/// 2. `cm_r` over windows `[r, 2r]` whose outer edges sit at `1/8, 1/4, 1/2, 1`
///    of each end of the log range, which must be largest inside and end
///    below `cm_outer`;
/// 3. `h ↦ sup_t ‖𝔞(t, ·) - 𝔞(t, · + h)‖_V` at `h = kΔx`, `k ∈ {1, 2, 4, 8}`,
///    which must vanish linearly as `h → 0`.
pub fn check_e_tilde(a: &BivariateSymbol, thresholds: &ETildeThresholds) -> ETildeReport {
    let tail_variation = tail_curve(a, thresholds);
    let slow_oscillation = oscillation_curve(a, thresholds);
    let translation = translation_curve(a, thresholds);
    let pass = tail_variation.pass && slow_oscillation.pass && translation.pass;
    ETildeReport {
        symbol: a.label().to_owned(),
        tail_variation,
        slow_oscillation,
        translation,
        pass,
    }
}

fn tail_curve(a: &BivariateSymbol, th: &ETildeThresholds) -> Diagnostic {
    let grid = a.grid();
    let x = grid.x();
    let x_max = grid.spec().x_max;
    let ms: Vec<f64> = [1.0, 2.0, 5.0, 10.0, 15.0].iter().map(|k| k * x_max / 20.0).collect();
    let vals = a.values();
    let n_x = x.len();
    let mut sup = vec![0.0f64; ms.len()];
    for i in 0..vals.nrows() {
        for (slot, &m) in sup.iter_mut().zip(&ms) {
            let mut total = (vals[(i, 0)] - a.boundary_minus()[i]).norm()
                + (vals[(i, n_x - 1)] - a.boundary_plus()[i]).norm();
            for k in 1..n_x {
                if x[k - 1] >= m || x[k] <= -m {
                    total += (vals[(i, k)] - vals[(i, k - 1)]).norm();
                }
            }
            *slot = slot.max(total);
        }
    }
    let monotone = sup.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-15);
    let pass = monotone && sup.last().copied().unwrap_or(0.0) <= th.tail_final;
    Diagnostic {
        name: "tail_variation".into(),
        curve: ms.into_iter().zip(sup).collect(),
        pass,
    }
}

fn window_modulus(a: &BivariateSymbol, lo: f64, hi: f64) -> f64 {
    let u = a.grid().u();
    let rows: Vec<usize> = (0..u.len()).filter(|&i| u[i] >= lo && u[i] <= hi).collect();
    let vals = a.values();
    let mut best: f64 = 0.0;
    for (p, &i) in rows.iter().enumerate() {
        for &j in &rows[p + 1..] {
            for k in 0..vals.ncols() {
                best = best.max((vals[(i, k)] - vals[(j, k)]).norm());
            }
        }
    }
    best
}

fn oscillation_curve(a: &BivariateSymbol, th: &ETildeThresholds) -> Diagnostic {
    let spec = a.grid().spec();
    let width = std::f64::consts::LN_2;
    let fractions = [0.125, 0.25, 0.5, 1.0];
    let mut curve = Vec::new();
    for &f in &fractions {
        let hi = spec.u_max * f;
        curve.push((hi, window_modulus(a, hi - width, hi)));
    }
    for &f in &fractions {
        let lo = spec.u_min * f;
        curve.push((lo, window_modulus(a, lo, lo + width)));
    }
    let end_ok = |inner: f64, outer: f64| outer <= th.cm_outer && outer <= inner + 1e-12;
    let pass = end_ok(curve[0].1, curve[3].1) && end_ok(curve[4].1, curve[7].1);
    Diagnostic {
        name: "slow_oscillation".into(),
        curve,
        pass,
    }
}

fn translation_curve(a: &BivariateSymbol, th: &ETildeThresholds) -> Diagnostic {
    let vals = a.values();
    let n_x = vals.ncols();
    let dx = a.grid().spec().dx();
    let steps = [1usize, 2, 4, 8];
    let mut curve = Vec::new();
    let mut diff = vec![C64::new(0.0, 0.0); n_x];
    for &k in &steps {
        let mut sup: f64 = 0.0;
        for i in 0..vals.nrows() {
            let plus = a.boundary_plus()[i];
            for (j, d) in diff.iter_mut().enumerate() {
                let shifted = if j + k < n_x { vals[(i, j + k)] } else { plus };
                *d = vals[(i, j)] - shifted;
            }
            let zero = C64::new(0.0, 0.0);
            let head = diff.iter().map(|z| z.norm()).fold(0.0, f64::max);
            sup = sup.max(head + super::variation(&diff, zero, zero));
        }
        curve.push((k as f64 * dx, sup));
    }
    let monotone = curve.windows(2).all(|w| w[1].1 >= w[0].1 * (1.0 - 1e-9));
    let vanishing = curve[3].1 <= 1e-12;
    let linear = curve[0].1 <= th.translation_ratio * curve[1].1;
    Diagnostic {
        name: "translation".into(),
        curve,
        pass: vanishing || (monotone && linear),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, GridSpec};
    use crate::shifts::FiberSampling;
    use crate::symbols::{make_r_y, r_y};

    #[test]
    fn r_two_passes_and_log_modulation_fails() {
        let grid = Grid::new(GridSpec {
            n_t: 512,
            n_x: 256,
            ..GridSpec::default()
        })
        .unwrap();
        let s = FiberSampling::default();
        let r = BivariateSymbol::x_only(&make_r_y(&grid, 2.0).unwrap(), s).unwrap();
        let report = check_e_tilde(&r, &ETildeThresholds::default());
        assert!(report.pass, "{report:?}");

        let bad = BivariateSymbol::from_row_fn(
            &grid,
            "e^{ix ln t}",
            |_, u, x| C64::from_polar(1.0, x * u),
            |_, _| (C64::new(0.0, 0.0), C64::new(0.0, 0.0)),
            s,
            |_, _| Ok(C64::new(0.0, 0.0)),
        )
        .unwrap();
        let report = check_e_tilde(&bad, &ETildeThresholds::default());
        assert!(!report.slow_oscillation.pass);
        assert!(report.slow_oscillation.curve[3].1 > 1.0);

        let modulated = BivariateSymbol::from_row_fn(
            &grid,
            "e^{iωx} r_2",
            |_, u, x| C64::from_polar(1.0, (0.5 + 0.1 * (0.5 * u.mul_add(u, 1.0).ln()).sin()) * x) * r_y(x, 2.0),
            |_, _| (C64::new(0.0, 0.0), C64::new(0.0, 0.0)),
            s,
            |_, _| Ok(C64::new(0.0, 0.0)),
        )
        .unwrap();
        let report = check_e_tilde(&modulated, &ETildeThresholds::default());
        assert!(report.tail_variation.curve[4].1 < 1e-6);
        assert!(report.pass, "{report:?}");
    }
}
