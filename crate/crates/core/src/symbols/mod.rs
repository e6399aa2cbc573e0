//! Mellin multiplier symbols and bivariate pseudodifferential symbols.
//!
//! A symbol lives on a [`Grid`] and is sampled twice: on the configured
//! x-grid (for V-norms and diagnostics) and on the band frequencies (for
//! operator realization).

mod bivariate;
mod membership;

use std::f64::consts::PI;
use std::sync::Arc;

pub use bivariate::{symbol_algebra, AlgebraOp, BivariateSymbol, FiberRow};
pub use membership::{check_e_tilde, Diagnostic, ETildeReport, ETildeThresholds};

use crate::grid::Grid;
use crate::{Error, Result, C64};

/// `coth(π(x + i/y))`, evaluated without overflow for large `|x|`.
pub fn s_y(x: f64, y: f64) -> C64 {
    let z = C64::new(PI * x, PI / y);
    if x >= 0.0 {
        let e = (-2.0 * z).exp();
        (1.0 + e) / (1.0 - e)
    } else {
        let e = (2.0 * z).exp();
        -(1.0 + e) / (1.0 - e)
    }
}

/// `1/sinh(π(x + i/y))`.
pub fn r_y(x: f64, y: f64) -> C64 {
    let z = C64::new(PI * x, PI / y);
    if x >= 0.0 {
        2.0 * (-z).exp() / (1.0 - (-2.0 * z).exp())
    } else {
        -2.0 * z.exp() / (1.0 - (2.0 * z).exp())
    }
}

/// `p_y^+(x) = (1 + s_y(x))/2`, in a form that keeps relative accuracy in
/// both tails.
pub fn p_plus(x: f64, y: f64) -> C64 {
    let z = C64::new(PI * x, PI / y);
    if x >= 0.0 {
        1.0 / (1.0 - (-2.0 * z).exp())
    } else {
        let w = (2.0 * z).exp();
        -w / (1.0 - w)
    }
}

/// `p_y^-(x) = (1 - s_y(x))/2`.
pub fn p_minus(x: f64, y: f64) -> C64 {
    let z = C64::new(PI * x, PI / y);
    if x >= 0.0 {
        let e = (-2.0 * z).exp();
        -e / (1.0 - e)
    } else {
        1.0 / (1.0 - (2.0 * z).exp())
    }
}

/// Sign selector for `p_y^±`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

pub(crate) fn check_y(y: f64) -> Result<()> {
    if y.is_finite() && y > 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("y = {y} must lie in (1, inf)")))
    }
}

/// A function of the frequency variable with limits at `±∞`.
#[derive(Debug, Clone)]
pub struct MultiplierSymbol {
    grid: Arc<Grid>,
    label: String,
    values: Vec<C64>,
    band_values: Vec<C64>,
    limit_minus: C64,
    limit_plus: C64,
    total_variation: f64,
}

impl MultiplierSymbol {
    pub fn from_fn(
        grid: &Arc<Grid>,
        label: impl Into<String>,
        f: impl Fn(f64) -> C64,
        limit_minus: C64,
        limit_plus: C64,
    ) -> Result<Self> {
        let values: Vec<C64> = grid.x().iter().map(|&x| f(x)).collect();
        let band_values: Vec<C64> = grid.band().iter().map(|&x| f(x)).collect();
        Self::from_parts(grid, label.into(), values, band_values, limit_minus, limit_plus)
    }

    fn from_parts(
        grid: &Arc<Grid>,
        label: String,
        values: Vec<C64>,
        band_values: Vec<C64>,
        limit_minus: C64,
        limit_plus: C64,
    ) -> Result<Self> {
        let finite = |z: &C64| z.re.is_finite() && z.im.is_finite();
        if !values.iter().chain(&band_values).all(finite)
            || !finite(&limit_minus)
            || !finite(&limit_plus)
        {
            return Err(Error::InvalidInput(format!("symbol {label} has non-finite values")));
        }
        let total_variation = variation(&values, limit_minus, limit_plus);
        Ok(Self {
            grid: Arc::clone(grid),
            label,
            values,
            band_values,
            limit_minus,
            limit_plus,
            total_variation,
        })
    }

    pub fn constant(grid: &Arc<Grid>, c: C64) -> Self {
        Self::from_fn(grid, format!("const({c})"), |_| c, c, c).expect("finite constant")
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn band_values(&self) -> &[C64] {
        &self.band_values
    }

    pub fn limit_minus(&self) -> C64 {
        self.limit_minus
    }

    pub fn limit_plus(&self) -> C64 {
        self.limit_plus
    }

    pub fn total_variation(&self) -> f64 {
        self.total_variation
    }

    /// Supremum over the samples and the limits.
    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|z| z.norm())
            .fold(self.limit_minus.norm().max(self.limit_plus.norm()), f64::max)
    }

    /// `‖a‖_V = ‖a‖_∞ + V(a)`.
    pub fn v_norm(&self) -> f64 {
        self.sup_norm() + self.total_variation
    }

    /// Largest gap between an end sample and the stored limit.
    pub fn tail_mismatch(&self) -> f64 {
        let n = self.values.len();
        (self.values[0] - self.limit_minus)
            .norm()
            .max((self.values[n - 1] - self.limit_plus).norm())
    }

    fn combine(&self, other: &Self, op: AlgebraOp) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::InvalidInput("symbols live on different grids".into()));
        }
        let f = |a: C64, b: C64| match op {
            AlgebraOp::Add => a + b,
            AlgebraOp::Mul => a * b,
        };
        let zip = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(&p, &q)| f(p, q)).collect();
        let sym = match op {
            AlgebraOp::Add => "+",
            AlgebraOp::Mul => "*",
        };
        Self::from_parts(
            &self.grid,
            format!("({}{sym}{})", self.label, other.label),
            zip(&self.values, &other.values),
            zip(&self.band_values, &other.band_values),
            f(self.limit_minus, other.limit_minus),
            f(self.limit_plus, other.limit_plus),
        )
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, AlgebraOp::Add)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.combine(other, AlgebraOp::Mul)
    }

    pub fn scale(&self, c: C64) -> Self {
        let map = |v: &[C64]| v.iter().map(|&z| c * z).collect();
        Self::from_parts(
            &self.grid,
            format!("{c}*{}", self.label),
            map(&self.values),
            map(&self.band_values),
            c * self.limit_minus,
            c * self.limit_plus,
        )
        .expect("scaling keeps values finite")
    }
}

/// Discrete total variation with tail jumps to the limits.
pub(crate) fn variation(values: &[C64], limit_minus: C64, limit_plus: C64) -> f64 {
    let inner: f64 = values.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    inner + (values[0] - limit_minus).norm() + (values[values.len() - 1] - limit_plus).norm()
}

pub fn make_s_y(grid: &Arc<Grid>, y: f64) -> Result<MultiplierSymbol> {
    check_y(y)?;
    MultiplierSymbol::from_fn(
        grid,
        format!("s_{y}"),
        |x| s_y(x, y),
        C64::new(-1.0, 0.0),
        C64::new(1.0, 0.0),
    )
}

pub fn make_r_y(grid: &Arc<Grid>, y: f64) -> Result<MultiplierSymbol> {
    check_y(y)?;
    let zero = C64::new(0.0, 0.0);
    MultiplierSymbol::from_fn(grid, format!("r_{y}"), |x| r_y(x, y), zero, zero)
}

pub fn make_p_y(grid: &Arc<Grid>, y: f64, sign: Sign) -> Result<MultiplierSymbol> {
    check_y(y)?;
    let (zero, one) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    match sign {
        Sign::Plus => MultiplierSymbol::from_fn(grid, format!("p+_{y}"), |x| p_plus(x, y), zero, one),
        Sign::Minus => {
            MultiplierSymbol::from_fn(grid, format!("p-_{y}"), |x| p_minus(x, y), one, zero)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn closed_form_values() {
        assert!((s_y(0.0, 2.0)).norm() < 1e-15);
        assert!((r_y(0.0, 2.0) - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((p_plus(0.0, 2.0) - C64::new(0.5, 0.0)).norm() < 1e-15);
        for k in 0..=80 {
            let x = -20.0 + 0.5 * k as f64;
            assert!((s_y(x, 2.0) - C64::new((PI * x).tanh(), 0.0)).norm() < 1e-14);
            let e = (2.0 * PI * x).exp();
            assert!((p_plus(x, 2.0).re - e / (e + 1.0)).abs() < 1e-14);
            assert!(p_plus(x, 2.0).im.abs() < 1e-14);
        }
    }

    #[test]
    fn r_decays_exponentially() {
        for k in 0..200 {
            let x = 1.0 + 0.1 * k as f64;
            for y in [1.5, 2.0, 3.0] {
                assert!(r_y(x, y).norm() <= 2.01 * (-PI * x).exp());
                assert!(r_y(-x, y).norm() <= 2.01 * (-PI * x).exp());
            }
        }
    }

    #[test]
    fn domain_errors() {
        let grid = Grid::new(GridSpec { n_t: 64, n_x: 64, x_max: 4.0, ..GridSpec::default() }).unwrap();
        for y in [1.0, 0.5, f64::NAN, f64::INFINITY] {
            assert!(matches!(make_s_y(&grid, y), Err(Error::Domain(_))));
            assert!(make_r_y(&grid, y).is_err());
            assert!(make_p_y(&grid, y, Sign::Plus).is_err());
        }
    }

    #[test]
    fn v_norm_of_constants_and_projections() {
        let grid = Grid::new(GridSpec::default()).unwrap();
        let c = MultiplierSymbol::constant(&grid, C64::new(3.0, -4.0));
        assert_eq!(c.v_norm(), 5.0);
        let p = make_p_y(&grid, 2.0, Sign::Plus).unwrap();
        assert!((p.v_norm() - 2.0).abs() < 1e-6);
        for y in [1.5, 2.0, 3.0] {
            for s in [make_s_y(&grid, y).unwrap(), make_r_y(&grid, y).unwrap()] {
                assert!(s.tail_mismatch() < 1e-6, "{}", s.label());
            }
        }
    }
}
