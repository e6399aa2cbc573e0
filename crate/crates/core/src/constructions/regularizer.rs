//! The regularizer symbol `𝔣` and the symbol `𝔤_y`.

use std::sync::Arc;

use serde::Serialize;

use super::binomial::{symbol_binomial_inverse_r, SeriesReport};
use super::factor::{check_pair, symbol_h, HSymbol};
use super::BinomialData;
use crate::grid::Grid;
use crate::symbols::{make_p_y, BivariateSymbol, Sign};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReciprocalOptions {
    /// Below this modulus `1/z` is replaced by `z̄/floor²`.
    pub floor: f64,
    /// Smallest admissible modulus on boundary and fiber rows.
    pub ellipticity_floor: f64,
}

impl Default for ReciprocalOptions {
    fn default() -> Self {
        Self {
            floor: 0.1,
            ellipticity_floor: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Reciprocal {
    pub symbol: BivariateSymbol,
    pub min_abs_interior: f64,
    pub min_abs_boundary_fiber: f64,
    /// Number of sampled values where the clamp was active.
    pub clamped: usize,
}

fn min_abs<'a>(it: impl IntoIterator<Item = &'a C64>) -> f64 {
    it.into_iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
}

/// Pointwise reciprocal of an elliptic symbol, clamped where `|𝔥|` is
/// below `floor`. The clamp is continuous at `|𝔥| = floor`.
pub fn reciprocal_symbol(h: &BivariateSymbol, options: &ReciprocalOptions) -> Result<Reciprocal> {
    let edge = min_abs(h.boundary_minus().iter().chain(h.boundary_plus()));
    let fiber = min_abs(h.fibers().iter().flat_map(|r| &r.values));
    let min_abs_boundary_fiber = edge.min(fiber);
    if min_abs_boundary_fiber < options.ellipticity_floor {
        return Err(Error::Ellipticity(format!(
            "{}: min |h| = {min_abs_boundary_fiber:.3e} on boundary and fiber rows",
            h.label()
        )));
    }
    let vals = h.values();
    let mut min_abs_interior = f64::INFINITY;
    let mut clamped = 0;
    for j in 0..vals.ncols() {
        for z in vals.col(j).iter() {
            let m = z.norm();
            min_abs_interior = min_abs_interior.min(m);
            if m < options.floor {
                clamped += 1;
            }
        }
    }
    let floor = options.floor;
    let symbol = h.map(format!("1/{}", h.label()), |z| {
        if z.norm() >= floor {
            1.0 / z
        } else {
            z.conj() / (floor * floor)
        }
    })?;
    Ok(Reciprocal {
        symbol,
        min_abs_interior,
        min_abs_boundary_fiber,
        clamped,
    })
}

/// `𝔣 = 1/𝔥_{μ,2}` (clamped), the symbol of the regularizer of
/// `W = (I - cU_α^{ε₁})P_2^+ + (I - dU_β^{ε₂})P_2^-`. The data are taken at
/// `y = 2`; fiber rows equal `1/(wℓ)`.
pub fn regularizer_symbol_f(
    dc: &BinomialData,
    dd: &BinomialData,
    grid: &Arc<Grid>,
    tol: f64,
    options: &ReciprocalOptions,
) -> Result<(Reciprocal, HSymbol)> {
    let (dc, dd) = (dc.with_y(2.0)?, dd.with_y(2.0)?);
    let h = symbol_h(&dc, &dd, grid, tol)?;
    let f = reciprocal_symbol(&h.symbol, options)?;
    Ok((f, h))
}

/// `𝔤_y = 𝔣·(𝔠^{c}_{y} p_2^+ + 𝔠^{d}_{y} p_2^-)`; fiber rows `r_y/w`.
pub fn symbol_g_y(
    dc: &BinomialData,
    dd: &BinomialData,
    y: f64,
    f: &BivariateSymbol,
    grid: &Arc<Grid>,
    tol: f64,
) -> Result<(BivariateSymbol, [SeriesReport; 2])> {
    check_pair(dc, dd)?;
    let (dc, dd) = (dc.with_y(y)?, dd.with_y(y)?);
    let (c_c, rc) = symbol_binomial_inverse_r(&dc, grid, tol)?;
    let (c_d, rd) = symbol_binomial_inverse_r(&dd, grid, tol)?;
    let pp = BivariateSymbol::x_only(&make_p_y(grid, 2.0, Sign::Plus)?, dc.sampling)?;
    let pm = BivariateSymbol::x_only(&make_p_y(grid, 2.0, Sign::Minus)?, dc.sampling)?;
    let g = f
        .mul(&c_c.mul(&pp)?.add(&c_d.mul(&pm)?)?)?
        .with_label(format!("g[y={y},{}|{}]", dc.describe(), dd.describe()));
    Ok((g, [rc, rd]))
}
