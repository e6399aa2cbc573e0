//! `𝔥_{μ,y}` and its factorization `v_{μ,y}ℓ_{μ,y}` on the fibers.

use std::sync::Arc;

use super::binomial::{symbol_binomial_inverse_r, symbol_binomial_r, SeriesReport};
use super::BinomialData;
use crate::grid::Grid;
use crate::shifts::FiberPoint;
use crate::symbols::{make_r_y, p_minus, p_plus, BivariateSymbol};
use crate::{Error, Result, C64};

pub(crate) fn check_pair(dc: &BinomialData, dd: &BinomialData) -> Result<()> {
    if dc.mu != dd.mu || dc.y != dd.y || dc.sampling != dd.sampling {
        return Err(Error::InvalidInput(format!(
            "binomial data disagree: {} vs {}",
            dc.describe(),
            dd.describe()
        )));
    }
    Ok(())
}

/// Fiber rows `v_{μ,y}(ξ, ·)` and `ℓ_{μ,y}(ξ, ·)` on the points `x`:
///
/// `v = (1 - μc(ξ)e^{iω(ξ)x})p_y^+ + (1 - μd(ξ)e^{iη(ξ)x})p_y^-`,
/// `ℓ = (1 - μc(ξ)e^{iω(ξ)x})^{-1}p_y^+ + (1 - μd(ξ)e^{iη(ξ)x})^{-1}p_y^-`.
pub fn fiber_vl(
    dc: &BinomialData,
    dd: &BinomialData,
    point: &FiberPoint,
    x: &[f64],
) -> Result<(Vec<C64>, Vec<C64>)> {
    check_pair(dc, dd)?;
    for d in [dc, dd] {
        let m = d.fiber_coefficient(point)?.norm();
        if m >= 1.0 {
            return Err(Error::Domain(format!(
                "ℓ at fiber {} needs |μv(ξ)| < 1 for {}, got {m:.6}",
                point.label(),
                d.describe()
            )));
        }
    }
    let y = dc.y;
    let mut v = Vec::with_capacity(x.len());
    let mut l = Vec::with_capacity(x.len());
    for &xk in x {
        let a = dc.fiber_factor(point, xk)?;
        let b = dd.fiber_factor(point, xk)?;
        let (pp, pm) = (p_plus(xk, y), p_minus(xk, y));
        v.push(a * pp + b * pm);
        l.push(pp / a + pm / b);
    }
    Ok((v, l))
}

/// `𝔥_{μ,y}` together with the series reports of both `𝔠` factors.
#[derive(Debug, Clone)]
pub struct HSymbol {
    pub symbol: BivariateSymbol,
    pub series_c: SeriesReport,
    pub series_d: SeriesReport,
}

/// `𝔥_{μ,y} = 1 + ¼[2r_y² - 𝔞^{d}𝔠^{c} - 𝔞^{c}𝔠^{d}]`, assembled through the
/// symbol algebra so that boundary and fiber rows follow from those of the
/// factors.
pub fn symbol_h(dc: &BinomialData, dd: &BinomialData, grid: &Arc<Grid>, tol: f64) -> Result<HSymbol> {
    check_pair(dc, dd)?;
    let a_c = symbol_binomial_r(dc, grid)?;
    let a_d = symbol_binomial_r(dd, grid)?;
    let (c_c, series_c) = symbol_binomial_inverse_r(dc, grid, tol)?;
    let (c_d, series_d) = symbol_binomial_inverse_r(dd, grid, tol)?;
    let r = BivariateSymbol::x_only(&make_r_y(grid, dc.y)?, dc.sampling)?;
    let r2 = r.mul(&r)?;
    let cross = a_d.mul(&c_c)?.add(&a_c.mul(&c_d)?)?;
    let bracket = r2.scale(C64::new(2.0, 0.0)).add(&cross.scale(C64::new(-1.0, 0.0)))?;
    let one = BivariateSymbol::constant(grid, C64::new(1.0, 0.0), dc.sampling);
    let symbol = one
        .add(&bracket.scale(C64::new(0.25, 0.0)))?
        .with_label(format!("h[mu={},y={},{}|{}]", dc.mu, dc.y, dc.describe(), dd.describe()));
    Ok(HSymbol {
        symbol,
        series_c,
        series_d,
    })
}
