//! The operators `V_{μ,y}`, `L_{μ,y}`, `H_{μ,y}` and the regularizer of `W`.

use std::sync::Arc;

use super::factor::{check_pair, symbol_h, HSymbol};
use super::regularizer::{regularizer_symbol_f, Reciprocal, ReciprocalOptions};
use super::BinomialData;
use crate::grid::Grid;
use crate::operators::{combination, conv_operator, pdo_operator, product, OpRef};
use crate::shifts::{NeumannInverse, WeightedShift};
use crate::symbols::{make_p_y, Sign};
use crate::{Result, C64};

const ONE: C64 = C64::new(1.0, 0.0);

/// `V`, `L` and `H` for one pair of binomial data.
#[derive(Debug, Clone)]
pub struct ChainOperators {
    pub v: OpRef,
    pub l: OpRef,
    pub h: OpRef,
    pub h_symbol: HSymbol,
}

fn projections(grid: &Arc<Grid>, y: f64) -> Result<(OpRef, OpRef)> {
    let pp: OpRef = Arc::new(conv_operator(&make_p_y(grid, y, Sign::Plus)?, grid)?);
    let pm: OpRef = Arc::new(conv_operator(&make_p_y(grid, y, Sign::Minus)?, grid)?);
    Ok((pp, pm))
}

fn weighted(d: &BinomialData, grid: &Arc<Grid>) -> Result<OpRef> {
    Ok(Arc::new(WeightedShift::new(&d.coefficient(), &d.gamma, grid)?))
}

/// `V_{μ,y} = (I - μcU_α)P_y^+ + (I - μdU_β)P_y^-`.
fn build_v(dc: &BinomialData, dd: &BinomialData, grid: &Arc<Grid>) -> Result<OpRef> {
    check_pair(dc, dd)?;
    let (pp, pm) = projections(grid, dc.y)?;
    combination(vec![
        (ONE, Arc::clone(&pp)),
        (ONE, Arc::clone(&pm)),
        (-ONE, product(vec![weighted(dc, grid)?, pp])?),
        (-ONE, product(vec![weighted(dd, grid)?, pm])?),
    ])
}

/// `L_{μ,y} = (I - μcU_α)^{-1}P_y^+ + (I - μdU_β)^{-1}P_y^-`, with the
/// inverses evaluated by Neumann series.
fn build_l(dc: &BinomialData, dd: &BinomialData, grid: &Arc<Grid>, tol: f64) -> Result<OpRef> {
    check_pair(dc, dd)?;
    let (pp, pm) = projections(grid, dc.y)?;
    let inv_c: OpRef = Arc::new(NeumannInverse::new(&dc.coefficient(), &dc.gamma, grid, tol)?);
    let inv_d: OpRef = Arc::new(NeumannInverse::new(&dd.coefficient(), &dd.gamma, grid, tol)?);
    combination(vec![
        (ONE, product(vec![inv_c, pp])?),
        (ONE, product(vec![inv_d, pm])?),
    ])
}

pub fn build_v_l_h(dc: &BinomialData, dd: &BinomialData, grid: &Arc<Grid>, tol: f64) -> Result<ChainOperators> {
    let v = build_v(dc, dd, grid)?;
    let l = build_l(dc, dd, grid, tol)?;
    let h_symbol = symbol_h(dc, dd, grid, tol)?;
    let h: OpRef = Arc::new(pdo_operator(&h_symbol.symbol, grid)?);
    Ok(ChainOperators { v, l, h, h_symbol })
}

/// `W = (I - cU_{α_{ε₁}})P_2^+ + (I - dU_{β_{ε₂}})P_2^-`; the direction of
/// each shift is carried by the binomial data.
pub fn build_w(dc: &BinomialData, dd: &BinomialData, grid: &Arc<Grid>) -> Result<OpRef> {
    build_v(&dc.with_y(2.0)?, &dd.with_y(2.0)?, grid)
}

/// `W^{(-1)} = Op(𝔣)·L_{1,2}` together with the symbol `𝔣`.
pub fn regularizer_w(
    dc: &BinomialData,
    dd: &BinomialData,
    grid: &Arc<Grid>,
    tol: f64,
    options: &ReciprocalOptions,
) -> Result<(OpRef, Reciprocal)> {
    let (dc, dd) = (dc.with_y(2.0)?, dd.with_y(2.0)?);
    let (f, _) = regularizer_symbol_f(&dc, &dd, grid, tol, options)?;
    let op_f: OpRef = Arc::new(pdo_operator(&f.symbol, grid)?);
    let l = build_l(&dc, &dd, grid, tol)?;
    Ok((product(vec![op_f, l])?, f))
}
