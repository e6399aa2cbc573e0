//! Symbols of `U_γR_y`, `(I - vU_γ)R_y` and `(I - vU_γ)^{-1}R_y`.

use std::sync::Arc;

use faer::Mat;
use serde::Serialize;

use super::BinomialData;
use crate::grid::Grid;
use crate::shifts::{stencil_at, DirectedShift, FiberPoint, FiberSampling, MAX_TERMS};
use crate::symbols::{check_y, r_y, BivariateSymbol, FiberRow};
use crate::{Error, Result, C64};

/// Extra terms summed to audit the reported tail bound.
const AUDIT_TERMS: usize = 5;

/// Per-row data `(Ψ^{1/p}, ψ)` of a directed shift on the t-nodes.
fn row_shift_data(gamma: &DirectedShift, grid: &Grid) -> Result<Vec<(f64, f64)>> {
    let inv_p = 1.0 / grid.p();
    grid.u()
        .iter()
        .map(|&u| {
            let (_, psi, big_psi) = gamma.psi_data(u)?;
            Ok((big_psi.powf(inv_p), psi))
        })
        .collect()
}

fn zero_boundary(_: usize, _: f64) -> (C64, C64) {
    (C64::new(0.0, 0.0), C64::new(0.0, 0.0))
}

/// `𝔡(t, x) = Ψ(t)^{1/p} e^{iψ(t)x} r_y(x)`, the symbol of `U_γR_y`.
pub fn symbol_shift_r(
    gamma: &DirectedShift,
    y: f64,
    grid: &Arc<Grid>,
    sampling: FiberSampling,
) -> Result<BivariateSymbol> {
    check_y(y)?;
    gamma.shift.omega().check_clock(&sampling)?;
    let rows = row_shift_data(gamma, grid)?;
    BivariateSymbol::from_row_fn(
        grid,
        format!("d[{},y={y}]", gamma.name()),
        |i, _, x| {
            let (w, psi) = rows[i];
            w * C64::from_polar(1.0, psi * x) * r_y(x, y)
        },
        zero_boundary,
        sampling,
        |point, x| Ok(C64::from_polar(1.0, gamma.fiber_psi(point, &sampling)? * x) * r_y(x, y)),
    )
}

/// `𝔞(t, x) = (1 - μv(t)Ψ(t)^{1/p} e^{iψ(t)x}) r_y(x)`.
pub fn symbol_binomial_r(d: &BinomialData, grid: &Arc<Grid>) -> Result<BivariateSymbol> {
    let rows = row_shift_data(&d.gamma, grid)?;
    let coef: Vec<C64> = grid.u().iter().map(|&u| d.mu * d.v.eval_u(u)).collect();
    let y = d.y;
    BivariateSymbol::from_row_fn(
        grid,
        format!("a[{}]", d.describe()),
        |i, _, x| {
            let (w, psi) = rows[i];
            (1.0 - coef[i] * w * C64::from_polar(1.0, psi * x)) * r_y(x, y)
        },
        zero_boundary,
        d.sampling,
        |point, x| Ok(d.fiber_factor(point, x)? * r_y(x, y)),
    )
}

/// Convergence data of the truncated series symbol `𝔠`.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesReport {
    pub symbol: String,
    /// Analytic contraction bound `μ sup|v| sup Ψ^{1/p}`.
    pub q: f64,
    /// Largest factor `|μv Ψ^{1/p}|` met along the computed chains.
    pub q_measured: f64,
    pub terms_min: usize,
    pub terms_max: usize,
    /// Largest per-row bound on the dropped tail, in sup norm over `x`.
    pub tail_bound: f64,
    /// Largest observed sup-norm change from summing `N+1..N+5`.
    pub extension_change: f64,
    pub honest: bool,
    /// `(sup_t |a_n(t)|)^{1/n}` for `n = 1, 2, ...`.
    pub root_test: Vec<f64>,
    /// `max_{n ≥ 10}` of the root-test sequence.
    pub root_limit: f64,
    /// `0.95 - root_limit`.
    pub root_margin: f64,
    /// Rows whose iterates left the grid before the tail bound was met.
    pub flagged_rows: usize,
    /// Largest error of the partial geometric sums on fiber rows.
    pub fiber_sum_error: f64,
    /// Matching bound `q^{N+1}/(1-q)·sup|r_y|`.
    pub fiber_sum_bound: f64,
}

/// Root-test threshold used for the recorded margin.
pub const ROOT_TEST_LIMIT: f64 = 0.95;

/// Coefficients `a_n(t)` and phases `ψ_n(t) = ln(γ_n(t)/t)` along one row.
struct Chain {
    coef: Vec<C64>,
    phase: Vec<f64>,
    /// Number of terms kept in the symbol, including `n = 0`.
    kept: usize,
    flagged: bool,
}

fn row_chain(
    d: &BinomialData,
    grid: &Grid,
    u0: f64,
    q: f64,
    r_max: f64,
    tol: f64,
    extra: usize,
    q_measured: &mut f64,
) -> Result<Chain> {
    let inv_p = 1.0 / grid.p();
    let mut coef = vec![C64::new(1.0, 0.0)];
    let mut phase = vec![0.0];
    let mut kept = None;
    let mut s = u0;
    if q == 0.0 {
        return Ok(Chain {
            coef,
            phase,
            kept: 1,
            flagged: false,
        });
    }
    while coef.len() <= MAX_TERMS {
        if let Some(k) = kept {
            if coef.len() >= k + extra {
                break;
            }
        }
        let (next, _, big_psi) = d.gamma.psi_data(s)?;
        if stencil_at(grid, next).is_none() {
            break;
        }
        let factor = d.mu * d.v.eval_u(s) * big_psi.powf(inv_p);
        *q_measured = q_measured.max(factor.norm());
        let a = coef[coef.len() - 1] * factor;
        coef.push(a);
        phase.push(next - u0);
        s = next;
        if kept.is_none() && a.norm() * q / (1.0 - q) * r_max <= tol {
            kept = Some(coef.len());
        }
    }
    let flagged = kept.is_none();
    Ok(Chain {
        kept: kept.unwrap_or(coef.len()),
        coef,
        phase,
        flagged,
    })
}

fn partial_sum(chain: &Chain, range: std::ops::Range<usize>, x: f64) -> C64 {
    range
        .map(|n| chain.coef[n] * C64::from_polar(1.0, chain.phase[n] * x))
        .sum()
}

/// The Neumann-series symbol
/// `𝔠(t, x) = r_y(x)[1 + Σ_{n≥1} Π_{k<n} μv(γ_k(t))Ψ(γ_k(t))^{1/p} e^{iψ_n(t)x}]`
/// with `ψ_n(t) = ln(γ_n(t)/t)`, truncated per row once the geometric tail
/// bound drops below `tol`. Rows whose iterates leave the grid first are
/// truncated there and flagged. Fiber rows use the closed form
/// `(1 - μv(ξ)e^{iψ(ξ)x})^{-1} r_y(x)`.
pub fn symbol_binomial_inverse_r(
    d: &BinomialData,
    grid: &Arc<Grid>,
    tol: f64,
) -> Result<(BivariateSymbol, SeriesReport)> {
    let inv_p = 1.0 / grid.p();
    let q = d.mu * d.v.sup_abs() * d.gamma.sup_big_psi().powf(inv_p);
    if q >= 1.0 {
        return Err(Error::Precondition(format!(
            "series for {} needs q < 1, got {q:.6}",
            d.describe()
        )));
    }
    let y = d.y;
    let (x, band) = (grid.x(), grid.band());
    let r_x: Vec<C64> = x.iter().map(|&xk| r_y(xk, y)).collect();
    let r_b: Vec<C64> = band.iter().map(|&xi| r_y(xi, y)).collect();
    let r_max = r_x.iter().chain(&r_b).map(|z| z.norm()).fold(0.0, f64::max);

    let n_t = grid.n_t();
    let mut values = Mat::<C64>::zeros(n_t, grid.n_x());
    let mut band_values = Mat::<C64>::zeros(n_t, grid.n_band());
    let mut q_measured: f64 = 0.0;
    let mut flags = Vec::new();
    let mut chains = Vec::with_capacity(n_t);
    let (mut tail_bound, mut extension_change): (f64, f64) = (0.0, 0.0);
    for (i, &u0) in grid.u().iter().enumerate() {
        let chain = row_chain(d, grid, u0, q, r_max, tol, AUDIT_TERMS, &mut q_measured)?;
        let n = chain.kept;
        for (k, &xk) in x.iter().enumerate() {
            values[(i, k)] = partial_sum(&chain, 0..n, xk) * r_x[k];
        }
        for (m, &xi) in band.iter().enumerate() {
            band_values[(i, m)] = partial_sum(&chain, 0..n, xi) * r_b[m];
        }
        if chain.flagged {
            flags.push(i);
        } else {
            let last = chain.coef[n - 1].norm();
            tail_bound = tail_bound.max(last * q / (1.0 - q) * r_max);
            let audit = n..chain.coef.len();
            if !audit.is_empty() {
                let change = x
                    .iter()
                    .zip(&r_x)
                    .map(|(&xk, r)| (partial_sum(&chain, audit.clone(), xk) * r).norm())
                    .fold(0.0, f64::max);
                extension_change = extension_change.max(change);
            }
        }
        chains.push(chain);
    }

    let depth = chains.iter().map(|c| c.coef.len()).max().unwrap_or(1);
    let root_test: Vec<f64> = (1..depth)
        .map(|n| {
            let sup = chains
                .iter()
                .filter(|c| c.coef.len() > n)
                .map(|c| c.coef[n].norm())
                .fold(0.0, f64::max);
            sup.powf(1.0 / n as f64)
        })
        .collect();
    let tail_of_roots = if root_test.len() >= 10 { &root_test[9..] } else { &root_test[..] };
    let root_limit = tail_of_roots.iter().copied().fold(0.0, f64::max);

    let unflagged = chains.iter().filter(|c| !c.flagged);
    let terms_min = unflagged.clone().map(|c| c.kept - 1).min().unwrap_or(0);
    let terms_max = unflagged.map(|c| c.kept - 1).max().unwrap_or(0);

    let mut fiber_sum_error: f64 = 0.0;
    let mut fiber_sum_bound: f64 = 0.0;
    let mut fibers = Vec::new();
    for point in d.sampling.points() {
        let (row, err, bound) = fiber_inverse_row(d, &point, x, &r_x, r_max, tol)?;
        fiber_sum_error = fiber_sum_error.max(err);
        fiber_sum_bound = fiber_sum_bound.max(bound);
        fibers.push(FiberRow {
            u_sequence: point.sequence_u(d.sampling.clock, 1),
            point,
            values: row,
        });
    }

    let label = format!("c[{}]", d.describe());
    let symbol = BivariateSymbol::from_parts(
        grid,
        label.clone(),
        values,
        band_values,
        vec![C64::new(0.0, 0.0); n_t],
        vec![C64::new(0.0, 0.0); n_t],
        d.sampling,
        fibers,
    )?
    .with_flags(flags.clone());
    let report = SeriesReport {
        symbol: label,
        q,
        q_measured,
        terms_min,
        terms_max,
        tail_bound,
        extension_change,
        honest: extension_change <= tail_bound * (1.0 + 1e-9) + 1e-300,
        root_test,
        root_limit,
        root_margin: ROOT_TEST_LIMIT - root_limit,
        flagged_rows: flags.len(),
        fiber_sum_error,
        fiber_sum_bound,
    };
    Ok((symbol, report))
}

/// Closed-form fiber row of `𝔠` and the error of the partial geometric sum
/// that stops at the first `N` with `q^{N+1}/(1-q)·sup|r_y| ≤ tol`.
fn fiber_inverse_row(
    d: &BinomialData,
    point: &FiberPoint,
    x: &[f64],
    r_x: &[C64],
    r_max: f64,
    tol: f64,
) -> Result<(Vec<C64>, f64, f64)> {
    let c = d.fiber_coefficient(point)?;
    let q = c.norm();
    if q >= 1.0 {
        return Err(Error::Domain(format!(
            "fiber {} of {}: |μv(ξ)| = {q:.6} is not below 1",
            point.label(),
            d.describe()
        )));
    }
    let psi = d.fiber_psi(point)?;
    let mut n = 0usize;
    while q > 0.0 && q.powi(n as i32 + 1) / (1.0 - q) * r_max > tol {
        n += 1;
    }
    let bound = q.powi(n as i32 + 1) / (1.0 - q) * r_max;
    let mut err: f64 = 0.0;
    let row = x
        .iter()
        .zip(r_x)
        .map(|(&xk, &r)| {
            let z = c * C64::from_polar(1.0, psi * xk);
            let closed = r / (1.0 - z);
            let mut term = C64::new(1.0, 0.0);
            let mut sum = term;
            for _ in 0..n {
                term *= z;
                sum += term;
            }
            err = err.max((sum * r - closed).norm());
            closed
        })
        .collect();
    Ok((row, err, bound))
}
