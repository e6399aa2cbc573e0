//! Neumann series for binomial operators `I - vU_γ`.

use std::sync::Arc;

use faer::{Mat, MatRef};
use serde::Serialize;

use super::fixtures::SoFunction;
use super::operator::{shift_operator, ShiftOperator};
use super::shift::DirectedShift;
use crate::grid::{phi_weight_in_place, Direction, Grid, GridFunction};
use crate::operators::{apply_vec, LinearOperator};
use crate::{Error, Result, C64};

/// Cap on the number of series terms.
pub const MAX_TERMS: usize = 2000;

/// `v U_γ` with the contraction data needed by the series.
#[derive(Debug, Clone)]
pub struct WeightedShift {
    grid: Arc<Grid>,
    label: String,
    coefficient: Vec<C64>,
    shift: ShiftOperator,
    /// `sup_u |v(u)| Ψ(u)^{1/p - 1/2}`, the `L²(du)` norm of `vU_γ`.
    pub q_static: f64,
    /// `sup |v| Ψ^{1/p}` over the outer eighth of the grid at each end.
    pub q_boundary: f64,
}

impl WeightedShift {
    pub fn new(v: &SoFunction, shift: &DirectedShift, grid: &Arc<Grid>) -> Result<Self> {
        let op = shift_operator(shift, grid)?;
        let p = grid.p();
        let n = grid.n_t();
        let edge = n / 8;
        let mut q_static: f64 = 0.0;
        let mut q_boundary: f64 = 0.0;
        let mut coefficient = Vec::with_capacity(n);
        for (i, &u) in grid.u().iter().enumerate() {
            let c = v.eval_u(u);
            let big_psi = shift.big_psi_u(u)?;
            q_static = q_static.max(c.norm() * big_psi.powf(1.0 / p - 0.5));
            if i < edge || i >= n - edge {
                q_boundary = q_boundary.max(c.norm() * big_psi.powf(1.0 / p));
            }
            coefficient.push(c);
        }
        Ok(Self {
            grid: Arc::clone(grid),
            label: format!("{}·U[{}]", v.name, shift.name()),
            coefficient,
            shift: op,
            q_static,
            q_boundary,
        })
    }

    pub fn coefficient(&self) -> &[C64] {
        &self.coefficient
    }
}

impl LinearOperator for WeightedShift {
    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn apply_block(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        let mut y = self.shift.apply_block(x);
        for j in 0..y.ncols() {
            for (i, c) in self.coefficient.iter().enumerate() {
                y[(i, j)] *= c;
            }
        }
        y
    }

    fn apply_adjoint_block(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        let scaled = Mat::from_fn(x.nrows(), x.ncols(), |i, j| self.coefficient[i].conj() * x[(i, j)]);
        self.shift.apply_adjoint_block(scaled.as_ref())
    }

    fn flagged_rows(&self) -> Vec<usize> {
        self.shift.flagged_rows()
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// Convergence data of a truncated Neumann series.
#[derive(Debug, Clone, Serialize)]
pub struct NeumannReport {
    pub terms: usize,
    pub q_static: f64,
    pub q_eff: f64,
    pub q_boundary: f64,
    pub tail_bound: f64,
    pub residual: f64,
}

fn col_norms(grid: &Grid, m: &Mat<C64>) -> Vec<f64> {
    (0..m.ncols())
        .map(|j| {
            let col: Vec<C64> = m.col(j).iter().copied().collect();
            grid.norm(&col)
        })
        .collect()
}

/// Sums `Σ_n T^n x` column by column until the geometric tail bound drops
/// below `tol`. `T` is `vU_γ` or its adjoint.
fn series(
    grid: &Grid,
    q_static: f64,
    x: MatRef<'_, C64>,
    tol: f64,
    step: impl Fn(MatRef<'_, C64>) -> Mat<C64>,
) -> Result<(Mat<C64>, usize, f64, f64)> {
    let mut sum = x.to_owned();
    let mut term = x.to_owned();
    let base = col_norms(grid, &sum).into_iter().fold(0.0, f64::max);
    let mut q_eff = q_static;
    if base == 0.0 {
        return Ok((sum, 0, q_eff, 0.0));
    }
    let mut prev = col_norms(grid, &term);
    for n in 1..=MAX_TERMS {
        term = step(term.as_ref());
        let norms = col_norms(grid, &term);
        for (a, b) in norms.iter().zip(&prev) {
            if *b > 1e-300 {
                q_eff = q_eff.max(a / b);
            }
        }
        if q_eff >= 1.0 {
            return Err(Error::Precondition(format!(
                "measured contraction factor q_eff = {q_eff:.6} is not below 1"
            )));
        }
        sum += &term;
        prev = norms;
        let tail = q_eff.powi(n as i32 + 1) / (1.0 - q_eff) * base;
        if tail <= tol {
            return Ok((sum, n, q_eff, tail));
        }
    }
    Err(Error::Numerical(format!(
        "Neumann series did not reach tol = {tol:e} in {MAX_TERMS} terms"
    )))
}

fn check_q(q_static: f64) -> Result<()> {
    if q_static >= 1.0 {
        Err(Error::Precondition(format!(
            "contraction factor q = {q_static:.6} is not below 1"
        )))
    } else {
        Ok(())
    }
}

/// `(I - vU_γ)^{-1} f` by a truncated Neumann series with a measured tail bound.
pub fn neumann_apply(
    v: &SoFunction,
    shift: &DirectedShift,
    f: &GridFunction,
    tol: f64,
) -> Result<(GridFunction, NeumannReport)> {
    let grid = f.grid();
    let vu = WeightedShift::new(v, shift, grid)?;
    check_q(vu.q_static)?;
    let mut g = f.samples().to_vec();
    phi_weight_in_place(grid, &mut g, Direction::Forward);
    let x = Mat::from_fn(g.len(), 1, |i, _| g[i]);
    let (sum, terms, q_eff, tail_bound) = series(grid, vu.q_static, x.as_ref(), tol, |m| vu.apply_block(m))?;
    let mut out: Vec<C64> = sum.col(0).iter().copied().collect();
    let image = apply_vec(&vu, &out);
    let defect: Vec<C64> = (0..out.len()).map(|i| out[i] - image[i] - g[i]).collect();
    let residual = grid.norm(&defect);
    phi_weight_in_place(grid, &mut out, Direction::Inverse);
    Ok((
        GridFunction::new(Arc::clone(grid), out)?,
        NeumannReport {
            terms,
            q_static: vu.q_static,
            q_eff,
            q_boundary: vu.q_boundary,
            tail_bound,
            residual,
        },
    ))
}

/// `(I - vU_γ)^{-1}` as an operator, evaluated by the Neumann series.
#[derive(Debug, Clone)]
pub struct NeumannInverse {
    vu: WeightedShift,
    tol: f64,
}

impl NeumannInverse {
    pub fn new(v: &SoFunction, shift: &DirectedShift, grid: &Arc<Grid>, tol: f64) -> Result<Self> {
        let vu = WeightedShift::new(v, shift, grid)?;
        check_q(vu.q_static)?;
        Ok(Self { vu, tol })
    }

    pub fn weighted_shift(&self) -> &WeightedShift {
        &self.vu
    }

    /// Applies the inverse and returns the convergence data.
    pub fn solve(&self, x: MatRef<'_, C64>) -> Result<(Mat<C64>, NeumannReport)> {
        let grid = &self.vu.grid;
        let (sum, terms, q_eff, tail_bound) =
            series(grid, self.vu.q_static, x, self.tol, |m| self.vu.apply_block(m))?;
        let image = self.vu.apply_block(sum.as_ref());
        let residual = (0..x.ncols())
            .map(|j| {
                let d: Vec<C64> = (0..x.nrows()).map(|i| sum[(i, j)] - image[(i, j)] - x[(i, j)]).collect();
                grid.norm(&d)
            })
            .fold(0.0, f64::max);
        Ok((
            sum,
            NeumannReport {
                terms,
                q_static: self.vu.q_static,
                q_eff,
                q_boundary: self.vu.q_boundary,
                tail_bound,
                residual,
            },
        ))
    }
}

impl LinearOperator for NeumannInverse {
    fn grid(&self) -> &Arc<Grid> {
        &self.vu.grid
    }

    fn apply_block(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        self.solve(x).expect("contraction checked at construction").0
    }

    fn apply_adjoint_block(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        series(&self.vu.grid, self.vu.q_static, x, self.tol, |m| self.vu.apply_adjoint_block(m))
            .expect("contraction checked at construction")
            .0
    }

    fn flagged_rows(&self) -> Vec<usize> {
        self.vu.flagged_rows()
    }

    fn describe(&self) -> String {
        format!("(I - {})^-1", self.vu.label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::shifts::{ShiftDirection, SoShift};

    fn doubling() -> DirectedShift {
        SoShift::new("x2", SoFunction::constant("ln2", C64::new(2f64.ln(), 0.0)), 2.0)
            .unwrap()
            .directed(ShiftDirection::Forward)
    }

    #[test]
    fn zero_coefficient_returns_input() {
        let grid = Grid::new(GridSpec::default()).unwrap();
        let f = GridFunction::from_log_fn(Arc::clone(&grid), |u| C64::new((-u * u).exp(), 0.0)).unwrap();
        let zero = SoFunction::constant("0", C64::new(0.0, 0.0));
        let (out, report) = neumann_apply(&zero, &doubling(), &f, 1e-8).unwrap();
        for (a, b) in out.samples().iter().zip(f.samples()) {
            assert!((a - b).norm() <= 1e-15 * b.norm().max(1e-300));
        }
        assert_eq!(report.terms, 1);
    }

    #[test]
    fn half_with_doubling_converges_geometrically() {
        let grid = Grid::new(GridSpec::default()).unwrap();
        let f = GridFunction::from_log_fn(Arc::clone(&grid), |u| C64::new((-u * u).exp(), 0.0)).unwrap();
        let half = SoFunction::constant("1/2", C64::new(0.5, 0.0));
        let (_, report) = neumann_apply(&half, &doubling(), &f, 1e-8).unwrap();
        assert!(report.terms <= 30, "{report:?}");
        assert!(report.residual <= 1e-8);
        assert!((report.q_static - 0.5).abs() < 1e-12);
    }

    #[test]
    fn violating_coefficient_is_rejected() {
        let grid = Grid::new(GridSpec {
            n_t: 256,
            n_x: 128,
            ..GridSpec::default()
        })
        .unwrap();
        let f = GridFunction::from_log_fn(Arc::clone(&grid), |u| C64::new((-u * u).exp(), 0.0)).unwrap();
        let big = SoFunction::constant("1.1", C64::new(1.1, 0.0));
        assert!(matches!(
            neumann_apply(&big, &doubling(), &f, 1e-8),
            Err(Error::Precondition(_))
        ));
    }
}
