//! The weighted shift `U_γ` as an interpolation stencil on the log grid.

use std::sync::Arc;

use faer::{Mat, MatRef};

use super::shift::DirectedShift;
use crate::grid::Grid;
use crate::operators::LinearOperator;
use crate::{Result, C64};

const WIDTH: usize = 8;

/// Lagrange weights on `WIDTH` consecutive nodes starting at `start`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stencil {
    pub start: usize,
    pub len: usize,
    pub weights: [f64; WIDTH],
}

/// Stencil evaluating a grid function at log coordinate `target`, or `None`
/// when the stencil would leave the grid.
pub(crate) fn stencil_at(grid: &Grid, target: f64) -> Option<Stencil> {
    let n = grid.n_t();
    let s = (target - grid.spec().u_min) / grid.h();
    if !s.is_finite() {
        return None;
    }
    let nearest = s.round();
    if (s - nearest).abs() <= 1e-12 * s.abs().max(1.0) {
        if nearest < 0.0 || nearest > (n - 1) as f64 {
            return None;
        }
        let mut weights = [0.0; WIDTH];
        weights[0] = 1.0;
        return Some(Stencil {
            start: nearest as usize,
            len: 1,
            weights,
        });
    }
    let j0 = s.floor() - (WIDTH / 2 - 1) as f64;
    if j0 < 0.0 || j0 + (WIDTH - 1) as f64 > (n - 1) as f64 {
        return None;
    }
    let sigma = s - j0;
    let mut weights = [0.0; WIDTH];
    for (k, w) in weights.iter_mut().enumerate() {
        let mut acc = 1.0;
        for m in 0..WIDTH {
            if m != k {
                acc *= (sigma - m as f64) / (k as f64 - m as f64);
            }
        }
        *w = acc;
    }
    Some(Stencil {
        start: j0 as usize,
        len: WIDTH,
        weights,
    })
}

/// `(U_γ g)(u) = Ψ(u)^{1/p} g(u + ψ(u))` in the weighted frame. Rows whose
/// stencil leaves the grid are zero and flagged.
#[derive(Debug, Clone)]
pub struct ShiftOperator {
    grid: Arc<Grid>,
    label: String,
    rows: Vec<Option<(Stencil, f64)>>,
}

impl ShiftOperator {
    pub fn rows_flagged(&self) -> usize {
        self.rows.iter().filter(|r| r.is_none()).count()
    }

    fn row_value(&self, i: usize, x: MatRef<'_, C64>, j: usize) -> C64 {
        match &self.rows[i] {
            None => C64::new(0.0, 0.0),
            Some((st, weight)) => {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..st.len {
                    acc += st.weights[k] * x[(st.start + k, j)];
                }
                acc * *weight
            }
        }
    }
}

pub fn shift_operator(shift: &DirectedShift, grid: &Arc<Grid>) -> Result<ShiftOperator> {
    let inv_p = 1.0 / grid.p();
    let rows = grid
        .u()
        .iter()
        .map(|&u| {
            let (next, _, big_psi) = shift.psi_data(u)?;
            Ok(stencil_at(grid, next).map(|st| (st, big_psi.powf(inv_p))))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShiftOperator {
        grid: Arc::clone(grid),
        label: format!("U[{}]", shift.name()),
        rows,
    })
}

impl LinearOperator for ShiftOperator {
    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn apply_block(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        Mat::from_fn(x.nrows(), x.ncols(), |i, j| self.row_value(i, x, j))
    }

    fn apply_adjoint_block(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        let mut out = Mat::<C64>::zeros(x.nrows(), x.ncols());
        for (i, row) in self.rows.iter().enumerate() {
            if let Some((st, weight)) = row {
                for j in 0..x.ncols() {
                    let v = x[(i, j)] * *weight;
                    for k in 0..st.len {
                        out[(st.start + k, j)] += st.weights[k] * v;
                    }
                }
            }
        }
        out
    }

    fn flagged_rows(&self) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.is_none().then_some(i))
            .collect()
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}
