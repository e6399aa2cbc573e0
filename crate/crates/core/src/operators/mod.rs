//! Discretized operators on a log grid and their analytics.
//!
//! Every operator acts on log samples in the weighted frame `g = Φf`, so a
//! matrix `M` here stands for `Φ⁻¹ M Φ` on the original samples. Use
//! [`apply`] to act on a [`GridFunction`] directly.

mod analytics;
mod cauchy;
mod conv;
mod dense;
mod probes;

use std::fmt::Debug;
use std::sync::Arc;

use faer::{Mat, MatRef};

pub use analytics::{
    band_kernel_dims, band_singular_values, compactness_proxy, eps_rank, kernel_dims, op_norm_estimate,
    singular_values, CompactVerdict, CompactnessReport, EdgeResponse, KernelDims, ProxyConfig,
    SigmaRatio,
};
pub use cauchy::cauchy_sio_direct;
pub use conv::{band_projector, conv_operator, pdo_operator, ConvOperator, PdoOperator};
pub use dense::{materialize, op_axpy, op_compose, DenseOperator};
pub use probes::{defect, edge_probes, interior_probes, Probe, ProbeSet};

use crate::grid::{phi_weight_in_place, Direction, Grid, GridFunction};
use crate::{Error, Result, C64};

/// A linear map on weighted log samples.
pub trait LinearOperator: Send + Sync + Debug {
    fn grid(&self) -> &Arc<Grid>;

    /// Applies the operator to every column of an `n_t x k` block.
    fn apply_block(&self, x: MatRef<'_, C64>) -> Mat<C64>;

    /// Applies the adjoint with respect to the discrete `L²(du)` product.
    fn apply_adjoint_block(&self, x: MatRef<'_, C64>) -> Mat<C64>;

    /// Rows whose values are truncated by the grid edge.
    fn flagged_rows(&self) -> Vec<usize> {
        Vec::new()
    }

    fn describe(&self) -> String;
}

pub type OpRef = Arc<dyn LinearOperator>;

pub(crate) fn column(values: &[C64]) -> Mat<C64> {
    Mat::from_fn(values.len(), 1, |i, _| values[i])
}

pub(crate) fn col_vec(m: MatRef<'_, C64>, j: usize) -> Vec<C64> {
    m.col(j).iter().copied().collect()
}

/// Applies an operator to a single vector of weighted log samples.
pub fn apply_vec(op: &dyn LinearOperator, g: &[C64]) -> Vec<C64> {
    col_vec(op.apply_block(column(g).as_ref()).as_ref(), 0)
}

pub fn apply_adjoint_vec(op: &dyn LinearOperator, g: &[C64]) -> Vec<C64> {
    col_vec(op.apply_adjoint_block(column(g).as_ref()).as_ref(), 0)
}

/// Applies `Φ⁻¹ M Φ` to a grid function.
pub fn apply(op: &dyn LinearOperator, f: &GridFunction) -> Result<GridFunction> {
    check_same(op.grid(), f.grid())?;
    let grid = op.grid();
    let mut g = f.samples().to_vec();
    phi_weight_in_place(grid, &mut g, Direction::Forward);
    let mut out = apply_vec(op, &g);
    phi_weight_in_place(grid, &mut out, Direction::Inverse);
    GridFunction::new(Arc::clone(grid), out)
}

pub(crate) fn check_same(a: &Grid, b: &Grid) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "grid mismatch: {} vs {}",
            a.spec().hash(),
            b.spec().hash()
        )))
    }
}

#[derive(Debug, Clone)]
pub struct Identity {
    grid: Arc<Grid>,
}

impl Identity {
    pub fn new(grid: &Arc<Grid>) -> OpRef {
        Arc::new(Self {
            grid: Arc::clone(grid),
        })
    }
}

impl LinearOperator for Identity {
    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn apply_block(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        x.to_owned()
    }

    fn apply_adjoint_block(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        x.to_owned()
    }

    fn describe(&self) -> String {
        "I".into()
    }
}

/// Multiplication by a function of `t`.
#[derive(Debug, Clone)]
pub struct Diagonal {
    grid: Arc<Grid>,
    label: String,
    values: Vec<C64>,
}

impl Diagonal {
    pub fn new(grid: &Arc<Grid>, label: impl Into<String>, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n_t() {
            return Err(Error::InvalidInput(format!(
                "diagonal has {} entries for {} nodes",
                values.len(),
                grid.n_t()
            )));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            label: label.into(),
            values,
        })
    }

    pub fn from_log_fn(grid: &Arc<Grid>, label: impl Into<String>, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.u().iter().map(|&u| f(u)).collect();
        Self {
            grid: Arc::clone(grid),
            label: label.into(),
            values,
        }
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }
}

impl LinearOperator for Diagonal {
    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn apply_block(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        Mat::from_fn(x.nrows(), x.ncols(), |i, j| self.values[i] * x[(i, j)])
    }

    fn apply_adjoint_block(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        Mat::from_fn(x.nrows(), x.ncols(), |i, j| self.values[i].conj() * x[(i, j)])
    }

    fn describe(&self) -> String {
        format!("diag({})", self.label)
    }
}

/// `factors[0] · factors[1] · …`, applied right to left.
#[derive(Debug, Clone)]
pub struct Product {
    factors: Vec<OpRef>,
}

impl LinearOperator for Product {
    fn grid(&self) -> &Arc<Grid> {
        self.factors[0].grid()
    }

    fn apply_block(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        let mut acc = x.to_owned();
        for f in self.factors.iter().rev() {
            acc = f.apply_block(acc.as_ref());
        }
        acc
    }

    fn apply_adjoint_block(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        let mut acc = x.to_owned();
        for f in &self.factors {
            acc = f.apply_adjoint_block(acc.as_ref());
        }
        acc
    }

    fn flagged_rows(&self) -> Vec<usize> {
        self.factors[0].flagged_rows()
    }

    fn describe(&self) -> String {
        let parts: Vec<String> = self.factors.iter().map(|f| f.describe()).collect();
        parts.join("·")
    }
}

/// `Σ_k w_k A_k`.
#[derive(Debug, Clone)]
pub struct Combination {
    terms: Vec<(C64, OpRef)>,
}

impl LinearOperator for Combination {
    fn grid(&self) -> &Arc<Grid> {
        self.terms[0].1.grid()
    }

    fn apply_block(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        let mut acc = Mat::<C64>::zeros(x.nrows(), x.ncols());
        for (w, op) in &self.terms {
            let y = op.apply_block(x);
            acc += faer::Scale(*w) * &y;
        }
        acc
    }

    fn apply_adjoint_block(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        let mut acc = Mat::<C64>::zeros(x.nrows(), x.ncols());
        for (w, op) in &self.terms {
            let y = op.apply_adjoint_block(x);
            acc += faer::Scale(w.conj()) * &y;
        }
        acc
    }

    fn flagged_rows(&self) -> Vec<usize> {
        let mut rows: Vec<usize> = self.terms.iter().flat_map(|(_, op)| op.flagged_rows()).collect();
        rows.sort_unstable();
        rows.dedup();
        rows
    }

    fn describe(&self) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, op)| format!("{w}*[{}]", op.describe()))
            .collect();
        parts.join(" + ")
    }
}

/// Lazy product `A·B·…`.
pub fn product(factors: Vec<OpRef>) -> Result<OpRef> {
    let first = factors
        .first()
        .ok_or_else(|| Error::InvalidInput("empty product".into()))?;
    for f in &factors[1..] {
        check_same(first.grid(), f.grid())?;
    }
    Ok(Arc::new(Product { factors }))
}

/// Lazy linear combination.
pub fn combination(terms: Vec<(C64, OpRef)>) -> Result<OpRef> {
    let first = terms
        .first()
        .ok_or_else(|| Error::InvalidInput("empty combination".into()))?;
    for (_, op) in &terms[1..] {
        check_same(first.1.grid(), op.grid())?;
    }
    Ok(Arc::new(Combination { terms }))
}

/// Lazy `A - B`.
pub fn difference(a: &OpRef, b: &OpRef) -> Result<OpRef> {
    combination(vec![
        (C64::new(1.0, 0.0), Arc::clone(a)),
        (C64::new(-1.0, 0.0), Arc::clone(b)),
    ])
}
