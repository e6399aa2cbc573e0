use std::sync::Arc;

use faer::{Mat, MatRef};

use super::{variation, MultiplierSymbol};
use crate::grid::Grid;
use crate::shifts::{FiberPoint, FiberSampling};
use crate::{Error, Result, C64};

/// Pointwise operation for [`symbol_algebra`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgebraOp {
    Add,
    Mul,
}

impl AlgebraOp {
    fn apply(self, a: C64, b: C64) -> C64 {
        match self {
            Self::Add => a + b,
            Self::Mul => a * b,
        }
    }

    fn sign(self) -> &'static str {
        match self {
            Self::Add => "+",
            Self::Mul => "*",
        }
    }
}

/// Values `𝔞(ξ, x)` on the x-grid at one fiber point.
#[derive(Debug, Clone)]
pub struct FiberRow {
    pub point: FiberPoint,
    /// Log coordinate of the first element of the probing sequence.
    pub u_sequence: f64,
    pub values: Vec<C64>,
}

/// A sampled Mellin PDO symbol `𝔞(t, x)`.
///
/// Rows are indexed by t-nodes. Columns are the x-grid for `values` and the
/// band frequencies for `band_values`.
#[derive(Debug, Clone)]
pub struct BivariateSymbol {
    grid: Arc<Grid>,
    label: String,
    values: Mat<C64>,
    band_values: Mat<C64>,
    boundary_minus: Vec<C64>,
    boundary_plus: Vec<C64>,
    sampling: FiberSampling,
    fibers: Vec<FiberRow>,
    sup_row_v_norm: f64,
    flagged: Vec<usize>,
}

fn all_finite(m: MatRef<'_, C64>) -> bool {
    (0..m.ncols()).all(|j| m.col(j).iter().all(|z| z.re.is_finite() && z.im.is_finite()))
}

fn finite(v: &[C64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

impl BivariateSymbol {
    /// Assembles a symbol from its parts and computes the row V-norms.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        grid: &Arc<Grid>,
        label: impl Into<String>,
        values: Mat<C64>,
        band_values: Mat<C64>,
        boundary_minus: Vec<C64>,
        boundary_plus: Vec<C64>,
        sampling: FiberSampling,
        fibers: Vec<FiberRow>,
    ) -> Result<Self> {
        let label = label.into();
        let (n_t, n_x, n_b) = (grid.n_t(), grid.n_x(), grid.n_band());
        let shapes_ok = values.nrows() == n_t
            && values.ncols() == n_x
            && band_values.nrows() == n_t
            && band_values.ncols() == n_b
            && boundary_minus.len() == n_t
            && boundary_plus.len() == n_t
            && fibers.iter().all(|f| f.values.len() == n_x);
        if !shapes_ok {
            return Err(Error::InvalidInput(format!("symbol {label}: shape mismatch with grid")));
        }
        let fibers_finite = fibers.iter().all(|f| finite(&f.values));
        if !all_finite(values.as_ref())
            || !all_finite(band_values.as_ref())
            || !finite(&boundary_minus)
            || !finite(&boundary_plus)
            || !fibers_finite
        {
            return Err(Error::InvalidInput(format!("symbol {label} has non-finite values")));
        }
        let mut row = vec![C64::new(0.0, 0.0); n_x];
        let mut sup_row_v_norm: f64 = 0.0;
        for i in 0..n_t {
            for (k, r) in row.iter_mut().enumerate() {
                *r = values[(i, k)];
            }
            let sup = row
                .iter()
                .map(|z| z.norm())
                .fold(boundary_minus[i].norm().max(boundary_plus[i].norm()), f64::max);
            sup_row_v_norm = sup_row_v_norm.max(sup + variation(&row, boundary_minus[i], boundary_plus[i]));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            label,
            values,
            band_values,
            boundary_minus,
            boundary_plus,
            sampling,
            fibers,
            sup_row_v_norm,
            flagged: Vec::new(),
        })
    }

    /// Samples `row(i, u_i, x)` on the x-grid and the band. Boundary columns
    /// and fiber rows come from the supplied closures.
    pub fn from_row_fn(
        grid: &Arc<Grid>,
        label: impl Into<String>,
        row: impl Fn(usize, f64, f64) -> C64,
        boundary: impl Fn(usize, f64) -> (C64, C64),
        sampling: FiberSampling,
        fiber: impl Fn(&FiberPoint, f64) -> Result<C64>,
    ) -> Result<Self> {
        let u = grid.u();
        let (x, band) = (grid.x(), grid.band());
        let values = Mat::from_fn(grid.n_t(), grid.n_x(), |i, k| row(i, u[i], x[k]));
        let band_values = Mat::from_fn(grid.n_t(), grid.n_band(), |i, m| row(i, u[i], band[m]));
        let (boundary_minus, boundary_plus): (Vec<C64>, Vec<C64>) =
            u.iter().enumerate().map(|(i, &ui)| boundary(i, ui)).unzip();
        let fibers = sampling
            .points()
            .into_iter()
            .map(|point| {
                let values = x.iter().map(|&xk| fiber(&point, xk)).collect::<Result<Vec<_>>>()?;
                Ok(FiberRow {
                    u_sequence: point.sequence_u(sampling.clock, 1),
                    point,
                    values,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(
            grid,
            label,
            values,
            band_values,
            boundary_minus,
            boundary_plus,
            sampling,
            fibers,
        )
    }

    /// `𝔞(t, x) = a(x)`.
    pub fn x_only(a: &MultiplierSymbol, sampling: FiberSampling) -> Result<Self> {
        let grid = a.grid();
        let (vals, band) = (a.values(), a.band_values());
        let values = Mat::from_fn(grid.n_t(), grid.n_x(), |_, k| vals[k]);
        let band_values = Mat::from_fn(grid.n_t(), grid.n_band(), |_, m| band[m]);
        let fibers = sampling
            .points()
            .into_iter()
            .map(|point| FiberRow {
                u_sequence: point.sequence_u(sampling.clock, 1),
                point,
                values: vals.to_vec(),
            })
            .collect();
        Self::from_parts(
            grid,
            a.label(),
            values,
            band_values,
            vec![a.limit_minus(); grid.n_t()],
            vec![a.limit_plus(); grid.n_t()],
            sampling,
            fibers,
        )
    }

    /// `𝔞(t, x) = g(t)` from samples on the t-nodes and fiber values.
    pub fn t_only(
        grid: &Arc<Grid>,
        label: impl Into<String>,
        samples: &[C64],
        sampling: FiberSampling,
        fiber: impl Fn(&FiberPoint) -> Result<C64>,
    ) -> Result<Self> {
        if samples.len() != grid.n_t() {
            return Err(Error::InvalidInput("t-samples do not match the grid".into()));
        }
        Self::from_row_fn(
            grid,
            label,
            |i, _, _| samples[i],
            |i, _| (samples[i], samples[i]),
            sampling,
            |p, _| fiber(p),
        )
    }

    pub fn constant(grid: &Arc<Grid>, c: C64, sampling: FiberSampling) -> Self {
        Self::from_row_fn(grid, format!("{c}"), |_, _, _| c, |_, _| (c, c), sampling, |_, _| Ok(c))
            .expect("constant symbol is finite")
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn values(&self) -> MatRef<'_, C64> {
        self.values.as_ref()
    }

    pub fn band_values(&self) -> MatRef<'_, C64> {
        self.band_values.as_ref()
    }

    pub fn row(&self, i: usize) -> Vec<C64> {
        self.values.row(i).iter().copied().collect()
    }

    /// `𝔞(t, -∞)` per t-node.
    pub fn boundary_minus(&self) -> &[C64] {
        &self.boundary_minus
    }

    /// `𝔞(t, +∞)` per t-node.
    pub fn boundary_plus(&self) -> &[C64] {
        &self.boundary_plus
    }

    pub fn sampling(&self) -> FiberSampling {
        self.sampling
    }

    pub fn fibers(&self) -> &[FiberRow] {
        &self.fibers
    }

    pub fn sup_row_v_norm(&self) -> f64 {
        self.sup_row_v_norm
    }

    pub fn flagged_rows(&self) -> &[usize] {
        &self.flagged
    }

    pub fn with_flags(mut self, mut rows: Vec<usize>) -> Self {
        rows.sort_unstable();
        rows.dedup();
        self.flagged = rows;
        self
    }

    /// Replaces the fiber rows, keeping everything else.
    pub fn with_fibers(mut self, fibers: Vec<FiberRow>) -> Result<Self> {
        if fibers.len() != self.fibers.len()
            || fibers.iter().zip(&self.fibers).any(|(a, b)| a.point != b.point)
            || fibers.iter().any(|f| f.values.len() != self.grid.n_x() || !finite(&f.values))
        {
            return Err(Error::InvalidInput(format!("replacement fibers do not fit {}", self.label)));
        }
        self.fibers = fibers;
        Ok(self)
    }

    /// Applies `f` to every stored value, including boundary and fiber rows.
    pub fn map(&self, label: impl Into<String>, f: impl Fn(C64) -> C64) -> Result<Self> {
        let values = Mat::from_fn(self.values.nrows(), self.values.ncols(), |i, k| f(self.values[(i, k)]));
        let band_values = Mat::from_fn(self.band_values.nrows(), self.band_values.ncols(), |i, m| {
            f(self.band_values[(i, m)])
        });
        let fibers = self
            .fibers
            .iter()
            .map(|r| FiberRow {
                point: r.point,
                u_sequence: r.u_sequence,
                values: r.values.iter().map(|&z| f(z)).collect(),
            })
            .collect();
        Ok(Self::from_parts(
            &self.grid,
            label,
            values,
            band_values,
            self.boundary_minus.iter().map(|&z| f(z)).collect(),
            self.boundary_plus.iter().map(|&z| f(z)).collect(),
            self.sampling,
            fibers,
        )?
        .with_flags(self.flagged.clone()))
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(format!("{c}*{}", self.label), |z| c * z)
            .expect("scaling keeps values finite")
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        symbol_algebra(self, other, AlgebraOp::Add)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        symbol_algebra(self, other, AlgebraOp::Mul)
    }
}

/// Pointwise sum or product of values, boundary columns and fiber rows.
pub fn symbol_algebra(a: &BivariateSymbol, b: &BivariateSymbol, op: AlgebraOp) -> Result<BivariateSymbol> {
    if !a.grid.same_as(&b.grid) {
        return Err(Error::InvalidInput(format!(
            "symbols {} and {} live on different grids",
            a.label, b.label
        )));
    }
    if a.fibers.len() != b.fibers.len() || a.fibers.iter().zip(&b.fibers).any(|(p, q)| p.point != q.point) {
        return Err(Error::InvalidInput(format!(
            "symbols {} and {} sample different fibers",
            a.label, b.label
        )));
    }
    let zip = |p: MatRef<'_, C64>, q: MatRef<'_, C64>| {
        Mat::from_fn(p.nrows(), p.ncols(), |i, k| op.apply(p[(i, k)], q[(i, k)]))
    };
    let zip_vec = |p: &[C64], q: &[C64]| -> Vec<C64> { p.iter().zip(q).map(|(&x, &y)| op.apply(x, y)).collect() };
    let fibers = a
        .fibers
        .iter()
        .zip(&b.fibers)
        .map(|(p, q)| FiberRow {
            point: p.point,
            u_sequence: p.u_sequence,
            values: zip_vec(&p.values, &q.values),
        })
        .collect();
    let mut flags = a.flagged.clone();
    flags.extend(&b.flagged);
    Ok(BivariateSymbol::from_parts(
        &a.grid,
        format!("({}{}{})", a.label, op.sign(), b.label),
        zip(a.values(), b.values()),
        zip(a.band_values(), b.band_values()),
        zip_vec(&a.boundary_minus, &b.boundary_minus),
        zip_vec(&a.boundary_plus, &b.boundary_plus),
        a.sampling,
        fibers,
    )?
    .with_flags(flags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::symbols::{make_p_y, make_r_y, Sign};

    fn grid() -> Arc<Grid> {
        Grid::new(GridSpec {
            n_t: 256,
            n_x: 128,
            ..GridSpec::default()
        })
        .unwrap()
    }

    #[test]
    fn one_is_neutral() {
        let g = grid();
        let s = FiberSampling::default();
        let r = BivariateSymbol::x_only(&make_r_y(&g, 2.0).unwrap(), s).unwrap();
        let one = BivariateSymbol::constant(&g, C64::new(1.0, 0.0), s);
        let prod = symbol_algebra(&r, &one, AlgebraOp::Mul).unwrap();
        assert_eq!(prod.values(), r.values());
        assert_eq!(prod.fibers()[3].values, r.fibers()[3].values);
    }

    #[test]
    fn boundary_and_fibers_follow_the_algebra() {
        let g = grid();
        let s = FiberSampling::default();
        let p = BivariateSymbol::x_only(&make_p_y(&g, 2.0, Sign::Plus).unwrap(), s).unwrap();
        let u: Vec<C64> = g.u().iter().map(|&u| C64::new(u.tanh(), 0.5)).collect();
        let t = BivariateSymbol::t_only(&g, "tanh", &u, s, |p| {
            Ok(C64::new(if p.end == crate::shifts::FiberEnd::Zero { -1.0 } else { 1.0 }, 0.5))
        })
        .unwrap();
        let prod = p.mul(&t).unwrap();
        for i in 0..256 {
            assert_eq!(prod.boundary_plus()[i], p.boundary_plus()[i] * t.boundary_plus()[i]);
            assert_eq!(prod.boundary_minus()[i], C64::new(0.0, 0.0));
        }
        let sum = p.add(&t).unwrap();
        for (k, row) in sum.fibers().iter().enumerate() {
            for (j, z) in row.values.iter().enumerate() {
                assert_eq!(*z, p.fibers()[k].values[j] + t.fibers()[k].values[j]);
            }
        }
        let other = Grid::new(GridSpec {
            n_t: 512,
            n_x: 128,
            ..GridSpec::default()
        })
        .unwrap();
        let q = BivariateSymbol::constant(&other, C64::new(1.0, 0.0), s);
        assert!(matches!(p.add(&q), Err(Error::InvalidInput(_))));
    }
}
