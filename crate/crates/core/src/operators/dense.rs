use std::sync::Arc;

use faer::{Mat, MatRef};

use super::{check_same, LinearOperator};
use crate::grid::Grid;
use crate::{Error, Result, C64};

/// An explicit `n_t x n_t` matrix in the weighted frame.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    grid: Arc<Grid>,
    matrix: Mat<C64>,
    pub provenance: String,
    pub flags: Vec<usize>,
}

impl DenseOperator {
    pub fn new(grid: &Arc<Grid>, matrix: Mat<C64>, provenance: impl Into<String>) -> Result<Self> {
        let n = grid.n_t();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::InvalidInput(format!(
                "matrix is {}x{}, grid needs {n}x{n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for j in 0..n {
            if matrix.col(j).iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidInput(format!("column {j} has non-finite entries")));
            }
        }
        Ok(Self {
            grid: Arc::clone(grid),
            matrix,
            provenance: provenance.into(),
            flags: Vec::new(),
        })
    }

    pub fn matrix(&self) -> MatRef<'_, C64> {
        self.matrix.as_ref()
    }

    /// The matrix acting on unweighted samples, `D⁻¹ M D` with `D = diag(t^{1/p})`.
    pub fn sample_frame(&self) -> Mat<C64> {
        let p = self.grid.p();
        let u = self.grid.u();
        Mat::from_fn(self.matrix.nrows(), self.matrix.ncols(), |i, j| {
            self.matrix[(i, j)] * ((u[j] - u[i]) / p).exp()
        })
    }
}

impl LinearOperator for DenseOperator {
    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn apply_block(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        &self.matrix * x
    }

    fn apply_adjoint_block(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        self.matrix.adjoint() * x
    }

    fn flagged_rows(&self) -> Vec<usize> {
        self.flags.clone()
    }

    fn describe(&self) -> String {
        self.provenance.clone()
    }
}

/// Assembles the matrix of any operator by applying it to the identity.
pub fn materialize(op: &dyn LinearOperator) -> DenseOperator {
    let n = op.grid().n_t();
    let matrix = op.apply_block(Mat::<C64>::identity(n, n).as_ref());
    DenseOperator {
        grid: Arc::clone(op.grid()),
        matrix,
        provenance: op.describe(),
        flags: op.flagged_rows(),
    }
}

pub fn op_compose(a: &DenseOperator, b: &DenseOperator) -> Result<DenseOperator> {
    check_same(&a.grid, &b.grid)?;
    let mut flags = a.flags.clone();
    flags.extend(&b.flags);
    flags.sort_unstable();
    flags.dedup();
    Ok(DenseOperator {
        grid: Arc::clone(&a.grid),
        matrix: &a.matrix * &b.matrix,
        provenance: format!("({})·({})", a.provenance, b.provenance),
        flags,
    })
}

/// `αA + B`.
pub fn op_axpy(alpha: C64, a: &DenseOperator, b: &DenseOperator) -> Result<DenseOperator> {
    check_same(&a.grid, &b.grid)?;
    let mut flags = a.flags.clone();
    flags.extend(&b.flags);
    flags.sort_unstable();
    flags.dedup();
    Ok(DenseOperator {
        grid: Arc::clone(&a.grid),
        matrix: faer::Scale(alpha) * &a.matrix + &b.matrix,
        provenance: format!("{alpha}*({}) + ({})", a.provenance, b.provenance),
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::operators::{apply_vec, Identity};

    #[test]
    fn identity_is_neutral() {
        let grid = Grid::new(GridSpec {
            n_t: 32,
            x_max: 2.0,
            n_x: 16,
            ..GridSpec::default()
        })
        .unwrap();
        let m = Mat::from_fn(32, 32, |i, j| C64::new(i as f64, j as f64 - 0.5));
        let a = DenseOperator::new(&grid, m.clone(), "m").unwrap();
        let i = materialize(Identity::new(&grid).as_ref());
        let ai = op_compose(&a, &i).unwrap();
        assert_eq!(ai.matrix(), a.matrix());
        let twice = op_axpy(C64::new(1.0, 0.0), &a, &a).unwrap();
        let g = vec![C64::new(1.0, 0.0); 32];
        let lhs = apply_vec(&twice, &g);
        let rhs = apply_vec(&a, &g);
        for (l, r) in lhs.iter().zip(&rhs) {
            assert!((l - 2.0 * r).norm() < 1e-12);
        }
        assert!(DenseOperator::new(&grid, Mat::zeros(31, 32), "bad").is_err());
    }
}
