//! Mellin convolutions and Mellin pseudodifferential operators realized on
//! the band of the periodized log grid.

use std::sync::Arc;

use faer::{Mat, MatRef};

use super::{check_same, LinearOperator, OpRef};
use crate::grid::Grid;
use crate::symbols::{BivariateSymbol, MultiplierSymbol};
use crate::{Result, C64};

/// `Co(a)`: synthesis · diag(a) · analysis.
#[derive(Debug, Clone)]
pub struct ConvOperator {
    grid: Arc<Grid>,
    label: String,
    multiplier: Vec<C64>,
}

impl ConvOperator {
    pub fn multiplier(&self) -> &[C64] {
        &self.multiplier
    }
}

impl LinearOperator for ConvOperator {
    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn apply_block(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        let mut hat = self.grid.analysis() * x;
        for j in 0..hat.ncols() {
            for (m, a) in self.multiplier.iter().enumerate() {
                hat[(m, j)] *= a;
            }
        }
        self.grid.synthesis() * &hat
    }

    fn apply_adjoint_block(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        let mut hat = self.grid.synthesis().adjoint() * x;
        for j in 0..hat.ncols() {
            for (m, a) in self.multiplier.iter().enumerate() {
                hat[(m, j)] *= a.conj();
            }
        }
        self.grid.analysis().adjoint() * &hat
    }

    fn describe(&self) -> String {
        format!("Co({})", self.label)
    }
}

pub fn conv_operator(a: &MultiplierSymbol, grid: &Arc<Grid>) -> Result<ConvOperator> {
    check_same(a.grid(), grid)?;
    Ok(ConvOperator {
        grid: Arc::clone(grid),
        label: a.label().to_owned(),
        multiplier: a.band_values().to_vec(),
    })
}

/// `Co(1)`, the orthogonal projector onto band-limited grid functions.
pub fn band_projector(grid: &Arc<Grid>) -> OpRef {
    Arc::new(ConvOperator {
        grid: Arc::clone(grid),
        label: "1".into(),
        multiplier: vec![C64::new(1.0, 0.0); grid.n_band()],
    })
}

/// `Op(𝔞)`: row `i` applies the multiplier `𝔞(t_i, ·)` and evaluates the
/// inverse transform at `u_i`.
#[derive(Debug, Clone)]
pub struct PdoOperator {
    grid: Arc<Grid>,
    label: String,
    evaluation: Mat<C64>,
    flags: Vec<usize>,
}

impl LinearOperator for PdoOperator {
    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn apply_block(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        let hat = self.grid.analysis() * x;
        &self.evaluation * &hat
    }

    fn apply_adjoint_block(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        let hat = self.evaluation.adjoint() * x;
        self.grid.analysis().adjoint() * &hat
    }

    fn flagged_rows(&self) -> Vec<usize> {
        self.flags.clone()
    }

    fn describe(&self) -> String {
        format!("Op({})", self.label)
    }
}

pub fn pdo_operator(a: &BivariateSymbol, grid: &Arc<Grid>) -> Result<PdoOperator> {
    check_same(a.grid(), grid)?;
    let synth = grid.synthesis();
    let band = a.band_values();
    let evaluation = Mat::from_fn(grid.n_t(), grid.n_band(), |i, m| band[(i, m)] * synth[(i, m)]);
    Ok(PdoOperator {
        grid: Arc::clone(grid),
        label: a.label().to_owned(),
        evaluation,
        flags: a.flagged_rows().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::operators::apply_vec;
    use crate::symbols::{make_p_y, make_r_y, Sign};

    #[test]
    fn projections_sum_to_band_projector() {
        let grid = Grid::new(GridSpec {
            n_t: 256,
            n_x: 128,
            ..GridSpec::default()
        })
        .unwrap();
        let pp = conv_operator(&make_p_y(&grid, 2.0, Sign::Plus).unwrap(), &grid).unwrap();
        let pm = conv_operator(&make_p_y(&grid, 2.0, Sign::Minus).unwrap(), &grid).unwrap();
        let pi = band_projector(&grid);
        let g: Vec<C64> = grid.u().iter().map(|&u| C64::new((-u * u).exp(), 0.0)).collect();
        let sum: Vec<C64> = apply_vec(&pp, &g)
            .iter()
            .zip(apply_vec(&pm, &g))
            .map(|(a, b)| a + b)
            .collect();
        let proj = apply_vec(pi.as_ref(), &g);
        for (a, b) in sum.iter().zip(&proj) {
            assert!((a - b).norm() < 1e-12);
        }
        for (a, b) in proj.iter().zip(&g) {
            assert!((a - b).norm() < 1e-10);
        }
        let r = conv_operator(&make_r_y(&grid, 2.0).unwrap(), &grid).unwrap();
        let rg = apply_vec(&r, &g);
        let rrg = apply_vec(&r, &rg);
        assert!(rrg.iter().all(|z| z.re.is_finite()));
    }
}
