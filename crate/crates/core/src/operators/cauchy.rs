use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;

use super::DenseOperator;
use crate::grid::Grid;
use crate::symbols::check_y;
use crate::{Result, C64};

/// Weighted Cauchy kernel in log coordinates, `w = ln t - ln τ`, without
/// the `1/(πi)` factor.
pub(crate) fn log_kernel(w: f64, y: f64) -> f64 {
    (w / y).exp() / -w.exp_m1()
}

/// Principal-value quadrature of the weighted singular integral `S_y`.
///
/// Uses the odd-offset trapezoid rule (weight `2h`, `j - i` odd), which
/// cancels the `1/(u - v)` singularity by symmetry. Independent of the band
/// realization; rows outside the middle half are flagged.
pub fn cauchy_sio_direct(grid: &Arc<Grid>, y: f64) -> Result<DenseOperator> {
    check_y(y)?;
    let n = grid.n_t();
    let u = grid.u();
    let scale = C64::new(0.0, -2.0 * grid.h() / PI);
    let matrix = Mat::from_fn(n, n, |i, j| {
        if (i + j) % 2 == 1 {
            scale * log_kernel(u[i] - u[j], y)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let mut op = DenseOperator::new(grid, matrix, format!("S_{y}[pv]"))?;
    let mid = grid.middle_half();
    op.flags = (0..n).filter(|i| !mid.contains(i)).collect();
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn kernel_matches_closed_form() {
        for w in [-3.0, -0.1, 0.2, 5.0] {
            let direct = (w / 2.0f64).exp() / (1.0 - w.exp());
            assert!((log_kernel(w, 2.0) - direct).abs() < 1e-12 * direct.abs());
        }
    }

    #[test]
    fn antisymmetric_at_y_equal_p() {
        let grid = Grid::new(GridSpec {
            n_t: 64,
            x_max: 4.0,
            n_x: 32,
            ..GridSpec::default()
        })
        .unwrap();
        let op = cauchy_sio_direct(&grid, 2.0).unwrap();
        let m = op.matrix();
        for i in 0..64 {
            for j in 0..64 {
                let a = m[(i, j)] * C64::new(0.0, PI);
                assert!(a.im.abs() < 1e-14);
                assert!((a + m[(j, i)] * C64::new(0.0, PI)).norm() < 1e-12);
            }
        }
        assert!(cauchy_sio_direct(&grid, 1.0).is_err());
    }
}
