use std::sync::Arc;

use serde::Serialize;

use super::winding::{winding_number, BoundaryLoop};
use super::{ellipticity_check, EllipticityReport, ELLIPTICITY_THRESHOLD};
use crate::constructions::{build_v_l_h, reciprocal_symbol, BinomialData, ReciprocalOptions};
use crate::grid::Grid;
use crate::operators::{
    compactness_proxy, difference, interior_probes, op_norm_estimate, pdo_operator, product,
    CompactnessReport, OpRef, ProxyConfig,
};
use crate::shifts::WeightedShift;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct ScanOptions {
    /// Number of equally spaced `μ` values in `[0, 1]`.
    pub steps: usize,
    /// Truncation tolerance of the series symbols and Neumann inverses.
    pub tol: f64,
    pub seed: u64,
    pub reciprocal: ReciprocalOptions,
    /// When set, `VL - H` and `LV - H` are run through the compactness proxy.
    pub compactness: Option<ProxyConfig>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            steps: 11,
            tol: 1e-10,
            seed: 0,
            reciprocal: ReciprocalOptions::default(),
            compactness: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub mu: f64,
    /// `max |μc(ξ)|, |μd(ξ)|` over the fiber samples.
    pub fiber_magnitude: f64,
    pub ellipticity: EllipticityReport,
    /// Winding number of each boundary loop of `𝔥_{μ,2}`.
    pub windings: Vec<i64>,
    pub max_residue: f64,
    /// `‖V L H^{(-1)} g - g‖ / ‖g‖` on interior probes.
    pub residual: f64,
    /// `‖V g - g‖ / ‖g‖` on interior probes.
    pub identity_defect: f64,
    pub op_norm: f64,
    /// `|‖V_μ‖ - ‖V_{μ-δ}‖|`, zero on the first row.
    pub norm_step: f64,
    pub lipschitz_bound: f64,
    pub lipschitz_ok: bool,
    pub vl_minus_h: Option<CompactnessReport>,
    pub lv_minus_h: Option<CompactnessReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    pub seed: u64,
    /// `‖cU_α‖ + ‖dU_β‖` at `μ = 1`.
    pub shift_norms: f64,
    pub index_zero: bool,
    pub note: &'static str,
}

const NOTE: &str = "index read off boundary-loop winding of h; the loop is assumed to carry the index for this operator class";

fn shift_norm(d: &BinomialData, grid: &Arc<Grid>, seed: u64) -> Result<f64> {
    let d = d.with_mu(1.0)?;
    let w = WeightedShift::new(&d.coefficient(), &d.gamma, grid)?;
    Ok(op_norm_estimate(&w, seed).max(w.q_static))
}

/// Walks `μ` from 0 to 1 and checks that `V_{μ,2}` stays Fredholm with a
/// winding-zero boundary symbol. A step that is not elliptic aborts the
/// scan with an error naming `μ`.
pub fn homotopy_scan(
    dc: &BinomialData,
    dd: &BinomialData,
    grid: &Arc<Grid>,
    options: &ScanOptions,
) -> Result<ScanReport> {
    if options.steps < 2 {
        return Err(Error::InvalidInput("a scan needs at least two steps".into()));
    }
    let (dc, dd) = (dc.with_y(2.0)?, dd.with_y(2.0)?);
    let shift_norms = shift_norm(&dc, grid, options.seed)? + shift_norm(&dd, grid, options.seed)?;
    let probes = interior_probes(grid, options.seed);
    let block = probes.block();
    let mut rows: Vec<ScanRow> = Vec::with_capacity(options.steps);
    for k in 0..options.steps {
        let mu = k as f64 / (options.steps - 1) as f64;
        let (dcm, ddm) = (dc.with_mu(mu)?, dd.with_mu(mu)?);
        let fiber_magnitude = dcm.fiber_magnitude()?.max(ddm.fiber_magnitude()?);
        if fiber_magnitude >= 1.0 {
            return Err(Error::Ellipticity(format!(
                "μ = {mu}: fiber coefficient magnitude {fiber_magnitude:.4} reaches 1"
            )));
        }
        let chain = build_v_l_h(&dcm, &ddm, grid, options.tol)?;
        let h = &chain.h_symbol.symbol;
        let ellipticity = ellipticity_check(h, ELLIPTICITY_THRESHOLD);
        if !ellipticity.pass {
            return Err(Error::Ellipticity(format!(
                "μ = {mu}: min |h| = {:.3e} on boundary and fiber rows",
                ellipticity.min_abs
            )));
        }
        let mut windings = Vec::new();
        let mut max_residue: f64 = 0.0;
        for l in BoundaryLoop::all_from_symbol(h)? {
            let w = winding_number(&l)?;
            max_residue = max_residue.max(w.residue);
            windings.push(w.winding);
        }
        let h_inv: OpRef = Arc::new(pdo_operator(&reciprocal_symbol(h, &options.reciprocal)?.symbol, grid)?);
        let regularized = product(vec![Arc::clone(&chain.v), Arc::clone(&chain.l), h_inv])?;
        let residual = probes.relative_defect(grid, &regularized.apply_block(block.as_ref()), &block);
        let identity_defect = probes.relative_defect(grid, &chain.v.apply_block(block.as_ref()), &block);
        let op_norm = op_norm_estimate(chain.v.as_ref(), options.seed);
        let (norm_step, lipschitz_bound) = match rows.last() {
            Some(prev) => ((op_norm - prev.op_norm).abs(), (mu - prev.mu) * shift_norms),
            None => (0.0, 0.0),
        };
        let lipschitz_ok = norm_step <= lipschitz_bound + 1e-6 * op_norm;
        let (vl_minus_h, lv_minus_h) = match &options.compactness {
            Some(cfg) => {
                let vl = product(vec![Arc::clone(&chain.v), Arc::clone(&chain.l)])?;
                let lv = product(vec![Arc::clone(&chain.l), Arc::clone(&chain.v)])?;
                (
                    Some(compactness_proxy(difference(&vl, &chain.h)?.as_ref(), cfg)?),
                    Some(compactness_proxy(difference(&lv, &chain.h)?.as_ref(), cfg)?),
                )
            }
            None => (None, None),
        };
        rows.push(ScanRow {
            mu,
            fiber_magnitude,
            ellipticity,
            windings,
            max_residue,
            residual,
            identity_defect,
            op_norm,
            norm_step,
            lipschitz_bound,
            lipschitz_ok,
            vl_minus_h,
            lv_minus_h,
        });
    }
    let index_zero = rows.iter().all(|r| r.windings.iter().all(|&w| w == 0));
    Ok(ScanReport {
        rows,
        seed: options.seed,
        shift_norms,
        index_zero,
        note: NOTE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::shifts::{FiberSampling, SoFamily, SoFunction, SoShift};
    use crate::C64;

    fn grid() -> Arc<Grid> {
        Grid::new(GridSpec {
            n_t: 256,
            n_x: 128,
            ..GridSpec::default()
        })
        .unwrap()
    }

    fn shift() -> SoShift {
        SoShift::new("a", SoFunction::constant("w", C64::new(0.3, 0.0)), 2.0).unwrap()
    }

    #[test]
    fn small_coefficients_have_index_zero() {
        let s = FiberSampling::default();
        let c = SoFunction::constant("c", C64::new(0.3, 0.1));
        let d = SoFunction::constant("d", C64::new(-0.2, 0.2));
        let dc = BinomialData::new(&c, &shift(), 1, 2.0, 1.0, s).unwrap();
        let dd = BinomialData::new(&d, &shift(), -1, 2.0, 1.0, s).unwrap();
        let report = homotopy_scan(&dc, &dd, &grid(), &ScanOptions { steps: 3, ..ScanOptions::default() }).unwrap();
        assert!(report.index_zero);
        assert!(report.rows[0].identity_defect < 1e-8);
        assert!(report.rows.iter().all(|r| r.lipschitz_ok));
    }

    #[test]
    fn growing_coefficient_breaks_ellipticity() {
        let s = FiberSampling::default();
        let c = SoFunction::new(
            "ramp",
            SoFamily::Convergent {
                at_zero: C64::new(0.5, 0.0),
                at_infinity: C64::new(1.2, 0.0),
                center: 0.0,
                width: 4.0,
            },
        )
        .unwrap();
        let d = SoFunction::constant("d", C64::new(0.2, 0.0));
        let dc = BinomialData::new(&c, &shift(), 1, 2.0, 1.0, s).unwrap();
        let dd = BinomialData::new(&d, &shift(), 1, 2.0, 1.0, s).unwrap();
        let err = homotopy_scan(&dc, &dd, &grid(), &ScanOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Ellipticity(ref m) if m.contains("μ = 0.9")), "{err}");
    }
}
