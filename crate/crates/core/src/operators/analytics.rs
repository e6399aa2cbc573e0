//! Norms, singular values and the compactness proxy.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::probes::edge_probes;
use super::{col_vec, column, materialize, LinearOperator};
use crate::{Error, Result, C64};

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn euclid(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Power iteration on `B*B` for a map given by closures.
fn power_norm(
    n: usize,
    seed: u64,
    iters: usize,
    forward: impl Fn(&[C64]) -> Vec<C64>,
    adjoint: impl Fn(&[C64]) -> Vec<C64>,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = random_vector(n, &mut rng);
    let mut estimate = 0.0;
    for _ in 0..iters {
        let nv = euclid(&v);
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|z| *z /= nv);
        let w = forward(&v);
        let next = euclid(&w);
        v = adjoint(&w);
        if (next - estimate).abs() <= 1e-10 * next {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// Largest singular value by seeded power iteration on `A*A`.
pub fn op_norm_estimate(op: &dyn LinearOperator, seed: u64) -> f64 {
    power_norm(
        op.grid().n_t(),
        seed,
        300,
        |v| col_vec(op.apply_block(column(v).as_ref()).as_ref(), 0),
        |w| col_vec(op.apply_adjoint_block(column(w).as_ref()).as_ref(), 0),
    )
}

/// All singular values, descending, from a dense SVD.
pub fn singular_values(op: &dyn LinearOperator) -> Result<Vec<f64>> {
    let dense = materialize(op);
    dense
        .matrix()
        .singular_values()
        .map_err(|e| Error::Numerical(format!("svd failed: {e:?}")))
}

/// Number of singular values above `eps·σ_max`.
pub fn eps_rank(singular: &[f64], eps: f64) -> usize {
    let top = singular.first().copied().unwrap_or(0.0);
    singular.iter().filter(|&&s| s > eps * top).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KernelDims {
    pub kernel: usize,
    pub cokernel: usize,
    pub naive_index: i64,
}

fn dims_from(singular: &[f64], eps: f64) -> KernelDims {
    let top = singular.first().copied().unwrap_or(0.0);
    let small = singular.iter().filter(|&&s| s <= eps * top || top == 0.0).count();
    KernelDims {
        kernel: small,
        cokernel: small,
        naive_index: 0,
    }
}

/// Kernel and cokernel estimates from the full singular spectrum.
pub fn kernel_dims(op: &dyn LinearOperator, eps: f64) -> Result<KernelDims> {
    Ok(dims_from(&singular_values(op)?, eps))
}

/// Singular values of the compression `Q* A Q` to the band, descending.
pub fn band_singular_values(op: &dyn LinearOperator) -> Result<Vec<f64>> {
    let q = op.grid().band_basis();
    let aq = op.apply_block(q.as_ref());
    let compressed = q.adjoint() * &aq;
    compressed
        .singular_values()
        .map_err(|e| Error::Numerical(format!("svd failed: {e:?}")))
}

/// Kernel and cokernel estimates for the compression `Q* A Q` to the band.
pub fn band_kernel_dims(op: &dyn LinearOperator, eps: f64) -> Result<KernelDims> {
    Ok(dims_from(&band_singular_values(op)?, eps))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProxyConfig {
    pub sigma_threshold: f64,
    pub edge_threshold: f64,
    pub seed: u64,
    /// Resolve ambiguous singular-value bounds with a dense SVD.
    pub allow_full_svd: bool,
}

impl Default for ProxyConfig {
    fn default() -> Self {
        Self {
            sigma_threshold: 1e-3,
            edge_threshold: 1e-2,
            seed: 0,
            allow_full_svd: true,
        }
    }
}

/// Bracket for `σ_k/σ_1`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SigmaRatio {
    pub k: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeResponse {
    pub probe: String,
    pub ratio: f64,
    pub informational: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum CompactVerdict {
    CompactLike,
    NotCompactLike,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompactnessReport {
    pub sigma_max: f64,
    /// Ratios at `k = n/16, n/8, n/4`.
    pub sigma_ratios: Vec<SigmaRatio>,
    /// Ratios at `k = n_band/16, n_band/8, n_band/4`; informational.
    pub band_sigma_ratios: Vec<SigmaRatio>,
    /// Norm of the operator on the complement of the band.
    pub off_band_norm: f64,
    pub full_svd: bool,
    pub edge: Vec<EdgeResponse>,
    pub max_edge_response: f64,
    pub verdict: CompactVerdict,
}

impl CompactnessReport {
    pub fn sigma_at_eighth(&self) -> SigmaRatio {
        self.sigma_ratios[1]
    }

    pub fn is_compact_like(&self) -> bool {
        self.verdict == CompactVerdict::CompactLike
    }
}

fn brackets(singular: &[f64], eps: f64, ks: &[usize]) -> Vec<SigmaRatio> {
    let top = singular.first().copied().unwrap_or(0.0);
    ks.iter()
        .map(|&k| {
            let s = singular.get(k - 1).copied().unwrap_or(0.0);
            if top == 0.0 && eps == 0.0 {
                SigmaRatio {
                    k,
                    lower: 0.0,
                    upper: 0.0,
                }
            } else if top == 0.0 {
                SigmaRatio {
                    k,
                    lower: 0.0,
                    upper: 1.0,
                }
            } else {
                SigmaRatio {
                    k,
                    lower: s / (top + eps),
                    upper: ((s + eps) / top).min(1.0),
                }
            }
        })
        .collect()
}

/// Finite-dimensional shadow of compactness: singular-value decay plus
/// vanishing response to packets living near the ends of the grid.
///
/// Singular values are bracketed through the compression to the band and
/// the norm on its complement; a dense SVD settles ambiguous brackets.
pub fn compactness_proxy(op: &dyn LinearOperator, config: &ProxyConfig) -> Result<CompactnessReport> {
    let grid = op.grid();
    let n = grid.n_t();
    let q = grid.band_basis();
    let aq = op.apply_block(q.as_ref());
    let compressed = aq
        .singular_values()
        .map_err(|e| Error::Numerical(format!("svd failed: {e:?}")))?;
    let project_out = |v: &[C64]| -> Vec<C64> {
        let coeff = q.adjoint() * column(v);
        let inside = &q * &coeff;
        v.iter().enumerate().map(|(i, z)| z - inside[(i, 0)]).collect()
    };
    let off_band_norm = power_norm(
        n,
        config.seed,
        60,
        |v| col_vec(op.apply_block(column(&project_out(v)).as_ref()).as_ref(), 0),
        |w| project_out(&col_vec(op.apply_adjoint_block(column(w).as_ref()).as_ref(), 0)),
    );
    let ks = [n / 16, n / 8, n / 4];
    let nb = grid.n_band();
    let band_ks = [(nb / 16).max(1), (nb / 8).max(1), (nb / 4).max(1)];
    let band_sigma_ratios = brackets(&compressed, 0.0, &band_ks);
    let mut sigma_ratios = brackets(&compressed, off_band_norm, &ks);
    let mut sigma_max = compressed.first().copied().unwrap_or(0.0).max(off_band_norm);

    let probes = edge_probes(grid);
    let block = Mat::from_fn(n, probes.len(), |i, j| probes[j].values[i]);
    let response = op.apply_block(block.as_ref());
    let edge: Vec<EdgeResponse> = probes
        .iter()
        .enumerate()
        .map(|(j, p)| EdgeResponse {
            probe: p.label.clone(),
            ratio: grid.norm(&col_vec(response.as_ref(), j)) / grid.norm(&p.values),
            informational: j >= 4,
        })
        .collect();
    let max_edge_response = edge
        .iter()
        .filter(|e| !e.informational)
        .map(|e| e.ratio)
        .fold(0.0, f64::max);
    let edges_pass = max_edge_response <= config.edge_threshold;

    let mut full_svd = false;
    let eighth = sigma_ratios[1];
    let ambiguous = eighth.lower <= config.sigma_threshold && eighth.upper > config.sigma_threshold;
    if ambiguous && edges_pass && config.allow_full_svd {
        let full = singular_values(op)?;
        sigma_ratios = brackets(&full, 0.0, &ks);
        sigma_max = full.first().copied().unwrap_or(0.0);
        full_svd = true;
    }
    let sigma_pass = sigma_ratios[1].upper <= config.sigma_threshold;
    let verdict = if sigma_pass && edges_pass {
        CompactVerdict::CompactLike
    } else {
        CompactVerdict::NotCompactLike
    };
    Ok(CompactnessReport {
        sigma_max,
        sigma_ratios,
        band_sigma_ratios,
        off_band_norm,
        full_svd,
        edge,
        max_edge_response,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, GridSpec};
    use crate::operators::{combination, DenseOperator, Identity};
    use std::sync::Arc;

    fn grid() -> Arc<Grid> {
        Grid::new(GridSpec {
            n_t: 128,
            x_max: 8.0,
            n_x: 64,
            ..GridSpec::default()
        })
        .unwrap()
    }

    #[test]
    fn identity_analytics() {
        let g = grid();
        let i = Identity::new(&g);
        assert!((op_norm_estimate(i.as_ref(), 1) - 1.0).abs() < 1e-12);
        let sv = singular_values(i.as_ref()).unwrap();
        assert_eq!(eps_rank(&sv, 0.5), 128);
        assert_eq!(kernel_dims(i.as_ref(), 1e-6).unwrap().kernel, 0);
        let report = compactness_proxy(i.as_ref(), &ProxyConfig::default()).unwrap();
        assert_eq!(report.verdict, CompactVerdict::NotCompactLike);
    }

    #[test]
    fn zero_and_rank_one() {
        let g = grid();
        let i = Identity::new(&g);
        let zero = combination(vec![(C64::new(0.0, 0.0), i)]).unwrap();
        let report = compactness_proxy(zero.as_ref(), &ProxyConfig::default()).unwrap();
        assert!(report.is_compact_like());
        let outer = Mat::from_fn(128, 128, |i, j| C64::new((i as f64).sin() + 2.0, 1.0) * C64::new(1.0, (j as f64).cos()));
        let r1 = DenseOperator::new(&g, outer, "uv*").unwrap();
        let sv = singular_values(&r1).unwrap();
        assert_eq!(eps_rank(&sv, 1e-8), 1);
        let mut zeroed = Mat::<C64>::identity(128, 128);
        zeroed[(5, 5)] = C64::new(0.0, 0.0);
        let d = DenseOperator::new(&g, zeroed, "I-e5e5*").unwrap();
        let dims = kernel_dims(&d, 1e-6).unwrap();
        assert_eq!((dims.kernel, dims.cokernel), (1, 1));
    }
}
