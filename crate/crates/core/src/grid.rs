//! Logarithmic grid over `R+`, the isomorphisms `E` and `Φ`, and the Mellin
//! transform realized as a Fourier transform in the log variable `u = ln t`.
//!
//! Two frequency grids live on a [`Grid`]:
//!
//! * the configured x-grid (uniform on `[-x_max, x_max]`, `n_x` nodes), used
//!   by [`mellin_forward`]/[`mellin_inverse`] and for sampling symbols;
//! * the *band*: the discrete Fourier frequencies `2πm/L` of the periodized
//!   log grid (period `L = n_t h`) with `|ξ| <= x_max`. Operators are realized
//!   on the band, where the analysis/synthesis pair is exactly biorthogonal
//!   and multiplier algebra is preserved to rounding error.

use std::f64::consts::PI;
use std::ops::Range;
use std::sync::{Arc, OnceLock};

use faer::Mat;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result, C64};

/// Discretization parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Lower bound of the log coordinate.
    pub u_min: f64,
    /// Upper bound of the log coordinate.
    pub u_max: f64,
    /// Number of t-nodes (power of two).
    pub n_t: usize,
    /// Frequency truncation `X`.
    pub x_max: f64,
    /// Number of x-nodes (power of two).
    pub n_x: usize,
    /// Lebesgue exponent.
    pub p: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            u_min: -16.0,
            u_max: 16.0,
            n_t: 2048,
            x_max: 20.0,
            n_x: 1024,
            p: 2.0,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.u_min, self.u_max, self.x_max, self.p]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("grid parameters must be finite".into()));
        }
        if self.u_min >= self.u_max {
            return Err(Error::Config(format!(
                "u_min = {} must be below u_max = {}",
                self.u_min, self.u_max
            )));
        }
        for (name, n) in [("n_t", self.n_t), ("n_x", self.n_x)] {
            if n < 8 || !n.is_power_of_two() {
                return Err(Error::Config(format!(
                    "{name} = {n} must be a power of two and at least 8"
                )));
            }
        }
        if self.x_max <= 0.0 {
            return Err(Error::Config("x_max must be positive".into()));
        }
        if !(self.p > 1.0) {
            return Err(Error::Config(format!("p = {} must lie in (1, inf)", self.p)));
        }
        if self.x_max * self.h() >= PI {
            return Err(Error::Config(format!(
                "x_max = {} exceeds the log-grid Nyquist frequency {}",
                self.x_max,
                PI / self.h()
            )));
        }
        Ok(())
    }

    /// Log-grid spacing.
    pub fn h(&self) -> f64 {
        (self.u_max - self.u_min) / (self.n_t - 1) as f64
    }

    /// Frequency-grid spacing.
    pub fn dx(&self) -> f64 {
        2.0 * self.x_max / (self.n_x - 1) as f64
    }

    /// Period of the log grid seen as a discrete circle.
    pub fn period(&self) -> f64 {
        self.n_t as f64 * self.h()
    }

    /// Short content hash identifying the grid in reports and caches.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("grid spec serializes");
        hex_prefix(&Sha256::digest(canonical.as_bytes()), 16)
    }

    /// The same ranges with twice the resolution in `t` and `x`.
    pub fn refined(&self) -> Self {
        Self {
            n_t: self.n_t * 2,
            n_x: self.n_x * 2,
            ..*self
        }
    }
}

pub(crate) fn hex_prefix(bytes: &[u8], len: usize) -> String {
    bytes
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<String>()
        .chars()
        .take(len)
        .collect()
}

/// A validated grid with its node tables and cached band transforms.
#[derive(Debug)]
pub struct Grid {
    spec: GridSpec,
    u: Vec<f64>,
    x: Vec<f64>,
    x_weights: Vec<f64>,
    u_weights: Vec<f64>,
    band: Vec<f64>,
    analysis: OnceLock<Mat<C64>>,
    synthesis: OnceLock<Mat<C64>>,
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Arc<Self>> {
        spec.validate()?;
        let h = spec.h();
        let dx = spec.dx();
        let u: Vec<f64> = (0..spec.n_t).map(|j| spec.u_min + j as f64 * h).collect();
        let x: Vec<f64> = (0..spec.n_x)
            .map(|k| -spec.x_max + k as f64 * dx)
            .collect();
        let mut x_weights = vec![dx; spec.n_x];
        x_weights[0] *= 0.5;
        x_weights[spec.n_x - 1] *= 0.5;
        let mut u_weights = vec![h; spec.n_t];
        u_weights[0] *= 0.5;
        u_weights[spec.n_t - 1] *= 0.5;
        let step = 2.0 * PI / spec.period();
        let m_max = (spec.x_max / step).floor() as i64;
        let band = (-m_max..=m_max).map(|m| m as f64 * step).collect();
        Ok(Arc::new(Self {
            spec,
            u,
            x,
            x_weights,
            u_weights,
            band,
            analysis: OnceLock::new(),
            synthesis: OnceLock::new(),
        }))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn n_t(&self) -> usize {
        self.spec.n_t
    }

    pub fn n_x(&self) -> usize {
        self.spec.n_x
    }

    pub fn p(&self) -> f64 {
        self.spec.p
    }

    pub fn h(&self) -> f64 {
        self.spec.h()
    }

    /// Log-coordinate nodes `u_j`.
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// Frequency nodes `x_k`.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Trapezoid weights on the x-grid.
    pub fn x_weights(&self) -> &[f64] {
        &self.x_weights
    }

    /// Band frequencies `2πm/L`, `|ξ| <= x_max`.
    pub fn band(&self) -> &[f64] {
        &self.band
    }

    pub fn n_band(&self) -> usize {
        self.band.len()
    }

    /// `t_j = e^{u_j}`.
    pub fn t(&self, j: usize) -> f64 {
        self.u[j].exp()
    }

    /// Row indices of the middle half of the log grid.
    pub fn middle_half(&self) -> Range<usize> {
        let n = self.spec.n_t;
        n / 4..n - n / 4
    }

    /// Whether a log coordinate lies inside the sampled range.
    pub fn contains_u(&self, u: f64) -> bool {
        u >= self.spec.u_min && u <= self.spec.u_max
    }

    /// Band analysis matrix `h e^{-iξ_m u_j}` (`n_band x n_t`).
    pub fn analysis(&self) -> &Mat<C64> {
        self.analysis.get_or_init(|| {
            let h = self.h();
            Mat::from_fn(self.band.len(), self.u.len(), |m, j| {
                C64::from_polar(h, -self.band[m] * self.u[j])
            })
        })
    }

    /// Band synthesis matrix `e^{iξ_m u_j} / L` (`n_t x n_band`).
    pub fn synthesis(&self) -> &Mat<C64> {
        self.synthesis.get_or_init(|| {
            let inv_l = 1.0 / self.spec.period();
            Mat::from_fn(self.u.len(), self.band.len(), |j, m| {
                C64::from_polar(inv_l, self.band[m] * self.u[j])
            })
        })
    }

    /// Orthonormal basis of band-limited grid functions (`n_t x n_band`).
    pub fn band_basis(&self) -> Mat<C64> {
        let scale = 1.0 / (self.spec.n_t as f64).sqrt();
        Mat::from_fn(self.u.len(), self.band.len(), |j, m| {
            C64::from_polar(scale, self.band[m] * self.u[j])
        })
    }

    /// Discrete `L²(du)` norm of log samples.
    pub fn norm(&self, values: &[C64]) -> f64 {
        (self.h() * values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Discrete norm restricted to a row range.
    pub fn norm_on(&self, values: &[C64], rows: Range<usize>) -> f64 {
        (self.h() * values[rows].iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.spec == other.spec
    }
}

/// Samples of a function on the t-nodes of a grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    samples: Vec<C64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, samples: Vec<C64>) -> Result<Self> {
        if samples.len() != grid.n_t() {
            return Err(Error::InvalidInput(format!(
                "{} samples on a grid with {} nodes",
                samples.len(),
                grid.n_t()
            )));
        }
        if let Some(j) = samples.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample at node {j}")));
        }
        Ok(Self { grid, samples })
    }

    /// Samples `f(t_j)`.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> C64) -> Result<Self> {
        let samples = grid.u().iter().map(|&u| f(u.exp())).collect();
        Self::new(grid, samples)
    }

    /// Samples given in the log variable, `g(u_j)`.
    pub fn from_log_fn(grid: Arc<Grid>, g: impl Fn(f64) -> C64) -> Result<Self> {
        let samples = grid.u().iter().map(|&u| g(u)).collect();
        Self::new(grid, samples)
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.n_t();
        Self {
            grid,
            samples: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<C64> {
        self.samples
    }

    /// Discrete `L²(R+, dt/t)` norm.
    pub fn norm(&self) -> f64 {
        self.grid.norm(&self.samples)
    }
}

/// `E`: samples in the log variable, `g_j = f(e^{u_j})`.
pub fn to_log(f: &GridFunction) -> Vec<C64> {
    f.samples.clone()
}

/// Inverse of [`to_log`].
pub fn from_log(grid: &Arc<Grid>, values: &[C64]) -> Result<GridFunction> {
    GridFunction::new(Arc::clone(grid), values.to_vec())
}

/// Direction of the weight `Φ f = t^{1/p} f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

pub fn phi_weight(f: &GridFunction, direction: Direction) -> GridFunction {
    let mut samples = f.samples.clone();
    phi_weight_in_place(&f.grid, &mut samples, direction);
    GridFunction {
        grid: Arc::clone(&f.grid),
        samples,
    }
}

pub(crate) fn phi_weight_in_place(grid: &Grid, values: &mut [C64], direction: Direction) {
    let inv_p = 1.0 / grid.p();
    let sign = match direction {
        Direction::Forward => 1.0,
        Direction::Inverse => -1.0,
    };
    for (v, &u) in values.iter_mut().zip(grid.u()) {
        *v *= (sign * inv_p * u).exp();
    }
}

/// Options for [`mellin_forward_with`].
#[derive(Debug, Clone, Copy)]
pub struct MellinOptions {
    /// Largest tolerated ratio of tail magnitude to peak magnitude.
    pub tail_threshold: f64,
}

impl Default for MellinOptions {
    fn default() -> Self {
        Self {
            tail_threshold: 1e-8,
        }
    }
}

/// Emitted when the input does not decay at the ends of the log grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationWarning {
    pub tail_ratio: f64,
    pub threshold: f64,
}

/// Values of a Mellin transform on the x-grid.
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: Arc<Grid>,
    values: Vec<C64>,
    pub truncation_warning: Option<TruncationWarning>,
}

impl Spectrum {
    pub fn new(grid: Arc<Grid>, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n_x() {
            return Err(Error::InvalidInput(format!(
                "{} spectral values on a grid with {} x-nodes",
                values.len(),
                grid.n_x()
            )));
        }
        Ok(Self {
            grid,
            values,
            truncation_warning: None,
        })
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// `(1/2π) Σ w_k |G_k|²`.
    pub fn energy(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.x_weights())
            .map(|(v, w)| w * v.norm_sqr())
            .sum::<f64>()
            / (2.0 * PI)
    }
}

/// `(Mf)(x) = ∫ f(t) t^{-ix} dt/t`, by the trapezoid rule in `u`.
pub fn mellin_forward(f: &GridFunction) -> Spectrum {
    mellin_forward_with(f, MellinOptions::default())
}

pub fn mellin_forward_with(f: &GridFunction, options: MellinOptions) -> Spectrum {
    let grid = &f.grid;
    let values = grid
        .x()
        .iter()
        .map(|&x| {
            grid.u()
                .iter()
                .zip(&grid.u_weights)
                .zip(&f.samples)
                .map(|((&u, &w), &g)| g * C64::from_polar(w, -x * u))
                .sum()
        })
        .collect();
    let peak = f.samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let edge = (grid.n_t() / 64).max(1);
    let tail = f.samples[..edge]
        .iter()
        .chain(&f.samples[grid.n_t() - edge..])
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let tail_ratio = if peak > 0.0 { tail / peak } else { 0.0 };
    let truncation_warning = (tail_ratio > options.tail_threshold).then_some(TruncationWarning {
        tail_ratio,
        threshold: options.tail_threshold,
    });
    Spectrum {
        grid: Arc::clone(grid),
        values,
        truncation_warning,
    }
}

/// `(M^{-1}G)(t) = (1/2π) ∫ G(x) t^{ix} dx`, by the trapezoid rule in `x`.
pub fn mellin_inverse(spectrum: &Spectrum) -> GridFunction {
    let grid = &spectrum.grid;
    let samples = grid
        .u()
        .iter()
        .map(|&u| {
            grid.x()
                .iter()
                .zip(grid.x_weights())
                .zip(&spectrum.values)
                .map(|((&x, &w), &v)| v * C64::from_polar(w / (2.0 * PI), x * u))
                .sum()
        })
        .collect();
    GridFunction {
        grid: Arc::clone(grid),
        samples,
    }
}

/// Discrete energy `Σ w_j |g_j|²` of a grid function in `L²(R+, dt/t)`.
pub fn log_energy(f: &GridFunction) -> f64 {
    f.samples
        .iter()
        .zip(&f.grid.u_weights)
        .map(|(v, w)| w * v.norm_sqr())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Arc<Grid> {
        Grid::new(GridSpec {
            n_t: 512,
            n_x: 256,
            ..GridSpec::default()
        })
        .unwrap()
    }

    #[test]
    fn rejects_bad_specs() {
        let bad = [
            GridSpec { n_t: 1000, ..GridSpec::default() },
            GridSpec { n_x: 4, ..GridSpec::default() },
            GridSpec { u_min: 1.0, u_max: 0.0, ..GridSpec::default() },
            GridSpec { p: 1.0, ..GridSpec::default() },
            GridSpec { x_max: 400.0, ..GridSpec::default() },
        ];
        for spec in bad {
            assert!(matches!(Grid::new(spec), Err(Error::Config(_))), "{spec:?}");
        }
    }

    #[test]
    fn log_samples_of_elementary_functions() {
        let grid = small();
        let one = GridFunction::from_fn(grid.clone(), |_| C64::new(1.0, 0.0)).unwrap();
        assert!(to_log(&one).iter().all(|&z| z == C64::new(1.0, 0.0)));
        let ident = GridFunction::from_fn(grid.clone(), |t| C64::new(t, 0.0)).unwrap();
        for (g, &u) in to_log(&ident).iter().zip(grid.u()) {
            assert!((g.re - u.exp()).abs() <= 1e-15 * u.exp());
        }
        let back = from_log(&grid, &to_log(&ident)).unwrap();
        assert_eq!(back.samples(), ident.samples());
    }

    #[test]
    fn phi_weight_values() {
        let grid = small();
        let one = GridFunction::from_fn(grid.clone(), |_| C64::new(1.0, 0.0)).unwrap();
        let w = phi_weight(&one, Direction::Forward);
        for (j, z) in w.samples().iter().enumerate() {
            let t = grid.t(j);
            assert!((z.re - t.sqrt()).abs() <= 1e-14 * t.sqrt());
        }
        let round = phi_weight(&w, Direction::Inverse);
        for z in round.samples() {
            assert!((z.re - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_wrong_length_and_nan() {
        let grid = small();
        assert!(GridFunction::new(grid.clone(), vec![C64::new(0.0, 0.0); 3]).is_err());
        let mut v = vec![C64::new(0.0, 0.0); grid.n_t()];
        v[7] = C64::new(f64::NAN, 0.0);
        assert!(GridFunction::new(grid, v).is_err());
    }

    #[test]
    fn band_pair_is_biorthogonal() {
        let grid = small();
        let prod = grid.analysis() * grid.synthesis();
        for i in 0..prod.nrows() {
            for j in 0..prod.ncols() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - C64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = GridSpec::default();
        assert_eq!(a.hash(), GridSpec::default().hash());
        assert_ne!(a.hash(), a.refined().hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn truncation_warning_on_non_decaying_input() {
        let grid = small();
        let one = GridFunction::from_fn(grid.clone(), |_| C64::new(1.0, 0.0)).unwrap();
        assert!(mellin_forward(&one).truncation_warning.is_some());
        let bump = GridFunction::from_log_fn(grid, |u| C64::new((-u * u).exp(), 0.0)).unwrap();
        assert!(mellin_forward(&bump).truncation_warning.is_none());
    }
}
