//! Symbols and operators built from binomials `I - vU_γ`: the realization
//! symbols, the Neumann-series symbol, `𝔥_{μ,y}` and its fiber
//! factorization, the regularizer symbol `𝔣`, `𝔤_y`, and the operator
//! chain `V`, `L`, `H`.

mod binomial;
mod chain;
mod factor;
mod regularizer;

use serde::Serialize;

pub use binomial::{
    symbol_binomial_inverse_r, symbol_binomial_r, symbol_shift_r, SeriesReport,
};
pub use chain::{build_v_l_h, build_w, regularizer_w, ChainOperators};
pub use factor::{fiber_vl, symbol_h, HSymbol};
pub use regularizer::{
    reciprocal_symbol, regularizer_symbol_f, symbol_g_y, Reciprocal, ReciprocalOptions,
};

use crate::shifts::{DirectedShift, FiberPoint, FiberSampling, ShiftDirection, SoFunction, SoShift};
use crate::symbols::check_y;
use crate::{Error, Result, C64};

/// Coefficient, shift and parameters of one binomial `I - μ v U_γ`.
#[derive(Debug, Clone, Serialize)]
pub struct BinomialData {
    pub v: SoFunction,
    pub gamma: DirectedShift,
    pub y: f64,
    pub mu: f64,
    pub sampling: FiberSampling,
}

impl BinomialData {
    pub fn new(
        v: &SoFunction,
        shift: &SoShift,
        epsilon: i32,
        y: f64,
        mu: f64,
        sampling: FiberSampling,
    ) -> Result<Self> {
        check_y(y)?;
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::Domain(format!("μ = {mu} must lie in [0, 1]")));
        }
        if epsilon != 1 && epsilon != -1 {
            return Err(Error::Domain(format!("ε = {epsilon} must be ±1")));
        }
        v.check_clock(&sampling)?;
        shift.omega().check_clock(&sampling)?;
        Ok(Self {
            v: v.clone(),
            gamma: shift.directed(ShiftDirection::from_sign(epsilon)),
            y,
            mu,
            sampling,
        })
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::Domain(format!("μ = {mu} must lie in [0, 1]")));
        }
        Ok(Self { mu, ..self.clone() })
    }

    pub fn with_y(&self, y: f64) -> Result<Self> {
        check_y(y)?;
        Ok(Self { y, ..self.clone() })
    }

    /// The effective coefficient `μv`.
    pub fn coefficient(&self) -> SoFunction {
        self.v.scaled(self.mu)
    }

    /// `μ v(ξ)`.
    pub fn fiber_coefficient(&self, point: &FiberPoint) -> Result<C64> {
        Ok(self.mu * self.v.fiber_value(point, &self.sampling)?)
    }

    /// `ψ(ξ)` of the directed shift.
    pub fn fiber_psi(&self, point: &FiberPoint) -> Result<f64> {
        self.gamma.fiber_psi(point, &self.sampling)
    }

    /// `1 - μ v(ξ) e^{iψ(ξ)x}`.
    pub fn fiber_factor(&self, point: &FiberPoint, x: f64) -> Result<C64> {
        Ok(1.0 - self.fiber_coefficient(point)? * C64::from_polar(1.0, self.fiber_psi(point)? * x))
    }

    /// Largest `|μ v(ξ)|` over the sampled fiber points.
    pub fn fiber_magnitude(&self) -> Result<f64> {
        self.sampling
            .points()
            .iter()
            .map(|p| self.fiber_coefficient(p).map(|c| c.norm()))
            .try_fold(0.0, |acc, r| r.map(|m| f64::max(acc, m)))
    }

    pub fn describe(&self) -> String {
        format!("mu={},v={},gamma={},y={}", self.mu, self.v.name, self.gamma.name(), self.y)
    }
}
