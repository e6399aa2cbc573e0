//! Slowly oscillating shifts `α(t) = t e^{ω(t)}`, their inverses and iterates.

use serde::Serialize;

use super::fixtures::{FiberPoint, FiberSampling, SoFamily, SoFunction};
use crate::grid::Grid;
use crate::{Error, Result};

/// Largest `|ω|` accepted for a shift fixture.
pub const MAX_DISPLACEMENT: f64 = 2.0;
/// Default bound on `|k|` for [`SoShift::iterate`].
pub const MAX_ITERATE: usize = 64;

/// An orientation-preserving shift with fixed points `0` and `∞` only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoShift {
    pub name: String,
    omega: SoFunction,
    p: f64,
}

impl SoShift {
    pub fn new(name: impl Into<String>, omega: SoFunction, p: f64) -> Result<Self> {
        let name = name.into();
        if !omega.is_real() {
            return Err(Error::Config(format!("shift {name}: ω must be real-valued")));
        }
        let sup = omega.sup_abs();
        if sup > MAX_DISPLACEMENT {
            return Err(Error::Config(format!(
                "shift {name}: sup|ω| = {sup} exceeds {MAX_DISPLACEMENT}"
            )));
        }
        if omega.sup_abs_deriv() >= 1.0 {
            return Err(Error::Config(format!(
                "shift {name}: inf(1 + tω') is not bounded away from 0"
            )));
        }
        let one_sign = match &omega.family {
            SoFamily::Constant { .. } => true,
            SoFamily::Convergent {
                at_zero, at_infinity, ..
            } => at_zero.re * at_infinity.re > 0.0 || (at_zero.re == 0.0 && at_infinity.re == 0.0),
            SoFamily::Oscillating { level, amplitude, .. } => {
                level.re.abs() > amplitude.re.abs() || (level.re == 0.0 && amplitude.re == 0.0)
            }
        };
        if !one_sign {
            return Err(Error::Config(format!(
                "shift {name}: ω changes sign, so α has an interior fixed point"
            )));
        }
        Ok(Self { name, omega, p })
    }

    pub fn omega(&self) -> &SoFunction {
        &self.omega
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `ω` in the log variable.
    pub fn omega_u(&self, u: f64) -> f64 {
        self.omega.eval_u(u).re
    }

    /// `Ω = 1 + tω'(t)` in the log variable.
    pub fn big_omega_u(&self, u: f64) -> f64 {
        1.0 + self.omega.deriv_u(u).re
    }

    /// Lower bound for `Ω` over `R+`.
    pub fn inf_big_omega(&self) -> f64 {
        1.0 - self.omega.sup_abs_deriv()
    }

    /// `ln α(t)` as a function of `u = ln t`.
    pub fn forward_u(&self, u: f64) -> f64 {
        u + self.omega_u(u)
    }

    /// `ln α_{-1}(t)`: solves `s + ω(s) = u` by safeguarded Newton.
    pub fn inverse_u(&self, u: f64) -> Result<f64> {
        let span = self.omega.sup_abs() + 1.0;
        let (mut lo, mut hi) = (u - span, u + span);
        let mut s = u - self.omega_u(u);
        for _ in 0..100 {
            let phi = s + self.omega_u(s) - u;
            if phi.abs() <= 1e-14 * u.abs().max(1.0) {
                return Ok(s);
            }
            if phi > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let next = s - phi / self.big_omega_u(s);
            s = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if hi - lo <= 4.0 * f64::EPSILON * u.abs().max(1.0) {
                return Ok(s);
            }
        }
        Err(Error::Numerical(format!(
            "shift {}: inverse did not converge at u = {u}",
            self.name
        )))
    }

    /// `α(t) = t e^{ω(t)}`.
    pub fn shift_apply(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(t * self.omega.eval(t).re.exp())
    }

    /// `α_{-1}(t)`.
    pub fn shift_inverse(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(self.inverse_u(t.ln())?.exp())
    }

    pub fn directed(&self, direction: ShiftDirection) -> DirectedShift {
        DirectedShift {
            shift: self.clone(),
            direction,
        }
    }

    /// `α_k`; negative `k` iterates the inverse.
    pub fn iterate(&self, k: i32) -> Result<ShiftIterate> {
        let n = k.unsigned_abs() as usize;
        if n > MAX_ITERATE {
            return Err(Error::InvalidInput(format!(
                "iterate order {k} exceeds the configured maximum {MAX_ITERATE}"
            )));
        }
        let direction = if k < 0 {
            ShiftDirection::Inverse
        } else {
            ShiftDirection::Forward
        };
        Ok(ShiftIterate {
            step: self.directed(direction),
            n,
        })
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("t = {t} is not a point of R+")))
    }
}

/// `ε = ±1`, selecting `α` or `α_{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftDirection {
    Forward,
    Inverse,
}

impl ShiftDirection {
    pub fn sign(self) -> f64 {
        match self {
            Self::Forward => 1.0,
            Self::Inverse => -1.0,
        }
    }

    pub fn from_sign(eps: i32) -> Self {
        if eps < 0 {
            Self::Inverse
        } else {
            Self::Forward
        }
    }
}

/// The shift `γ = α_ε` with `ψ(t) = ln(γ(t)/t)` and `Ψ = 1 + tψ'(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectedShift {
    pub shift: SoShift,
    pub direction: ShiftDirection,
}

impl DirectedShift {
    pub fn name(&self) -> String {
        match self.direction {
            ShiftDirection::Forward => self.shift.name.clone(),
            ShiftDirection::Inverse => format!("{}^-1", self.shift.name),
        }
    }

    /// `ln γ(e^u)`.
    pub fn step_u(&self, u: f64) -> Result<f64> {
        match self.direction {
            ShiftDirection::Forward => Ok(self.shift.forward_u(u)),
            ShiftDirection::Inverse => self.shift.inverse_u(u),
        }
    }

    /// `ψ` and `Ψ` at `u`, together with `ln γ(e^u)`.
    pub fn psi_data(&self, u: f64) -> Result<(f64, f64, f64)> {
        match self.direction {
            ShiftDirection::Forward => {
                let next = self.shift.forward_u(u);
                Ok((next, next - u, self.shift.big_omega_u(u)))
            }
            ShiftDirection::Inverse => {
                let next = self.shift.inverse_u(u)?;
                Ok((next, next - u, 1.0 / self.shift.big_omega_u(next)))
            }
        }
    }

    pub fn psi_u(&self, u: f64) -> Result<f64> {
        Ok(self.psi_data(u)?.1)
    }

    pub fn big_psi_u(&self, u: f64) -> Result<f64> {
        Ok(self.psi_data(u)?.2)
    }

    /// `ψ(ξ)`; for the inverse shift `ψ(ξ) = -ω(ξ)`.
    pub fn fiber_psi(&self, point: &FiberPoint, sampling: &FiberSampling) -> Result<f64> {
        Ok(self.direction.sign() * self.shift.omega.fiber_value(point, sampling)?.re)
    }

    /// Lower bound for `Ψ` over `R+`.
    pub fn inf_big_psi(&self) -> f64 {
        match self.direction {
            ShiftDirection::Forward => self.shift.inf_big_omega(),
            ShiftDirection::Inverse => 1.0 / (1.0 + self.shift.omega.sup_abs_deriv()),
        }
    }

    /// Upper bound for `Ψ` over `R+`.
    pub fn sup_big_psi(&self) -> f64 {
        match self.direction {
            ShiftDirection::Forward => 1.0 + self.shift.omega.sup_abs_deriv(),
            ShiftDirection::Inverse => 1.0 / self.shift.inf_big_omega(),
        }
    }
}

/// Evaluator for `γ_n`, the `n`-fold composition of a directed shift.
#[derive(Debug, Clone)]
pub struct ShiftIterate {
    step: DirectedShift,
    n: usize,
}

/// Value of an iterate with grid-range metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateValue {
    pub t: f64,
    /// Some intermediate point left the sampled log range.
    pub left_grid: bool,
}

impl ShiftIterate {
    pub fn order(&self) -> usize {
        self.n
    }

    /// `ln γ_n(e^u)`.
    pub fn eval_u(&self, u: f64) -> Result<f64> {
        let mut s = u;
        for _ in 0..self.n {
            s = self.step.step_u(s)?;
        }
        Ok(s)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(self.eval_u(t.ln())?.exp())
    }

    pub fn eval_on(&self, grid: &Grid, t: f64) -> Result<IterateValue> {
        check_t(t)?;
        let mut s = t.ln();
        let mut left_grid = !grid.contains_u(s);
        for _ in 0..self.n {
            s = self.step.step_u(s)?;
            left_grid |= !grid.contains_u(s);
        }
        Ok(IterateValue {
            t: s.exp(),
            left_grid,
        })
    }

    /// `Ψ_n(t) = Π_{k<n} Ψ(γ_k(t))` at `u = ln t`.
    pub fn big_psi_n_u(&self, u: f64) -> Result<f64> {
        let mut s = u;
        let mut prod = 1.0;
        for _ in 0..self.n {
            let (next, _, big) = self.step.psi_data(s)?;
            prod *= big;
            s = next;
        }
        Ok(prod)
    }
}
