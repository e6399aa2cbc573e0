//! Slowly oscillating fixtures and the sequences that probe their fibers.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Endpoint of `R+` a fiber sits over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberEnd {
    Zero,
    Infinity,
}

/// A point of the fiber over `0` or `∞`, identified with the limit along a
/// phase-locked sequence.
///
/// The sequence is `u_n = ±sqrt(exp((phase + 2πn)/clock) - 1)`, so that
/// `clock·ln(1 + u_n²) ≡ phase (mod 2π)`. Every oscillating fixture whose
/// frequency is an integer multiple of the clock converges along it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberPoint {
    pub end: FiberEnd,
    pub phase: f64,
}

impl FiberPoint {
    pub fn label(&self) -> String {
        let end = match self.end {
            FiberEnd::Zero => "zero",
            FiberEnd::Infinity => "infinity",
        };
        format!("{end}@{:.4}", self.phase)
    }

    /// Log coordinate of the `n`-th sequence element.
    pub fn sequence_u(&self, clock: f64, n: usize) -> f64 {
        let u = ((self.phase + 2.0 * PI * n as f64) / clock).exp_m1().sqrt();
        match self.end {
            FiberEnd::Zero => -u,
            FiberEnd::Infinity => u,
        }
    }
}

/// How many fiber points are probed and along which clock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberSampling {
    /// Base frequency; oscillating fixtures must use integer multiples.
    pub clock: f64,
    /// Number of equally spaced phases per endpoint.
    pub phases: usize,
}

impl Default for FiberSampling {
    fn default() -> Self {
        Self {
            clock: 0.25,
            phases: 8,
        }
    }
}

impl FiberSampling {
    pub fn points(&self) -> Vec<FiberPoint> {
        [FiberEnd::Zero, FiberEnd::Infinity]
            .into_iter()
            .flat_map(|end| {
                (0..self.phases).map(move |m| FiberPoint {
                    end,
                    phase: 2.0 * PI * m as f64 / self.phases as f64,
                })
            })
            .collect()
    }
}

/// Parametric families of slowly oscillating functions, written in `u = ln t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SoFamily {
    Constant {
        value: C64,
    },
    /// `a0 + (a∞ - a0)(1 + tanh((u - center)/width))/2`.
    Convergent {
        at_zero: C64,
        at_infinity: C64,
        center: f64,
        width: f64,
    },
    /// `level + amplitude·sin(frequency·ln(1 + u²) + phase)`.
    Oscillating {
        level: C64,
        amplitude: C64,
        frequency: f64,
        phase: f64,
    },
}

/// Coarse classification of a fixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SoKind {
    Constant,
    Convergent,
    Oscillating,
}

/// A named slowly oscillating function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoFunction {
    pub name: String,
    pub family: SoFamily,
}

impl SoFunction {
    pub fn new(name: impl Into<String>, family: SoFamily) -> Result<Self> {
        let f = Self {
            name: name.into(),
            family,
        };
        f.check_params()?;
        Ok(f)
    }

    pub fn constant(name: impl Into<String>, value: C64) -> Self {
        Self {
            name: name.into(),
            family: SoFamily::Constant { value },
        }
    }

    /// `μ·f`, keeping the family.
    pub fn scaled(&self, mu: f64) -> Self {
        let family = match &self.family {
            SoFamily::Constant { value } => SoFamily::Constant { value: mu * value },
            SoFamily::Convergent {
                at_zero,
                at_infinity,
                center,
                width,
            } => SoFamily::Convergent {
                at_zero: mu * at_zero,
                at_infinity: mu * at_infinity,
                center: *center,
                width: *width,
            },
            SoFamily::Oscillating {
                level,
                amplitude,
                frequency,
                phase,
            } => SoFamily::Oscillating {
                level: mu * level,
                amplitude: mu * amplitude,
                frequency: *frequency,
                phase: *phase,
            },
        };
        Self {
            name: format!("{mu}*{}", self.name),
            family,
        }
    }

    fn check_params(&self) -> Result<()> {
        let ok = |z: &C64| z.re.is_finite() && z.im.is_finite();
        let valid = match &self.family {
            SoFamily::Constant { value } => ok(value),
            SoFamily::Convergent {
                at_zero,
                at_infinity,
                center,
                width,
            } => ok(at_zero) && ok(at_infinity) && center.is_finite() && *width > 0.0,
            SoFamily::Oscillating {
                level,
                amplitude,
                frequency,
                phase,
            } => ok(level) && ok(amplitude) && *frequency >= 0.0 && phase.is_finite(),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::Config(format!("fixture {} has invalid parameters", self.name)))
        }
    }

    /// Checks that every fiber sequence of `sampling` converges for this fixture.
    pub fn check_clock(&self, sampling: &FiberSampling) -> Result<()> {
        if let SoFamily::Oscillating { frequency, .. } = self.family {
            let m = frequency / sampling.clock;
            if (m - m.round()).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "fixture {}: frequency {frequency} is not a multiple of the fiber clock {}",
                    self.name, sampling.clock
                )));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> SoKind {
        match &self.family {
            SoFamily::Constant { .. } => SoKind::Constant,
            SoFamily::Convergent { .. } => SoKind::Convergent,
            SoFamily::Oscillating { amplitude, frequency, .. } => {
                if amplitude.norm() == 0.0 || *frequency == 0.0 {
                    SoKind::Constant
                } else {
                    SoKind::Oscillating
                }
            }
        }
    }

    /// Value at log coordinate `u`.
    pub fn eval_u(&self, u: f64) -> C64 {
        match &self.family {
            SoFamily::Constant { value } => *value,
            SoFamily::Convergent {
                at_zero,
                at_infinity,
                center,
                width,
            } => at_zero + (at_infinity - at_zero) * (0.5 * (1.0 + ((u - center) / width).tanh())),
            SoFamily::Oscillating {
                level,
                amplitude,
                frequency,
                phase,
            } => level + amplitude * (frequency * u.mul_add(u, 1.0).ln() + phase).sin(),
        }
    }

    /// `t f'(t)` at `t = e^u`, i.e. the derivative in `u`.
    pub fn deriv_u(&self, u: f64) -> C64 {
        match &self.family {
            SoFamily::Constant { .. } => C64::new(0.0, 0.0),
            SoFamily::Convergent {
                at_zero,
                at_infinity,
                center,
                width,
            } => {
                let sech = 1.0 / ((u - center) / width).cosh();
                (at_infinity - at_zero) * (0.5 * sech * sech / width)
            }
            SoFamily::Oscillating {
                amplitude,
                frequency,
                phase,
                ..
            } => {
                let q = u.mul_add(u, 1.0);
                amplitude * ((frequency * q.ln() + phase).cos() * frequency * 2.0 * u / q)
            }
        }
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.eval_u(t.ln())
    }

    pub fn eval_log_deriv(&self, t: f64) -> C64 {
        self.deriv_u(t.ln())
    }

    /// Exact supremum of `|f|` over `R+`.
    pub fn sup_abs(&self) -> f64 {
        match &self.family {
            SoFamily::Constant { value } => value.norm(),
            SoFamily::Convergent {
                at_zero, at_infinity, ..
            } => at_zero.norm().max(at_infinity.norm()),
            SoFamily::Oscillating { level, amplitude, .. } => {
                if self.kind() == SoKind::Constant {
                    (level + amplitude * self.constant_sine()).norm()
                } else {
                    (level + amplitude).norm().max((level - amplitude).norm())
                }
            }
        }
    }

    /// Upper bound for `sup |f'(u)|`.
    pub fn sup_abs_deriv(&self) -> f64 {
        match &self.family {
            SoFamily::Constant { .. } => 0.0,
            SoFamily::Convergent {
                at_zero,
                at_infinity,
                width,
                ..
            } => (at_infinity - at_zero).norm() / (2.0 * width),
            SoFamily::Oscillating {
                amplitude, frequency, ..
            } => amplitude.norm() * frequency,
        }
    }

    fn constant_sine(&self) -> f64 {
        match self.family {
            SoFamily::Oscillating { phase, .. } => phase.sin(),
            _ => 0.0,
        }
    }

    /// Limit at an endpoint, when it exists.
    pub fn limit(&self, end: FiberEnd) -> Option<C64> {
        match &self.family {
            SoFamily::Constant { value } => Some(*value),
            SoFamily::Convergent {
                at_zero, at_infinity, ..
            } => Some(match end {
                FiberEnd::Zero => *at_zero,
                FiberEnd::Infinity => *at_infinity,
            }),
            SoFamily::Oscillating { level, amplitude, .. } => (self.kind() == SoKind::Constant)
                .then(|| level + amplitude * self.constant_sine()),
        }
    }

    /// Value at a fiber point: the limit along its sequence.
    pub fn fiber_value(&self, point: &FiberPoint, sampling: &FiberSampling) -> Result<C64> {
        self.check_clock(sampling)?;
        Ok(match &self.family {
            SoFamily::Oscillating {
                level,
                amplitude,
                frequency,
                phase,
            } => {
                let m = (frequency / sampling.clock).round();
                level + amplitude * (m * point.phase + phase).sin()
            }
            _ => self.limit(point.end).expect("non-oscillating fixtures converge"),
        })
    }

    /// `sup |f(t) - f(τ)|` over `ln t, ln τ ∈ [lo, hi]`, from `samples` nodes.
    pub fn oscillation(&self, lo: f64, hi: f64, samples: usize) -> f64 {
        let vals: Vec<C64> = (0..samples)
            .map(|k| self.eval_u(lo + (hi - lo) * k as f64 / (samples - 1) as f64))
            .collect();
        diameter(&vals)
    }

    pub fn is_real(&self) -> bool {
        let r = |z: &C64| z.im == 0.0;
        match &self.family {
            SoFamily::Constant { value } => r(value),
            SoFamily::Convergent {
                at_zero, at_infinity, ..
            } => r(at_zero) && r(at_infinity),
            SoFamily::Oscillating { level, amplitude, .. } => r(level) && r(amplitude),
        }
    }
}

pub(crate) fn diameter(vals: &[C64]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in vals.iter().enumerate() {
        for b in &vals[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn osc() -> SoFunction {
        SoFunction::new(
            "osc",
            SoFamily::Oscillating {
                level: C64::new(0.4, 0.0),
                amplitude: C64::new(0.1, 0.05),
                frequency: 0.5,
                phase: 0.3,
            },
        )
        .unwrap()
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let ramp = SoFunction::new(
            "ramp",
            SoFamily::Convergent {
                at_zero: C64::new(0.2, 0.1),
                at_infinity: C64::new(-0.5, 0.0),
                center: 1.0,
                width: 3.0,
            },
        )
        .unwrap();
        for f in [osc(), ramp] {
            for k in 0..50 {
                let u = -12.0 + 0.5 * k as f64;
                let e = 1e-5;
                let fd = (f.eval_u(u + e) - f.eval_u(u - e)) / (2.0 * e);
                assert!((fd - f.deriv_u(u)).norm() < 1e-8, "{} at {u}", f.name);
            }
        }
    }

    #[test]
    fn fiber_values_are_limits_along_sequences() {
        let f = osc();
        let sampling = FiberSampling::default();
        for point in sampling.points() {
            let limit = f.fiber_value(&point, &sampling).unwrap();
            for n in 1..5 {
                let u = point.sequence_u(sampling.clock, n);
                assert!((f.eval_u(u) - limit).norm() < 1e-9, "{}", point.label());
            }
        }
    }

    #[test]
    fn clock_mismatch_is_a_config_error() {
        let f = SoFunction::new(
            "odd",
            SoFamily::Oscillating {
                level: C64::new(0.0, 0.0),
                amplitude: C64::new(0.1, 0.0),
                frequency: 0.3,
                phase: 0.0,
            },
        )
        .unwrap();
        assert!(f.check_clock(&FiberSampling::default()).is_err());
    }

    #[test]
    fn sup_is_attained_bound() {
        let f = osc();
        let dense = (0..20000)
            .map(|k| f.eval_u(-1e4 + k as f64).norm())
            .fold(0.0, f64::max);
        assert!(dense <= f.sup_abs() + 1e-15);
        assert!(dense >= f.sup_abs() - 1e-3);
    }
}
