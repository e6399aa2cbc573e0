//! Named fixture pairs `(c, α, ε₁; d, β, ε₂)` for the operator
//! `V = (I - cU_α^{ε₁})P^+ + (I - dU_β^{ε₂})P^-`.

use serde::{Deserialize, Serialize};

use crate::constructions::BinomialData;
use crate::shifts::{FiberSampling, SoFamily, SoFunction, SoShift};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub name: String,
    #[serde(flatten)]
    pub family: SoFamily,
}

impl FixtureSpec {
    pub fn build(&self) -> Result<SoFunction> {
        SoFunction::new(self.name.clone(), self.family.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub name: String,
    pub c: FixtureSpec,
    /// Exponent `ω` of `α(t) = t e^{ω(t)}`.
    pub alpha: FixtureSpec,
    pub epsilon1: i32,
    pub d: FixtureSpec,
    pub beta: FixtureSpec,
    pub epsilon2: i32,
}

impl PairSpec {
    /// Binomial data for `(c, α)` and `(d, β)` at the given `y` and `μ`.
    pub fn binomials(&self, y: f64, mu: f64, p: f64, sampling: FiberSampling) -> Result<(BinomialData, BinomialData)> {
        let alpha = SoShift::new(self.alpha.name.clone(), self.alpha.build()?, p)?;
        let beta = SoShift::new(self.beta.name.clone(), self.beta.build()?, p)?;
        Ok((
            BinomialData::new(&self.c.build()?, &alpha, self.epsilon1, y, mu, sampling)?,
            BinomialData::new(&self.d.build()?, &beta, self.epsilon2, y, mu, sampling)?,
        ))
    }

    /// The same pair with both shift directions replaced.
    pub fn with_directions(&self, epsilon1: i32, epsilon2: i32) -> Self {
        Self {
            name: format!("{}[{epsilon1:+},{epsilon2:+}]", self.name),
            epsilon1,
            epsilon2,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Catalog {
    pub sampling: FiberSampling,
    pub pairs: Vec<PairSpec>,
    /// A pair whose coefficient leaves the unit disk at one endpoint.
    pub violating: PairSpec,
}

fn convergent(name: &str, at_zero: C64, at_infinity: C64, width: f64) -> FixtureSpec {
    FixtureSpec {
        name: name.into(),
        family: SoFamily::Convergent {
            at_zero,
            at_infinity,
            center: 0.0,
            width,
        },
    }
}

fn oscillating(name: &str, level: C64, amplitude: C64, frequency: f64) -> FixtureSpec {
    FixtureSpec {
        name: name.into(),
        family: SoFamily::Oscillating {
            level,
            amplitude,
            frequency,
            phase: 0.0,
        },
    }
}

fn constant(name: &str, value: C64) -> FixtureSpec {
    FixtureSpec {
        name: name.into(),
        family: SoFamily::Constant { value },
    }
}

impl Default for Catalog {
    fn default() -> Self {
        let re = |x: f64| C64::new(x, 0.0);
        let slow = PairSpec {
            name: "slow".into(),
            c: convergent("c_conv", C64::new(0.3, 0.1), C64::new(-0.25, 0.15), 40.0),
            alpha: oscillating("omega_osc", re(0.35), re(0.02), 0.25),
            epsilon1: 1,
            d: oscillating("d_osc", C64::new(0.2, -0.1), re(0.02), 0.25),
            beta: convergent("eta_conv", re(-0.4), re(-0.25), 40.0),
            epsilon2: 1,
        };
        let dilation = PairSpec {
            name: "dilation".into(),
            c: constant("c_half", re(0.5)),
            alpha: constant("ln2", re(std::f64::consts::LN_2)),
            epsilon1: 1,
            d: constant("d_third", C64::new(0.0, 1.0 / 3.0)),
            beta: constant("ln3/2", re(1.5f64.ln())),
            epsilon2: -1,
        };
        let violating = PairSpec {
            name: "violating".into(),
            c: convergent("c_ramp", re(0.5), re(1.2), 4.0),
            ..slow.clone()
        };
        Self {
            sampling: FiberSampling::default(),
            pairs: vec![slow, dilation],
            violating,
        }
    }
}

impl Catalog {
    pub fn pair(&self, name: &str) -> Result<&PairSpec> {
        self.pairs
            .iter()
            .chain(std::iter::once(&self.violating))
            .find(|p| p.name == name)
            .ok_or_else(|| Error::Config(format!("no fixture pair named {name}")))
    }

    pub fn primary(&self) -> &PairSpec {
        &self.pairs[0]
    }

    /// Builds every fixture once so that bad parameters surface early.
    pub fn validate(&self, p: f64) -> Result<()> {
        if self.pairs.is_empty() {
            return Err(Error::Config("catalog has no fixture pairs".into()));
        }
        for pair in self.pairs.iter().chain(std::iter::once(&self.violating)) {
            pair.binomials(2.0, 1.0, p, self.sampling)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_catalog_round_trips_and_validates() {
        let cat = Catalog::default();
        cat.validate(2.0).unwrap();
        let json = serde_json::to_string_pretty(&cat).unwrap();
        let back: Catalog = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cat);
        assert!(cat.pair("violating").is_ok());
        assert!(cat.pair("nope").is_err());
    }

    #[test]
    fn primary_pair_is_contractive() {
        let cat = Catalog::default();
        for pair in &cat.pairs {
            let (dc, dd) = pair.binomials(2.0, 1.0, 2.0, cat.sampling).unwrap();
            for d in [&dc, &dd] {
                let q = d.v.sup_abs() * d.gamma.sup_big_psi().sqrt();
                assert!(q < 0.9, "{} {q}", pair.name);
            }
        }
    }
}
