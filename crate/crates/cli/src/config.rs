use std::path::Path;

use serde::{Deserialize, Serialize};

use mellin_core::catalog::Catalog;
use mellin_core::grid::GridSpec;

use crate::CliError;

/// Partial grid; missing fields keep their defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub u_min: Option<f64>,
    pub u_max: Option<f64>,
    pub n_t: Option<usize>,
    pub x_max: Option<f64>,
    pub n_x: Option<usize>,
    pub p: Option<f64>,
}

/// Check lists per suite. A missing list runs the whole suite.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteLists {
    pub identities: Option<Vec<String>>,
    pub pdo: Option<Vec<String>>,
    pub index: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub grid: GridConfig,
    pub seed: u64,
    /// Truncation tolerance of Neumann series and series symbols.
    pub tol: f64,
    pub ys: Vec<f64>,
    pub catalog: Catalog,
    pub suites: SuiteLists,
    /// Node stride of symbol traces in plot data.
    pub plot_stride: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            seed: 0,
            tol: 1e-10,
            ys: vec![1.5, 2.0, 3.0],
            catalog: Catalog::default(),
            suites: SuiteLists::default(),
            plot_stride: 8,
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let config: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.check()?;
        Ok(config)
    }

    fn check(&self) -> Result<(), CliError> {
        if !(self.tol > 0.0 && self.tol < 1e-2) {
            return Err(CliError::Config(format!("tol must lie in (0, 1e-2), got {}", self.tol)));
        }
        if self.ys.is_empty() {
            return Err(CliError::Config("ys must not be empty".into()));
        }
        if self.plot_stride == 0 {
            return Err(CliError::Config("plot_stride must be positive".into()));
        }
        self.grid_spec(None)?;
        self.catalog
            .validate(self.grid_spec(None)?.p)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// The grid after applying `--grid-n`: `n_t = N`, `n_x = N/2`, with `X`
    /// lowered when needed so that `X·h < π` still holds.
    pub fn grid_spec(&self, grid_n: Option<usize>) -> Result<GridSpec, CliError> {
        let d = GridSpec::default();
        let g = &self.grid;
        let mut spec = GridSpec {
            u_min: g.u_min.unwrap_or(d.u_min),
            u_max: g.u_max.unwrap_or(d.u_max),
            n_t: g.n_t.unwrap_or(d.n_t),
            x_max: g.x_max.unwrap_or(d.x_max),
            n_x: g.n_x.unwrap_or(d.n_x),
            p: g.p.unwrap_or(d.p),
        };
        if let Some(n) = grid_n {
            spec.n_t = n;
            spec.n_x = (n / 2).max(2);
            if spec.x_max * spec.h() >= std::f64::consts::PI {
                spec.x_max = (std::f64::consts::FRAC_PI_2 / spec.h()).floor().max(1.0);
            }
        }
        spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_the_default() {
        let c: Config = serde_json::from_str("{}").unwrap();
        assert_eq!(c.grid_spec(None).unwrap(), GridSpec::default());
        assert_eq!(c.ys, vec![1.5, 2.0, 3.0]);
    }

    #[test]
    fn unknown_key_names_line() {
        let err = serde_json::from_str::<Config>("{\n  \"seed\": 1,\n  \"sead\": 2\n}").unwrap_err();
        assert!(err.to_string().contains("sead") && err.line() == 3, "{err}");
    }

    #[test]
    fn grid_n_keeps_band_condition() {
        let spec = Config::default().grid_spec(Some(64)).unwrap();
        assert_eq!((spec.n_t, spec.n_x), (64, 32));
        assert!(spec.x_max * spec.h() < std::f64::consts::PI);
    }
}
