//! TOML experiment files.

use std::path::Path;

use locband_core::harness::{ConcentrationStudy, ExperimentConfig, Threshold};
use locband_core::DensityModel;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// The configuration used when no `--config` is given: uniform law on
/// `[0, 2]`, region `[0.5, 1.5]`, `h_n = n^-0.7`, `frak h_n = n^-0.3`.
pub const DEFAULT_CONFIG: &str = r#"seed = 0
n = [1000, 10000, 100000]
replications = 50

[density]
model = "uniform"
lo = [0.0]
hi = [2.0]

[region]
lo = [0.5]
hi = [1.5]

[bandwidth]
a_lo = 0.3
a_hi = 0.7

[grid]
rho = 1.1
delta = 0.5
s_grid = 4
"#;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringSpec {
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default = "default_m_probe")]
    pub m_probe: usize,
    /// Probe law; uniform on the unit cube when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<DensityModel>,
    /// Declared `(C_0, v_0)` for the advisory comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared: Option<(f64, f64)>,
}

fn default_eps() -> Vec<f64> {
    vec![0.1, 0.2, 0.3, 0.5]
}

fn default_m_probe() -> usize {
    1000
}

impl Default for CoveringSpec {
    fn default() -> Self {
        Self { eps: default_eps(), m_probe: default_m_probe(), probe: None, declared: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PoissonizeSpec {
    #[serde(default)]
    pub threshold: Threshold,
}

/// Target of the fixed-target study: explicit values, or the extreme point
/// of the ball in a direction (first coordinate axis by default).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TargetSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
}

/// A whole configuration file: the experiment plus per-study sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileConfig {
    #[serde(flatten)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub concentration: ConcentrationStudy,
    #[serde(default)]
    pub covering: CoveringSpec,
    #[serde(default)]
    pub poissonize: PoissonizeSpec,
    #[serde(default)]
    pub thm1_ii: TargetSpec,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::from_io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn default_config() -> Self {
        Self::parse(DEFAULT_CONFIG).expect("built-in configuration parses")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_parses_and_validates() {
        let c = FileConfig::default_config();
        c.experiment.validate().unwrap();
        assert_eq!(c.experiment.n, [1000, 10_000, 100_000]);
        assert_eq!(c.concentration, ConcentrationStudy::default());
    }

    #[test]
    fn round_trip() {
        let mut c = FileConfig::default_config();
        c.covering.declared = Some((2.0, 1.5));
        c.thm1_ii.direction = Some(vec![1.0, 0.0, 0.0, 0.0]);
        c.poissonize.threshold = Threshold::Absolute(3.5);
        c.experiment.family = Some(vec![locband_core::Kernel::triangular(1)]);
        let text = c.to_toml().unwrap();
        assert_eq!(FileConfig::parse(&text).unwrap(), c);
    }

    #[test]
    fn dotted_keys() {
        let body = &DEFAULT_CONFIG[..DEFAULT_CONFIG.find("[grid]").unwrap()];
        let text = body.to_string() + "\n[concentration]\nc = 0.7\n";
        let text = text.replacen("seed = 0", "seed = 0\ngrid.rho = 1.5", 1);
        let c = FileConfig::parse(&text).unwrap();
        assert_eq!(c.experiment.grid.rho, 1.5);
        assert_eq!(c.concentration.c, 0.7);
        assert_eq!(c.concentration.ratios, [0.5, 1.0, 2.0]);
    }
}
