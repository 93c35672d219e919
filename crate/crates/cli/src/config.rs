//! Run configuration: parameters, quadrature schedule, tolerances, seed and
//! output settings, read from a JSON file and validated on load.

use std::path::{Path, PathBuf};

use ckn_core::params::{derive, CknParams, DerivedParams};
use ckn_core::quadrature::QuadSettings;
use ckn_core::CknError;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default = "default_nodes")]
    pub radial_nodes: usize,
    #[serde(default = "default_nodes")]
    pub sphere_nodes: usize,
    #[serde(default = "default_doubling_max")]
    pub doubling_max: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            radial_nodes: default_nodes(),
            sphere_nodes: default_nodes(),
            doubling_max: default_doubling_max(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_quad_tol")]
    pub quad: f64,
    #[serde(default = "default_identity_tol")]
    pub identity: f64,
    #[serde(default = "default_eigen_tol")]
    pub eigen: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quad: default_quad_tol(),
            identity: default_identity_tol(),
            eigen: default_eigen_tol(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Option<OutputFormat>,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub d: usize,
    #[serde(rename = "A")]
    pub exponents: Vec<f64>,
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_nodes() -> usize {
    64
}

fn default_doubling_max() -> usize {
    512
}

fn default_quad_tol() -> f64 {
    1e-10
}

fn default_identity_tol() -> f64 {
    1e-8
}

fn default_eigen_tol() -> f64 {
    1e-6
}

pub const DEFAULT_SEED: u64 = 42;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl Config {
    /// Unweighted `d = 3` with `a = b = 0` and default settings.
    pub fn classical() -> Self {
        Self::new(vec![0.0; 3], 0.0, 0.0)
    }

    pub fn new(exponents: Vec<f64>, a: f64, b: f64) -> Self {
        Self {
            d: exponents.len(),
            exponents,
            a,
            b,
            quadrature: QuadratureConfig::default(),
            tolerances: Tolerances::default(),
            seed: DEFAULT_SEED,
            output: OutputConfig::default(),
        }
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.exponents.len() != self.d {
            return Err(CknError::WeightLength {
                expected: self.d,
                got: self.exponents.len(),
            }
            .into());
        }
        self.params()?;
        let q = &self.quadrature;
        if q.radial_nodes == 0 || q.sphere_nodes == 0 {
            return Err(CliError::Config("node counts must be positive".into()));
        }
        if q.doubling_max < q.radial_nodes.max(q.sphere_nodes) {
            return Err(CliError::Config(format!(
                "doubling_max = {} is below the starting node count",
                q.doubling_max
            )));
        }
        for (name, v) in [
            ("quad", self.tolerances.quad),
            ("identity", self.tolerances.identity),
            ("eigen", self.tolerances.eigen),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Config(format!(
                    "tolerance {name} = {v} must be positive"
                )));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> CliResult<CknParams> {
        Ok(CknParams::new(self.exponents.clone(), self.a, self.b)?)
    }

    pub fn derived(&self) -> CliResult<(CknParams, DerivedParams)> {
        let p = self.params()?;
        let dp = derive(&p)?;
        Ok((p, dp))
    }

    pub fn quad_settings(&self) -> QuadSettings {
        QuadSettings {
            radial_nodes: self.quadrature.radial_nodes,
            sphere_nodes: self.quadrature.sphere_nodes,
            max_nodes: self.quadrature.doubling_max,
            rel_tol: self.tolerances.quad,
        }
    }
}
