//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "kind": "spde_convergence",
//!   "coefficients": "nualart_pardoux",
//!   "n_list": [4, 8, 16, 32],
//!   "dt": 1e-4,
//!   "T": 0.25,
//!   "seed": 42,
//!   "M": 100,
//!   "p": 2.0,
//!   "output_dir": "runs/np"
//! }
//! ```
//!
//! `obstacle` is either a preset name or `{"file": "table.json"}` holding a
//! [`TabulatedObstacle`](crate::obstacle::TabulatedObstacle); relative file
//! paths resolve against the config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::obstacle::{ObstacleInstance, TabulatedObstacle};
use crate::skorohod::{Backend, SolverConfig};
use crate::spde::{SimulationConfig, PRESETS as COEFFICIENT_PRESETS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    PropertySuite,
    ObstacleConvergence,
    SpdeConvergence,
    MomentStudy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObstacleSource {
    Preset(String),
    File { file: PathBuf },
}

fn default_dt() -> f64 {
    1e-4
}

fn default_horizon() -> f64 {
    0.5
}

fn default_p() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub n_list: Vec<usize>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Time horizon; obstacle runs use the obstacle's own horizon when absent.
    #[serde(rename = "T", default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Monte Carlo path count.
    #[serde(rename = "M", default)]
    pub paths: Option<usize>,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub obstacle: Option<ObstacleSource>,
    #[serde(default)]
    pub coefficients: Option<String>,
    #[serde(default)]
    pub backend: Option<Backend>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Random vectors per resolution in the property suite.
    #[serde(default)]
    pub trials: Option<usize>,
    pub output_dir: PathBuf,
}

/// Obstacle presets accepted in configs.
pub const OBSTACLE_PRESETS: [&str; 3] = ["obstacle_positive", "obstacle_sign_change", "obstacle_zigzag"];

pub fn obstacle_preset(name: &str) -> Result<ObstacleInstance> {
    match name {
        "obstacle_positive" => Ok(ObstacleInstance::positive()),
        "obstacle_sign_change" => Ok(ObstacleInstance::sign_change()),
        "obstacle_zigzag" => Ok(ObstacleInstance::zigzag()),
        other => Err(Error::config(format!("unknown obstacle preset {other:?}"))),
    }
}

/// `(name, description)` for every built-in preset.
pub fn list_presets() -> Vec<(&'static str, &'static str)> {
    vec![
        ("heat_decay", "f = 0, sigma = 0, u0 = sin(pi x)"),
        ("nualart_pardoux", "f = 0, sigma = 1, u0 = sin(pi x)"),
        (
            "lipschitz_demo",
            "f = 0.5 c (1 - c) with c = clamp(u, 0, 1), sigma = 0.2 min(1 + |u|, 10), u0 = sin(pi x)",
        ),
        ("obstacle_positive", "V = sin(pi x), T = 1"),
        ("obstacle_sign_change", "V = (1 - 2t) sin(pi x), T = 1"),
        ("obstacle_zigzag", "V = (1 - 2t) sin(pi x) (1 + 0.3 w(x)), w a triangle wave, T = 1"),
    ]
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("n_list must be strictly ascending"));
        }
        if self.n_list.iter().any(|&n| n < 2) {
            return Err(Error::config("n_list entries must be >= 2"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::config("dt must be > 0"));
        }
        if let Some(ObstacleSource::Preset(name)) = &self.obstacle {
            obstacle_preset(name)?;
        }
        if let Some(name) = &self.coefficients {
            if !COEFFICIENT_PRESETS.contains(&name.as_str()) {
                return Err(Error::config(format!("unknown coefficient preset {name:?}")));
            }
        }
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::config(format!("{:?} needs {what}", self.kind)))
            }
        };
        match self.kind {
            Kind::PropertySuite => need(!self.n_list.is_empty(), "a non-empty n_list")?,
            Kind::ObstacleConvergence => {
                need(self.obstacle.is_some(), "an obstacle")?;
                need(self.n_list.len() >= 3, "at least three resolutions")?;
            }
            Kind::SpdeConvergence => {
                need(self.coefficients.is_some(), "a coefficient preset")?;
                need(self.seed.is_some(), "a seed")?;
                need(self.n_list.len() >= 2, "at least two resolutions")?;
            }
            Kind::MomentStudy => {
                need(self.coefficients.is_some(), "a coefficient preset")?;
                need(self.seed.is_some(), "a seed")?;
                need(!self.n_list.is_empty(), "a non-empty n_list")?;
            }
        }
        Ok(())
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self.kind, Kind::SpdeConvergence | Kind::MomentStudy)
    }

    pub fn solver(&self) -> SolverConfig {
        match self.backend.unwrap_or(Backend::ProjectedExponential) {
            Backend::ProjectedExponential => SolverConfig::projected(self.dt),
            Backend::Penalized => SolverConfig {
                dt: self.dt,
                backend: Backend::Penalized,
                epsilon: self.epsilon,
                complementarity_tol: None,
            },
        }
    }

    /// Resolves the obstacle, reading tabulated files relative to `base`.
    pub fn obstacle_instance(&self, base: &Path) -> Result<ObstacleInstance> {
        let inst = match &self.obstacle {
            None => return Err(Error::config("no obstacle given")),
            Some(ObstacleSource::Preset(name)) => obstacle_preset(name)?,
            Some(ObstacleSource::File { file }) => {
                let path = base.join(file);
                let table: TabulatedObstacle = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
                let name = path.file_stem().map_or("tabulated".into(), |s| s.to_string_lossy().into_owned());
                ObstacleInstance::from_table(name, table)?
            }
        };
        match self.horizon {
            Some(t) => inst.with_horizon(t),
            None => Ok(inst),
        }
    }

    /// Simulation settings on the first resolution of `n_list`.
    pub fn simulation(&self) -> Result<SimulationConfig> {
        let name = self.coefficients.as_deref().ok_or_else(|| Error::config("no coefficient preset"))?;
        let n = *self.n_list.first().ok_or_else(|| Error::config("empty n_list"))?;
        SimulationConfig::preset(name, n, self.dt, self.horizon.unwrap_or(default_horizon()), self.seed.unwrap_or(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[test]
    fn minimal_configs_parse() {
        let cfg = parse(r#"{"kind": "property_suite", "n_list": [2, 4], "output_dir": "x"}"#).unwrap();
        assert_eq!(cfg.dt, 1e-4);
        assert_eq!(cfg.p, 2.0);
        let cfg = parse(
            r#"{"kind": "obstacle_convergence", "obstacle": {"file": "v.json"}, "n_list": [4, 8, 16], "output_dir": "x"}"#,
        )
        .unwrap();
        assert_eq!(cfg.obstacle, Some(ObstacleSource::File { file: "v.json".into() }));
    }

    #[test]
    fn invalid_configs_rejected() {
        for text in [
            r#"{"kind": "nope", "output_dir": "x"}"#,
            r#"{"kind": "property_suite", "n_list": [4, 2], "output_dir": "x"}"#,
            r#"{"kind": "spde_convergence", "coefficients": "nualart_pardoux", "n_list": [4, 8], "output_dir": "x"}"#,
            r#"{"kind": "moment_study", "coefficients": "unknown", "seed": 1, "n_list": [4], "output_dir": "x"}"#,
            r#"{"kind": "obstacle_convergence", "obstacle": "missing", "n_list": [4, 8, 16], "output_dir": "x"}"#,
            r#"{"kind": "obstacle_convergence", "obstacle": "obstacle_positive", "n_list": [4, 8], "output_dir": "x"}"#,
            r#"{"kind": "property_suite", "n_list": [4], "output_dir": "x", "extra": 1}"#,
        ] {
            assert!(parse(text).is_err(), "{text}");
        }
    }
}
