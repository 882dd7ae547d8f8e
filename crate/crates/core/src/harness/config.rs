//! TOML experiment configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::presets::preset;
use crate::error::{LevyError, Result};
use crate::model::{log_grid, Family, ProcessSpec};
use crate::montecarlo::SimPlan;
use crate::report::Band;

/// Either an explicit list or `n` log-spaced points on `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Log { lo: f64, hi: f64, n: usize },
}

impl Grid {
    pub fn log(lo: f64, hi: f64, n: usize) -> Self {
        Grid::Log { lo, hi, n }
    }

    pub fn points(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Log { lo, hi, n } => log_grid(*lo, *hi, *n),
        }
    }

    fn validate(&self, name: &str, positive: bool) -> Result<()> {
        let pts = self.points();
        if pts.is_empty() {
            return Err(LevyError::Config(format!("grid '{name}' is empty")));
        }
        if let Grid::Log { lo, hi, .. } = self {
            if !(*lo > 0.0 && hi >= lo) {
                return Err(LevyError::Config(format!("grid '{name}' needs 0 < lo <= hi")));
            }
        }
        if pts.iter().any(|p| !p.is_finite() || (positive && *p <= 0.0)) {
            return Err(LevyError::Config(format!("grid '{name}' must hold finite positive values")));
        }
        Ok(())
    }

    /// Parses `lo:hi:n` (log-spaced) or a comma-separated list.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || LevyError::Config(format!("cannot parse grid '{s}' (use lo:hi:n or a,b,c)"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() == 3 {
            let lo = parts[0].trim().parse().map_err(|_| bad())?;
            let hi = parts[1].trim().parse().map_err(|_| bad())?;
            let n = parts[2].trim().parse().map_err(|_| bad())?;
            return Ok(Grid::Log { lo, hi, n });
        }
        let v: std::result::Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
        v.map(Grid::List).map_err(|_| bad())
    }
}

/// A preset name or an inline family table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProcessRef {
    Preset(String),
    Family(Family),
}

impl ProcessRef {
    pub fn build(&self) -> Result<ProcessSpec> {
        match self {
            ProcessRef::Preset(name) => preset(name),
            ProcessRef::Family(f) => ProcessSpec::new(f.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    /// Spatial scales for `h`, `V` and product bounds.
    #[serde(default = "default_r")]
    pub r: Grid,
    /// Starting points of exit problems, as fractions of the width.
    #[serde(default = "default_x")]
    pub x: Grid,
    /// Times for the supremum distribution and Pruitt bounds.
    #[serde(default = "default_t")]
    pub t: Grid,
    /// Levels for the supremum distribution.
    #[serde(default = "default_level")]
    pub level: Grid,
    #[serde(default = "default_lambda")]
    pub lambda: Grid,
    #[serde(default = "default_z")]
    pub z: Grid,
    /// Frequencies for exponent checks.
    #[serde(default = "default_xi")]
    pub xi: Grid,
}

fn default_r() -> Grid {
    Grid::log(1e-2, 1e2, 9)
}
fn default_x() -> Grid {
    Grid::List(vec![0.1, 0.25, 0.5, 0.75, 0.9])
}
fn default_t() -> Grid {
    Grid::log(0.01, 1.0, 5)
}
fn default_level() -> Grid {
    Grid::log(0.05, 5.0, 5)
}
fn default_lambda() -> Grid {
    Grid::log(1e-2, 1e2, 5)
}
fn default_z() -> Grid {
    Grid::List(vec![1e-2, 1.0, 1e2])
}
fn default_xi() -> Grid {
    Grid::log(1e-3, 1e3, 13)
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            r: default_r(),
            x: default_x(),
            t: default_t(),
            level: default_level(),
            lambda: default_lambda(),
            z: default_z(),
            xi: default_xi(),
        }
    }
}

fn default_width() -> f64 {
    1.0
}
fn default_closing_beta() -> f64 {
    0.5
}
fn default_output() -> PathBuf {
    PathBuf::from("levyfluct-out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub process: ProcessRef,
    #[serde(default)]
    pub claims: Vec<String>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Interval width `R` of exit problems.
    #[serde(default = "default_width")]
    pub width: f64,
    /// `β` of the logarithmic tail-domination hypothesis of the closing example.
    #[serde(default = "default_closing_beta")]
    pub closing_beta: f64,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub plan: SimPlan,
    /// Band overrides keyed by report id.
    #[serde(default)]
    pub bands: BTreeMap<String, Band>,
}

impl ExperimentConfig {
    pub fn new(process: ProcessRef, claims: &[&str]) -> Self {
        ExperimentConfig {
            process,
            claims: claims.iter().map(|s| s.to_string()).collect(),
            output: default_output(),
            width: default_width(),
            closing_beta: default_closing_beta(),
            grids: Grids::default(),
            plan: SimPlan::default(),
            bands: BTreeMap::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| LevyError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LevyError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| LevyError::Config(e.to_string()))
    }

    /// Checks claim ids, grids and the plan; does not build the process.
    pub fn validate(&self) -> Result<()> {
        if self.claims.is_empty() {
            return Err(LevyError::Config("claim list is empty".into()));
        }
        for c in &self.claims {
            if super::claims::lookup(c).is_none() {
                return Err(LevyError::Config(format!("unknown claim id '{c}'")));
            }
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(LevyError::Config(format!("width must be > 0, got {}", self.width)));
        }
        if !(self.closing_beta > 0.0) {
            return Err(LevyError::Config("closing_beta must be > 0".into()));
        }
        let g = &self.grids;
        for (name, grid) in [
            ("r", &g.r),
            ("t", &g.t),
            ("level", &g.level),
            ("lambda", &g.lambda),
            ("z", &g.z),
            ("xi", &g.xi),
            ("x", &g.x),
        ] {
            grid.validate(name, true)?;
        }
        if g.x.points().iter().any(|f| *f >= 1.0) {
            return Err(LevyError::Config("grid 'x' holds fractions of the width in (0, 1)".into()));
        }
        self.plan
            .validate(Some(self.width))
            .map_err(|e| LevyError::Config(format!("plan: {e}")))
    }

    /// The band for `id`: the configured override, else `default`.
    pub fn band(&self, id: &str, default: Band) -> Band {
        self.bands.get(id).copied().unwrap_or(default)
    }

    /// Exit-problem starting points in absolute units.
    pub fn starts(&self) -> Vec<f64> {
        self.grids.x.points().iter().map(|f| f * self.width).collect()
    }
}
