//! Plain-text key/value run configuration.
//!
//! ```text
//! grid.width = 100
//! grid.height = 100
//! agents = 10000
//! steps = 1000
//! seed = 42
//! zone.x0 = 0
//! zone.y0 = 0
//! zone.x1 = 100
//! zone.y1 = 20
//! ```
//!
//! The zone is the half-open rectangle `[x0, x1) x [y0, y1)`; when no zone
//! key is given it defaults to a compact block covering 20% of the grid. Seeds
//! resolve as: explicit override, then file, then `OBS_MABS_SEED`, then 0.

use std::path::Path;

use serde::Deserialize;

use crate::sim::{GridSpec, SimConfig, Zone};
use crate::{Error, Result};

pub const SEED_ENV: &str = "OBS_MABS_SEED";

/// Default zone coverage, `E(Z) = N/5`.
pub const DEFAULT_COVERAGE: f64 = 0.2;

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub width: Option<u32>,
    pub height: Option<u32>,
}

impl GridSection {
    pub fn to_grid(&self) -> Result<GridSpec> {
        let d = GridSpec::default();
        GridSpec::new(
            self.width.unwrap_or(d.width()),
            self.height.unwrap_or(d.height()),
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZoneSection {
    pub x0: Option<u32>,
    pub y0: Option<u32>,
    pub x1: Option<u32>,
    pub y1: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub grid: GridSection,
    pub agents: Option<u32>,
    pub steps: Option<u64>,
    pub seed: Option<u64>,
    pub zone: ZoneSection,
}

/// Command-line overrides; `None` keeps the file value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub width: Option<u32>,
    pub height: Option<u32>,
    pub agents: Option<u32>,
    pub steps: Option<u64>,
    pub seed: Option<u64>,
}

pub fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn resolve(&self, overrides: &Overrides, env_seed: Option<u64>) -> Result<SimConfig> {
        let grid = GridSection {
            width: overrides.width.or(self.grid.width),
            height: overrides.height.or(self.grid.height),
        }
        .to_grid()?;
        let agents = overrides
            .agents
            .or(self.agents)
            .ok_or_else(|| Error::Config("`agents` is required".into()))?;
        let z = &self.zone;
        let zone = match (z.x0, z.y0, z.x1, z.y1) {
            (None, None, None, None) => Zone::block(grid, DEFAULT_COVERAGE)?,
            (Some(x0), Some(y0), Some(x1), Some(y1)) => Zone::rect(grid, x0, y0, x1, y1)?,
            _ => {
                return Err(Error::Config(
                    "zone needs all of zone.x0, zone.y0, zone.x1, zone.y1".into(),
                ))
            }
        };
        let config = SimConfig::new(grid, zone, agents)
            .steps(overrides.steps.or(self.steps).unwrap_or(1000))
            .seed(overrides.seed.or(self.seed).or(env_seed).unwrap_or(0));
        config.validate()?;
        Ok(config)
    }
}
