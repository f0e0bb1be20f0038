//! Calibration plans: the `(N, p, method)` grid to time.
//!
//! ```text
//! agents = [2000, 4000]
//! rates = [0.05, 0.2]
//! methods = ["brute-force", "self-observation", "survey"]
//! replicates = 3
//! steps = 1000
//! seed = 1
//! survey_d = 0.08
//! grid.width = 100
//! grid.height = 100
//! exclude = [{ agents = 2000, rate = 0.2, method = "survey" }]
//! ```

use std::path::Path;

use serde::Deserialize;

use super::timing::{time_interleaved, TimingRecord};
use super::{Scenario, SurveySettings};
use crate::config::GridSection;
use crate::observers::ObservationMethod;
use crate::sim::{SimConfig, Zone};
use crate::{Error, Result};

/// Default population axis: 2000, 4000, ..., 20000.
pub fn default_agents() -> Vec<u32> {
    (1..=10).map(|k| 2000 * k).collect()
}

/// Default rate axis: 0.05, 0.1, 0.2, ..., 0.9.
pub fn default_rates() -> Vec<f64> {
    vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
}

fn default_methods() -> Vec<ObservationMethod> {
    vec![
        ObservationMethod::BruteForce,
        ObservationMethod::SelfObservation,
        ObservationMethod::Survey,
    ]
}

fn default_replicates() -> usize {
    5
}

fn default_steps() -> u64 {
    1000
}

fn default_survey_d() -> f64 {
    0.08
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exclusion {
    pub agents: u32,
    pub rate: f64,
    pub method: ObservationMethod,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationPlan {
    #[serde(default = "default_agents")]
    pub agents: Vec<u32>,
    #[serde(default = "default_rates")]
    pub rates: Vec<f64>,
    #[serde(default = "default_methods")]
    pub methods: Vec<ObservationMethod>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_steps")]
    pub steps: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_survey_d")]
    pub survey_d: f64,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub exclude: Vec<Exclusion>,
}

impl Default for CalibrationPlan {
    fn default() -> Self {
        Self::desk_scale()
    }
}

impl CalibrationPlan {
    pub fn desk_scale() -> Self {
        Self {
            agents: default_agents(),
            rates: default_rates(),
            methods: default_methods(),
            replicates: default_replicates(),
            steps: default_steps(),
            seed: 0,
            survey_d: default_survey_d(),
            grid: GridSection::default(),
            exclude: Vec::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let plan: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.agents.is_empty() || self.rates.is_empty() || self.methods.is_empty() {
            return Err(Error::Config("plan needs agents, rates and methods".into()));
        }
        if self.agents.contains(&0) {
            return Err(Error::Config("plan agent counts must be positive".into()));
        }
        if self.rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::Config("plan rates must lie in [0, 1]".into()));
        }
        if self.methods.contains(&ObservationMethod::Adaptive) {
            return Err(Error::Config(
                "the adaptive method cannot be calibrated".into(),
            ));
        }
        if self.replicates == 0 || self.steps == 0 {
            return Err(Error::Config(
                "replicates and steps must be positive".into(),
            ));
        }
        if self.survey_d.is_nan() || self.survey_d <= 0.0 {
            return Err(Error::Config("survey_d must be positive".into()));
        }
        self.grid.to_grid()?;
        Ok(())
    }

    fn excluded(&self, agents: u32, rate: f64, method: ObservationMethod) -> bool {
        self.exclude
            .iter()
            .any(|e| e.agents == agents && e.rate == rate && e.method == method)
    }

    /// Scenarios of one lattice cell, exclusions removed.
    pub fn scenarios_at(&self, agents: u32, rate: f64) -> Result<Vec<Scenario>> {
        let grid = self.grid.to_grid()?;
        let sim = SimConfig::new(grid, Zone::block(grid, rate)?, agents)
            .steps(self.steps)
            .seed(self.seed);
        Ok(self
            .methods
            .iter()
            .filter(|&&m| !self.excluded(agents, rate, m))
            .map(|&m| {
                let s = Scenario::new(sim.clone(), Some(m)).replicates(self.replicates);
                if m == ObservationMethod::Survey {
                    s.with_survey(SurveySettings::new(self.survey_d))
                } else {
                    s
                }
            })
            .collect())
    }

    pub fn cell_count(&self) -> usize {
        self.agents.len() * self.rates.len()
    }

    /// Time every cell. Each record is passed to `on_record` as soon as its
    /// cell is done.
    pub fn run<F>(&self, mut on_record: F) -> Result<Vec<TimingRecord>>
    where
        F: FnMut(&TimingRecord) -> Result<()>,
    {
        self.validate()?;
        let mut out = Vec::new();
        for &rate in &self.rates {
            for &agents in &self.agents {
                let scenarios = self.scenarios_at(agents, rate)?;
                for record in time_interleaved(&scenarios)? {
                    on_record(&record)?;
                    out.push(record);
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_scale_defaults() {
        let plan = CalibrationPlan::desk_scale();
        assert_eq!(plan.agents.first(), Some(&2000));
        assert_eq!(plan.agents.last(), Some(&20000));
        assert_eq!(plan.rates.len(), 10);
        assert_eq!(plan.cell_count(), 100);
        plan.validate().unwrap();
        assert_eq!(CalibrationPlan::parse("").unwrap(), plan);
    }

    #[test]
    fn parses_exclusions() {
        let plan = CalibrationPlan::parse(
            "agents = [100]\nrates = [0.2]\nreplicates = 1\nsteps = 3\n\
             exclude = [{ agents = 100, rate = 0.2, method = \"survey\" }]\n",
        )
        .unwrap();
        let scenarios = plan.scenarios_at(100, 0.2).unwrap();
        assert_eq!(scenarios.len(), 2);
        assert!(scenarios
            .iter()
            .all(|s| s.method != Some(ObservationMethod::Survey)));
    }

    #[test]
    fn rejects_bad_plans() {
        assert!(CalibrationPlan::parse("agents = []\n").is_err());
        assert!(CalibrationPlan::parse("rates = [1.5]\n").is_err());
        assert!(CalibrationPlan::parse("methods = [\"adaptive\"]\n").is_err());
        assert!(CalibrationPlan::parse("methods = [\"naive\"]\n").is_err());
        assert!(CalibrationPlan::parse("replicates = 0\n").is_err());
        assert!(CalibrationPlan::parse("bogus = 1\n").is_err());
    }

    #[test]
    fn small_plan_runs() {
        let plan = CalibrationPlan::parse(
            "agents = [100, 200]\nrates = [0.1, 0.5]\nreplicates = 1\nsteps = 5\n",
        )
        .unwrap();
        let mut seen = 0;
        let records = plan
            .run(|_| {
                seen += 1;
                Ok(())
            })
            .unwrap();
        assert_eq!(records.len(), 12);
        assert_eq!(seen, 12);
        let map = super::super::fastest_method_map(&records).unwrap();
        assert_eq!((map.n_axis.len(), map.p_axis.len()), (2, 2));
    }
}
