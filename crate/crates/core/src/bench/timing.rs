//! Wall-clock timing of scenarios.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{run_scenario_once, Scenario};
use crate::observers::ObservationMethod;
use crate::seed::derive_seed;
use crate::Result;

const WARMUP_STREAM: u64 = 999;
const REPLICATE_STREAM: u64 = 1000;

/// Seed of replicate `r`. Every method timed at the same cell sees the same
/// trajectories for a given replicate.
pub fn replicate_seed(base: u64, r: usize) -> u64 {
    derive_seed(base, REPLICATE_STREAM + r as u64)
}

/// Median and quartiles (linear interpolation between order statistics).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

impl Summary {
    pub fn of(samples: &[f64]) -> Self {
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        Self {
            median: quantile(&s, 0.5),
            q1: quantile(&s, 0.25),
            q3: quantile(&s, 0.75),
        }
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Flattened identity of a timed scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioKey {
    pub agents: u32,
    pub rate: f64,
    /// `None` for the unobserved baseline.
    pub method: Option<ObservationMethod>,
    pub width: u32,
    pub height: u32,
    pub steps: u64,
    pub seed: u64,
    pub survey_d: Option<f64>,
    pub survey_n: Option<usize>,
}

impl ScenarioKey {
    pub fn of(scenario: &Scenario) -> Self {
        Self {
            agents: scenario.sim.agents,
            rate: scenario.rate(),
            method: scenario.method,
            width: scenario.sim.grid.width(),
            height: scenario.sim.grid.height(),
            steps: scenario.sim.steps,
            seed: scenario.sim.seed,
            survey_d: scenario.survey.map(|s| s.max_error),
            survey_n: scenario.survey_sample_size(),
        }
    }

    pub fn method_label(&self) -> &'static str {
        self.method.map_or("none", |m| m.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub key: ScenarioKey,
    /// Seconds per replicate, in execution order.
    pub elapsed: Vec<f64>,
    pub summary: Summary,
}

impl TimingRecord {
    pub fn new(key: ScenarioKey, elapsed: Vec<f64>) -> Self {
        let summary = Summary::of(&elapsed);
        Self {
            key,
            elapsed,
            summary,
        }
    }

    pub fn median(&self) -> f64 {
        self.summary.median
    }
}

/// Time `scenario.replicates` full runs after one untimed warm-up run.
pub fn time_run(scenario: &Scenario) -> Result<TimingRecord> {
    Ok(time_interleaved(std::slice::from_ref(scenario))?.remove(0))
}

/// Time several scenarios, one warm-up each, then replicates in
/// round-robin order so that slow drifts of the machine spread evenly over
/// all scenarios. Each round starts one scenario later than the previous
/// one. Runs execute strictly one after another.
pub fn time_interleaved(scenarios: &[Scenario]) -> Result<Vec<TimingRecord>> {
    for s in scenarios {
        s.validate()?;
    }
    for s in scenarios {
        let out = run_scenario_once(s, derive_seed(s.sim.seed, WARMUP_STREAM))?;
        std::hint::black_box(out.value_sum);
    }
    let rounds = scenarios.iter().map(|s| s.replicates).max().unwrap_or(0);
    let mut elapsed = vec![Vec::new(); scenarios.len()];
    for r in 0..rounds {
        for k in 0..scenarios.len() {
            let i = (r + k) % scenarios.len();
            let s = &scenarios[i];
            if r >= s.replicates {
                continue;
            }
            let seed = replicate_seed(s.sim.seed, r);
            let start = Instant::now();
            let out = run_scenario_once(s, seed)?;
            let secs = start.elapsed().as_secs_f64();
            std::hint::black_box(out.value_sum);
            elapsed[i].push(secs.max(1e-9));
        }
    }
    Ok(scenarios
        .iter()
        .zip(elapsed)
        .map(|(s, e)| TimingRecord::new(ScenarioKey::of(s), e))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::SurveySettings;
    use crate::sim::SimConfig;

    #[test]
    fn summary_quartiles() {
        let s = Summary::of(&[4.0, 1.0, 3.0, 2.0, 5.0]);
        assert_eq!(s.median, 3.0);
        assert_eq!(s.q1, 2.0);
        assert_eq!(s.q3, 4.0);
        assert_eq!(s.iqr(), 2.0);
        assert_eq!(Summary::of(&[1.0, 2.0]).median, 1.5);
    }

    #[test]
    fn replicate_count_and_positive_samples() {
        let sim = SimConfig::with_coverage(200, 0.2)
            .unwrap()
            .steps(20)
            .seed(4);
        let scenario = Scenario::new(sim, Some(ObservationMethod::BruteForce)).replicates(3);
        let record = time_run(&scenario).unwrap();
        assert_eq!(record.elapsed.len(), 3);
        assert!(record.elapsed.iter().all(|&e| e > 0.0));
        assert_eq!(record.key.method_label(), "brute-force");
    }

    #[test]
    fn invalid_scenarios_are_rejected() {
        let sim = SimConfig::with_coverage(200, 0.2).unwrap().steps(5);
        let no_survey = Scenario::new(sim.clone(), Some(ObservationMethod::Survey));
        assert!(time_run(&no_survey).is_err());
        let stray = Scenario::new(sim.clone(), None).with_survey(SurveySettings::new(0.08));
        assert!(time_run(&stray).is_err());
        let zero = Scenario::new(sim, None).replicates(0);
        assert!(time_run(&zero).is_err());
        let bad_sim = Scenario::new(SimConfig::with_coverage(0, 0.2).unwrap(), None);
        assert!(time_run(&bad_sim).is_err());
    }

    #[test]
    fn survey_key_records_sample_size() {
        let sim = SimConfig::with_coverage(10_000, 0.2).unwrap().steps(2);
        let s = Scenario::new(sim, Some(ObservationMethod::Survey))
            .with_survey(SurveySettings::new(0.08));
        assert_eq!(ScenarioKey::of(&s).survey_n, Some(100));
    }
}
