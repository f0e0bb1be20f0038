//! Empirical cost of observed runs.
//!
//! The cost metric is the wall-clock time of a whole run (initialization,
//! every step, and one observation per step). Scenarios are timed over an
//! `(N, p)` grid; medians feed difference surfaces, zero isolines and the
//! fastest-method map.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::adaptive::{AdaptiveObserver, AdaptivePolicy};
use crate::observers::{
    BruteForceObserver, IndirectObserver, Observation, ObservationMethod, Observer, SelfObserver,
    SurveyObserver,
};
use crate::sampling::SurveyPlan;
use crate::seed::{stream_rng, OBSERVER_STREAM};
use crate::sim::{SimConfig, SimState};
use crate::{Error, Result};

pub mod calibration;
pub mod export;
pub mod isoline;
pub mod plan;
pub mod surface;
pub mod timing;

pub use calibration::{fastest_method_map, median_surface, CalibrationMap, Provenance};
pub use isoline::{zero_isoline, Polyline};
pub use plan::CalibrationPlan;
pub use surface::{diff_surface, response_surface, SurfaceData, SurfaceSample};
pub use timing::{time_interleaved, time_run, Summary, TimingRecord};

/// Survey design of a scenario. The expected rate defaults to the zone
/// coverage, i.e. the known `E(Z)/N` of the random walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurveySettings {
    pub max_error: f64,
    pub expected_rate: Option<f64>,
}

impl SurveySettings {
    pub fn new(max_error: f64) -> Self {
        Self {
            max_error,
            expected_rate: None,
        }
    }

    pub fn plan(&self, sim: &SimConfig) -> Result<SurveyPlan> {
        let p = self.expected_rate.unwrap_or_else(|| sim.zone.coverage());
        SurveyPlan::new(sim.agents as usize, p, self.max_error)
    }
}

/// What to run and how often. `method: None` is the unobserved baseline.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub sim: SimConfig,
    pub method: Option<ObservationMethod>,
    pub survey: Option<SurveySettings>,
    pub adaptive: Option<Arc<AdaptivePolicy>>,
    pub replicates: usize,
}

impl Scenario {
    pub fn new(sim: SimConfig, method: Option<ObservationMethod>) -> Self {
        Self {
            sim,
            method,
            survey: None,
            adaptive: None,
            replicates: 5,
        }
    }

    pub fn with_survey(mut self, survey: SurveySettings) -> Self {
        self.survey = Some(survey);
        self
    }

    pub fn with_adaptive(mut self, policy: Arc<AdaptivePolicy>) -> Self {
        self.adaptive = Some(policy);
        self
    }

    pub fn replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    /// Survey settings are required by survey and adaptive scenarios (the
    /// latter may delegate to a survey) and rejected otherwise.
    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be positive".into()));
        }
        let wants_survey = matches!(
            self.method,
            Some(ObservationMethod::Survey) | Some(ObservationMethod::Adaptive)
        );
        if wants_survey != self.survey.is_some() {
            return Err(Error::Config(match self.method {
                Some(m) if wants_survey => format!("{m} scenario needs survey settings"),
                _ => "survey settings given for a non-survey scenario".into(),
            }));
        }
        if (self.method == Some(ObservationMethod::Adaptive)) != self.adaptive.is_some() {
            return Err(Error::Config(
                "adaptive scenarios, and only those, take an adaptive policy".into(),
            ));
        }
        Ok(())
    }

    /// Rate coordinate of the scenario: the zone coverage.
    pub fn rate(&self) -> f64 {
        self.sim.zone.coverage()
    }

    pub fn survey_sample_size(&self) -> Option<usize> {
        self.survey
            .as_ref()
            .and_then(|s| s.plan(&self.sim).ok())
            .map(|p| p.sample_size())
    }
}

/// Instantiate the observer of `scenario` with its random stream derived
/// from `seed`.
pub fn build_observer(scenario: &Scenario, seed: u64) -> Result<Option<Box<dyn Observer>>> {
    let sim = &scenario.sim;
    let zone = Arc::clone(&sim.zone);
    let rng = stream_rng(seed, OBSERVER_STREAM);
    let observer: Box<dyn Observer> = match scenario.method {
        None => return Ok(None),
        Some(ObservationMethod::BruteForce) => Box::new(BruteForceObserver::new(zone)),
        Some(ObservationMethod::Indirect) => Box::new(IndirectObserver::new(zone)),
        Some(ObservationMethod::SelfObservation) => Box::new(SelfObserver),
        Some(ObservationMethod::Survey) => {
            let settings = scenario
                .survey
                .ok_or_else(|| Error::Config("survey scenario needs survey settings".into()))?;
            Box::new(SurveyObserver::new(settings.plan(sim)?, rng))
        }
        Some(ObservationMethod::Adaptive) => {
            let policy = scenario
                .adaptive
                .as_ref()
                .ok_or_else(|| Error::Config("adaptive scenario needs a policy".into()))?;
            let settings = scenario
                .survey
                .ok_or_else(|| Error::Config("adaptive scenario needs survey settings".into()))?;
            Box::new(AdaptiveObserver::new(
                (**policy).clone(),
                zone,
                sim.agents,
                settings.max_error,
                rng,
            )?)
        }
    };
    Ok(Some(observer))
}

/// Summary of one executed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: u64,
    pub last: Option<Observation>,
    /// Sum of all observed values; keeps observations live under timing.
    pub value_sum: f64,
    pub positions_fingerprint: u64,
}

/// Run `sim` for `sim.steps` steps, observing after every step and handing
/// each observation to `sink`.
pub fn run_simulation<F>(
    sim: &SimConfig,
    mut observer: Option<&mut dyn Observer>,
    mut sink: F,
) -> Result<RunSummary>
where
    F: FnMut(&Observation) -> Result<()>,
{
    let track_group = observer.as_ref().is_some_and(|o| o.requires_group());
    let mut state = SimState::new(sim, track_group)?;
    let mut last = None;
    let mut value_sum = 0.0;
    for _ in 0..sim.steps {
        state.step();
        if let Some(obs) = observer.as_deref_mut() {
            let o = obs.observe(&state)?;
            value_sum += o.value;
            sink(&o)?;
            last = Some(o);
        }
    }
    Ok(RunSummary {
        steps: sim.steps,
        last,
        value_sum,
        positions_fingerprint: state.positions_fingerprint(),
    })
}

/// Run `scenario` once with its simulation reseeded to `seed`.
pub fn run_scenario_once(scenario: &Scenario, seed: u64) -> Result<RunSummary> {
    let sim = scenario.sim.clone().seed(seed);
    let mut observer = build_observer(scenario, seed)?;
    let observer = observer.as_mut().map(|o| o.as_mut() as &mut dyn Observer);
    run_simulation(&sim, observer, |_| Ok(()))
}
