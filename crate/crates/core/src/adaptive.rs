//! Adaptive observation: pick the observer per step from a calibrated
//! fastest-method map, keyed by population size and the current estimate of
//! the observed rate.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bench::CalibrationMap;
use crate::observers::group::observe_self;
use crate::observers::{
    BruteForceObserver, IndirectObserver, Observation, ObservationMethod, Observer, SurveyObserver,
};
use crate::sampling::SurveyPlan;
use crate::seed::StreamRng;
use crate::sim::{SimState, Zone};
use crate::{Error, Result};

/// Where the rate coordinate used for selection comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateSource {
    /// The zone coverage, i.e. the known `E(Z)/N`.
    ZoneCoverage,
    Constant(f64),
    /// Exponential moving average of `Z^/N`, starting at `initial` or at the
    /// zone coverage.
    RunningEstimate {
        initial: Option<f64>,
        smoothing: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptivePolicy {
    pub map: CalibrationMap,
    pub rate_source: RateSource,
    /// Consecutive steps a new choice must persist before the observer
    /// switches to it.
    pub switch_hysteresis: u64,
}

impl AdaptivePolicy {
    pub fn new(map: CalibrationMap) -> Self {
        Self {
            map,
            rate_source: RateSource::ZoneCoverage,
            switch_hysteresis: 0,
        }
    }

    pub fn rate_source(mut self, source: RateSource) -> Self {
        self.rate_source = source;
        self
    }

    pub fn hysteresis(mut self, steps: u64) -> Self {
        self.switch_hysteresis = steps;
        self
    }
}

fn nearest(axis: &[f64], q: f64) -> usize {
    let mut best = 0;
    for (i, &a) in axis.iter().enumerate().skip(1) {
        if (a - q).abs() < (axis[best] - q).abs() {
            best = i;
        }
    }
    best
}

/// Label of the map cell nearest to `(agents, rate)`, axis by axis. Ties go
/// to the lower axis entry.
pub fn select_method(map: &CalibrationMap, agents: f64, rate: f64) -> Result<ObservationMethod> {
    map.validate()?;
    let c = nearest(&map.n_axis, agents);
    let r = nearest(&map.p_axis, rate);
    Ok(map.labels[r][c])
}

#[derive(Debug)]
pub struct AdaptiveObserver {
    policy: AdaptivePolicy,
    agents: u32,
    rate: f64,
    current: Option<ObservationMethod>,
    pending: Option<(ObservationMethod, u64)>,
    switches: u64,
    track_group: bool,
    brute: BruteForceObserver,
    indirect: IndirectObserver,
    survey: SurveyObserver,
}

impl AdaptiveObserver {
    pub fn new(
        policy: AdaptivePolicy,
        zone: Arc<Zone>,
        agents: u32,
        survey_d: f64,
        rng: StreamRng,
    ) -> Result<Self> {
        policy.map.validate()?;
        let coverage = zone.coverage();
        let rate = match policy.rate_source {
            RateSource::ZoneCoverage => coverage,
            RateSource::Constant(p) => p,
            RateSource::RunningEstimate { initial, smoothing } => {
                if !(smoothing > 0.0 && smoothing <= 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "smoothing factor {smoothing} outside (0, 1]"
                    )));
                }
                initial.unwrap_or(coverage)
            }
        };
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::InvalidArgument(format!(
                "rate {rate} outside [0, 1]"
            )));
        }
        // G is only maintained when self-observation can be selected.
        let track_group = match policy.rate_source {
            RateSource::RunningEstimate { .. } => policy
                .map
                .distinct_labels()
                .contains(&ObservationMethod::SelfObservation),
            _ => {
                select_method(&policy.map, agents as f64, rate)?
                    == ObservationMethod::SelfObservation
            }
        };
        let plan = SurveyPlan::new(agents as usize, rate, survey_d)?;
        Ok(Self {
            policy,
            agents,
            rate,
            current: None,
            pending: None,
            switches: 0,
            track_group,
            brute: BruteForceObserver::new(Arc::clone(&zone)),
            indirect: IndirectObserver::new(zone),
            survey: SurveyObserver::new(plan, rng),
        })
    }

    pub fn current(&self) -> Option<ObservationMethod> {
        self.current
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Number of delegate changes so far; the first selection is not one.
    pub fn switch_count(&self) -> u64 {
        self.switches
    }

    fn choose(&mut self) -> Result<ObservationMethod> {
        let wanted = select_method(&self.policy.map, self.agents as f64, self.rate)?;
        let current = match self.current {
            None => wanted,
            Some(cur) if cur == wanted => {
                self.pending = None;
                cur
            }
            Some(cur) => {
                let seen = match self.pending {
                    Some((m, k)) if m == wanted => k + 1,
                    _ => 1,
                };
                if seen > self.policy.switch_hysteresis {
                    self.pending = None;
                    self.switches += 1;
                    wanted
                } else {
                    self.pending = Some((wanted, seen));
                    cur
                }
            }
        };
        self.current = Some(current);
        Ok(current)
    }
}

impl Observer for AdaptiveObserver {
    fn method(&self) -> ObservationMethod {
        ObservationMethod::Adaptive
    }

    fn requires_group(&self) -> bool {
        self.track_group
    }

    fn observe(&mut self, state: &SimState) -> Result<Observation> {
        let delegate = self.choose()?;
        let mut obs = match delegate {
            ObservationMethod::BruteForce => self.brute.observe(state)?,
            ObservationMethod::Indirect => self.indirect.observe(state)?,
            ObservationMethod::SelfObservation => observe_self(state)?,
            ObservationMethod::Survey => {
                self.survey.set_expected_rate(self.rate)?;
                self.survey.observe(state)?
            }
            ObservationMethod::Adaptive => {
                return Err(Error::InvalidArgument(
                    "a map cannot delegate to adaptive".into(),
                ))
            }
        };
        if let RateSource::RunningEstimate { smoothing, .. } = self.policy.rate_source {
            let observed = obs.value / self.agents as f64;
            self.rate = ((1.0 - smoothing) * self.rate + smoothing * observed).clamp(0.0, 1.0);
        }
        obs.method = ObservationMethod::Adaptive;
        obs.delegate = Some(delegate);
        Ok(obs)
    }
}

pub fn adaptive_observe(observer: &mut AdaptiveObserver, state: &SimState) -> Result<Observation> {
    observer.observe(state)
}
