use rand::Rng;

use super::{Observation, ObservationMethod, Observer};
use crate::sampling::{estimate_total, srswor, IndexSampler, SurveyPlan};
use crate::seed::StreamRng;
use crate::sim::SimState;
use crate::{Error, Result};

fn check_population(state: &SimState, plan: &SurveyPlan) -> Result<()> {
    if plan.population() != state.population() {
        return Err(Error::InvalidArgument(format!(
            "survey plan sized for N={} applied to N={}",
            plan.population(),
            state.population()
        )));
    }
    Ok(())
}

/// Estimate `Z` from a simple random sample of `plan.sample_size()` agents
/// drawn from `rng`, probed against the state's configured zone.
pub fn observe_survey<R: Rng + ?Sized>(
    state: &SimState,
    plan: &SurveyPlan,
    rng: &mut R,
) -> Result<Observation> {
    check_population(state, plan)?;
    let n = plan.sample_size();
    let grid = state.grid();
    let zone = state.zone();
    let agents = state.agents();
    let hits = srswor(state.population(), n, rng)?
        .into_iter()
        .filter(|&id| zone.contains_index(grid.index(agents[id].position)))
        .count();
    let value = estimate_total(hits, n, state.population())?;
    Ok(Observation::estimate(
        state.step_index(),
        value,
        ObservationMethod::Survey,
    ))
}

/// Survey observer with its own random stream.
///
/// Optionally tracks the expected rate as an exponential moving average of
/// `Z^/N` and re-sizes the sample from it. That mode goes beyond a fixed,
/// known `E(Z)`.
#[derive(Debug, Clone)]
pub struct SurveyObserver {
    plan: SurveyPlan,
    rng: StreamRng,
    sampler: Option<IndexSampler>,
    running_rate: Option<f64>,
}

impl SurveyObserver {
    pub fn new(plan: SurveyPlan, rng: StreamRng) -> Self {
        Self {
            plan,
            rng,
            sampler: None,
            running_rate: None,
        }
    }

    /// Re-estimate the expected rate after each observation with smoothing
    /// factor `smoothing` in `(0, 1]`.
    pub fn with_running_rate(mut self, smoothing: f64) -> Result<Self> {
        if !(smoothing > 0.0 && smoothing <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "smoothing factor {smoothing} outside (0, 1]"
            )));
        }
        self.running_rate = Some(smoothing);
        Ok(self)
    }

    pub fn plan(&self) -> &SurveyPlan {
        &self.plan
    }

    /// Re-size the sample for a new expected rate.
    pub fn set_expected_rate(&mut self, p: f64) -> Result<()> {
        if p != self.plan.expected_rate() {
            self.plan = self.plan.resized(p)?;
        }
        Ok(())
    }
}

impl Observer for SurveyObserver {
    fn method(&self) -> ObservationMethod {
        ObservationMethod::Survey
    }

    fn observe(&mut self, state: &SimState) -> Result<Observation> {
        check_population(state, &self.plan)?;
        let population = state.population();
        let sampler = self
            .sampler
            .get_or_insert_with(|| IndexSampler::new(population as u32));
        let n = self.plan.sample_size();
        let grid = state.grid();
        let zone = state.zone();
        let agents = state.agents();
        let hits = sampler
            .draw(n, &mut self.rng)?
            .iter()
            .filter(|&&id| zone.contains_index(grid.index(agents[id as usize].position)))
            .count();
        let value = estimate_total(hits, n, population)?;
        if let Some(alpha) = self.running_rate {
            let p = (1.0 - alpha) * self.plan.expected_rate() + alpha * value / population as f64;
            self.set_expected_rate(p.clamp(0.0, 1.0))?;
        }
        Ok(Observation::estimate(
            state.step_index(),
            value,
            ObservationMethod::Survey,
        ))
    }
}
