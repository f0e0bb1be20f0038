use std::sync::Arc;

use super::{Observation, ObservationMethod, Observer};
use crate::sim::{SimState, Zone};
use crate::Result;

/// `obs(A)`: probe the position of every agent and count those in `zone`.
pub fn observe_brute_force(state: &SimState, zone: &Zone) -> Observation {
    let grid = state.grid();
    let count = if zone.grid() == grid {
        state
            .agents()
            .iter()
            .filter(|a| zone.contains_index(grid.index(a.position)))
            .count()
    } else {
        state
            .agents()
            .iter()
            .filter(|a| zone.contains(a.position))
            .count()
    };
    Observation::exact(
        state.step_index(),
        count as u64,
        ObservationMethod::BruteForce,
    )
}

#[derive(Debug, Clone)]
pub struct BruteForceObserver {
    zone: Arc<Zone>,
}

impl BruteForceObserver {
    pub fn new(zone: Arc<Zone>) -> Self {
        Self { zone }
    }
}

impl Observer for BruteForceObserver {
    fn method(&self) -> ObservationMethod {
        ObservationMethod::BruteForce
    }

    fn observe(&mut self, state: &SimState) -> Result<Observation> {
        Ok(observe_brute_force(state, &self.zone))
    }
}
