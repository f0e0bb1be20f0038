use std::sync::Arc;

use super::{Observation, ObservationMethod, Observer};
use crate::sim::{SimState, Zone};
use crate::{Error, Result};

/// Infer `Z` from the occupancy traces kept in the grid, without touching
/// any agent record.
///
/// The configured zone's running total is read directly; any other zone is
/// summed from the per-cell counters, which fails when those are disabled.
pub fn observe_indirect(state: &SimState, zone: &Zone) -> Result<Observation> {
    let step = state.step_index();
    let registered = state.zone();
    if std::ptr::eq(zone, &**registered) || zone == &**registered {
        return Ok(Observation::exact(
            step,
            state.zone_occupancy(),
            ObservationMethod::Indirect,
        ));
    }
    let occupancy = state.occupancy().ok_or(Error::UntrackedZone)?;
    if zone.grid() != state.grid() {
        return Err(Error::InvalidArgument(
            "zone was built for a different grid".into(),
        ));
    }
    let grid = state.grid();
    let count: u64 = zone
        .cells()
        .iter()
        .map(|&c| occupancy[grid.index(c)] as u64)
        .sum();
    Ok(Observation::exact(step, count, ObservationMethod::Indirect))
}

#[derive(Debug, Clone)]
pub struct IndirectObserver {
    zone: Arc<Zone>,
}

impl IndirectObserver {
    pub fn new(zone: Arc<Zone>) -> Self {
        Self { zone }
    }
}

impl Observer for IndirectObserver {
    fn method(&self) -> ObservationMethod {
        ObservationMethod::Indirect
    }

    fn observe(&mut self, state: &SimState) -> Result<Observation> {
        if Arc::ptr_eq(&self.zone, state.zone()) {
            return Ok(Observation::exact(
                state.step_index(),
                state.zone_occupancy(),
                ObservationMethod::Indirect,
            ));
        }
        observe_indirect(state, &self.zone)
    }
}
