//! Filtering functions `filter: 2^A -> 2^A` with `filter(A') ⊆ A'`.

use rand::Rng;

use crate::sampling::srswor;
use crate::seed::StreamRng;
use crate::sim::{AgentId, SimState, Zone};
use crate::Result;

pub trait Filter {
    /// Subset of `candidates` kept by the filter.
    fn filter(&mut self, state: &SimState, candidates: &[AgentId]) -> Result<Vec<AgentId>>;
}

/// Keeps candidates located in a zone.
#[derive(Debug, Clone, Copy)]
pub struct ZoneFilter<'a> {
    pub zone: &'a Zone,
}

impl Filter for ZoneFilter<'_> {
    fn filter(&mut self, state: &SimState, candidates: &[AgentId]) -> Result<Vec<AgentId>> {
        let agents = state.agents();
        Ok(candidates
            .iter()
            .copied()
            .filter(|&id| self.zone.contains(agents[id as usize].position))
            .collect())
    }
}

/// Keeps candidates that belong to the tracked group `G`.
#[derive(Debug, Clone, Copy, Default)]
pub struct GroupFilter;

impl Filter for GroupFilter {
    fn filter(&mut self, state: &SimState, candidates: &[AgentId]) -> Result<Vec<AgentId>> {
        let group = state
            .group()
            .ok_or_else(|| crate::Error::Config("group filter requires group tracking".into()))?;
        Ok(candidates
            .iter()
            .copied()
            .filter(|&id| group.contains(id))
            .collect())
    }
}

/// Keeps a simple random sample of at most `n` candidates.
#[derive(Debug, Clone)]
pub struct SampleFilter {
    pub n: usize,
    pub rng: StreamRng,
}

impl Filter for SampleFilter {
    fn filter(&mut self, _state: &SimState, candidates: &[AgentId]) -> Result<Vec<AgentId>> {
        let n = self.n.min(candidates.len());
        sample_of(candidates, n, &mut self.rng)
    }
}

fn sample_of<R: Rng + ?Sized>(
    candidates: &[AgentId],
    n: usize,
    rng: &mut R,
) -> Result<Vec<AgentId>> {
    Ok(srswor(candidates.len(), n, rng)?
        .into_iter()
        .map(|i| candidates[i])
        .collect())
}
