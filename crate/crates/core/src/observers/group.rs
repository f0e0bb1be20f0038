//! Self-observation: agents evaluate a rule set on themselves after every
//! move and join or leave the group `G`; the observer only probes `G`.

use super::{Observation, ObservationMethod, Observer};
use crate::sim::{AgentId, AgentState, SimState, Zone};
use crate::{Error, Result};

const NOT_MEMBER: u32 = u32::MAX;

/// Agent set with O(1) join, leave and membership test.
///
/// Members are kept in a dense list so that `obs'` can enumerate them;
/// `slot[id]` is the member's index in that list. During a run each agent
/// also carries its own membership flag ([`AgentState::in_group`]), which
/// is what the rules read after every move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    members: Vec<AgentId>,
    slot: Vec<u32>,
}

impl Group {
    pub fn new(population: u32) -> Self {
        Self {
            members: Vec::new(),
            slot: vec![NOT_MEMBER; population as usize],
        }
    }

    #[inline]
    pub fn contains(&self, id: AgentId) -> bool {
        self.slot[id as usize] != NOT_MEMBER
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Current members, in no particular order.
    pub fn members(&self) -> &[AgentId] {
        &self.members
    }

    /// Returns false if `id` was already a member.
    pub fn join(&mut self, id: AgentId) -> bool {
        if self.contains(id) {
            return false;
        }
        self.slot[id as usize] = self.members.len() as u32;
        self.members.push(id);
        true
    }

    /// Returns false if `id` was not a member.
    pub fn leave(&mut self, id: AgentId) -> bool {
        let at = self.slot[id as usize];
        if at == NOT_MEMBER {
            return false;
        }
        self.members.swap_remove(at as usize);
        if let Some(&moved) = self.members.get(at as usize) {
            self.slot[moved as usize] = at;
        }
        self.slot[id as usize] = NOT_MEMBER;
        true
    }

    /// Join if `member`, leave otherwise.
    pub fn set(&mut self, id: AgentId, member: bool) -> bool {
        if member {
            self.join(id)
        } else {
            self.leave(id)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleOutcome {
    Join,
    Leave,
    Stay,
}

/// Rule set `R` of the case study:
///
/// * in the zone and not in `G`: join `G`;
/// * out of the zone and in `G`: leave `G`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MembershipRules;

impl MembershipRules {
    /// Whether either rule fires. Exactly one can, and only when zone
    /// status and membership disagree.
    #[inline]
    pub fn fires(&self, in_zone: bool, member: bool) -> bool {
        in_zone != member
    }

    pub fn join_fires(&self, in_zone: bool, member: bool) -> bool {
        in_zone && !member
    }

    pub fn leave_fires(&self, in_zone: bool, member: bool) -> bool {
        !in_zone && member
    }

    pub fn evaluate(&self, in_zone: bool, member: bool) -> RuleOutcome {
        if self.join_fires(in_zone, member) {
            RuleOutcome::Join
        } else if self.leave_fires(in_zone, member) {
            RuleOutcome::Leave
        } else {
            RuleOutcome::Stay
        }
    }

    pub fn apply(&self, group: &mut Group, id: AgentId, in_zone: bool) -> RuleOutcome {
        let outcome = self.evaluate(in_zone, group.contains(id));
        if outcome != RuleOutcome::Stay {
            group.set(id, in_zone);
        }
        outcome
    }
}

/// Evaluate the rules for one agent against `zone`.
pub fn apply_membership_rules(agent: &AgentState, zone: &Zone, group: &mut Group) -> RuleOutcome {
    MembershipRules.apply(group, agent.id, zone.contains(agent.position))
}

/// The rules as run by an agent on itself: its own flag is updated and the
/// outcome returned; the group list is brought in line by the caller.
#[inline]
pub(crate) fn self_evaluate(agent: &mut AgentState, in_zone: bool) -> bool {
    if MembershipRules.fires(in_zone, agent.in_group) {
        agent.in_group = in_zone;
        true
    } else {
        false
    }
}

/// `obs'(G)`: probe each member of `G`. Members are in the zone by
/// construction, so the observation is the number of members probed.
pub fn observe_self(state: &SimState) -> Result<Observation> {
    let group = state
        .group()
        .ok_or_else(|| Error::Config("self-observation requires group tracking".into()))?;
    let agents = state.agents();
    let mut probed = 0usize;
    for &id in group.members() {
        std::hint::black_box(agents[id as usize].position);
        probed += 1;
    }
    Ok(Observation::exact(
        state.step_index(),
        probed as u64,
        ObservationMethod::SelfObservation,
    ))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SelfObserver;

impl Observer for SelfObserver {
    fn method(&self) -> ObservationMethod {
        ObservationMethod::SelfObservation
    }

    fn requires_group(&self) -> bool {
        true
    }

    fn observe(&mut self, state: &SimState) -> Result<Observation> {
        observe_self(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{Cell, GridSpec};
    use std::sync::Arc;

    fn agent(id: u32, x: u32, y: u32) -> AgentState {
        AgentState::new(id, Cell::new(x, y))
    }

    #[test]
    fn join_and_leave_rules() {
        let grid = GridSpec::default();
        let zone = Zone::rect(grid, 0, 0, 10, 10).unwrap();
        let mut g = Group::new(4);

        assert_eq!(
            apply_membership_rules(&agent(1, 3, 3), &zone, &mut g),
            RuleOutcome::Join
        );
        assert!(g.contains(1));
        assert_eq!(
            apply_membership_rules(&agent(1, 3, 4), &zone, &mut g),
            RuleOutcome::Stay
        );
        assert_eq!(g.len(), 1);
        assert_eq!(
            apply_membership_rules(&agent(1, 50, 50), &zone, &mut g),
            RuleOutcome::Leave
        );
        assert!(!g.contains(1));
        assert_eq!(
            apply_membership_rules(&agent(2, 50, 50), &zone, &mut g),
            RuleOutcome::Stay
        );
        assert!(g.is_empty());
    }

    #[test]
    fn at_most_one_rule_fires() {
        let r = MembershipRules;
        for in_zone in [false, true] {
            for member in [false, true] {
                let (j, l) = (
                    r.join_fires(in_zone, member),
                    r.leave_fires(in_zone, member),
                );
                assert!(!(j && l));
                assert_eq!(r.fires(in_zone, member), j || l);
            }
        }
    }

    #[test]
    fn agent_side_evaluation() {
        let mut a = agent(0, 1, 1);
        assert!(self_evaluate(&mut a, true) && a.in_group);
        assert!(!self_evaluate(&mut a, true));
        assert!(self_evaluate(&mut a, false) && !a.in_group);
        assert!(!self_evaluate(&mut a, false));
    }

    #[test]
    fn group_swap_remove_keeps_slots() {
        let mut g = Group::new(6);
        for id in [0, 2, 4, 5] {
            assert!(g.join(id));
        }
        assert!(!g.join(2));
        assert!(g.leave(0));
        assert!(!g.leave(0));
        assert!(g.leave(5));
        let mut m = g.members().to_vec();
        m.sort_unstable();
        assert_eq!(m, vec![2, 4]);
        assert!(g.contains(2) && g.contains(4) && !g.contains(5));
        assert!(g.leave(4) && g.leave(2));
        assert!(g.is_empty());
    }

    #[test]
    fn observe_self_edge_zones() {
        let grid = GridSpec::new(20, 20).unwrap();
        let positions: Vec<Cell> = (0..30).map(|i| Cell::new(i % 20, i / 20)).collect();
        let full = SimState::from_positions(grid, Arc::new(Zone::full(grid)), &positions, true, 1)
            .unwrap();
        assert_eq!(observe_self(&full).unwrap().value, 30.0);
        let empty =
            SimState::from_positions(grid, Arc::new(Zone::empty(grid)), &positions, true, 1)
                .unwrap();
        assert_eq!(observe_self(&empty).unwrap().value, 0.0);
        let untracked =
            SimState::from_positions(grid, Arc::new(Zone::empty(grid)), &positions, false, 1)
                .unwrap();
        assert!(observe_self(&untracked).is_err());
    }
}
