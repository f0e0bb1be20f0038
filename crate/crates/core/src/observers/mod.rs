//! Observation strategies.
//!
//! `obs` probes a fixed agent set and aggregates; filtrated methods first
//! reduce the set (`filter`) and apply a cheaper `obs'` to the subset.
//! Every strategy here computes `Z`, the zone occupancy, and the exact ones
//! must agree with [`crate::ground_truth_count`] at every step.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::sim::SimState;
use crate::{Error, Result};

mod direct;
pub mod filter;
pub mod group;
mod indirect;
pub mod sink;
mod survey;

pub use direct::{observe_brute_force, BruteForceObserver};
pub use group::{
    apply_membership_rules, observe_self, Group, MembershipRules, RuleOutcome, SelfObserver,
};
pub use indirect::{observe_indirect, IndirectObserver};
pub use sink::ObservationSink;
pub use survey::{observe_survey, SurveyObserver};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservationMethod {
    BruteForce,
    Indirect,
    SelfObservation,
    Survey,
    Adaptive,
}

impl ObservationMethod {
    pub const ALL: [ObservationMethod; 5] = [
        ObservationMethod::BruteForce,
        ObservationMethod::Indirect,
        ObservationMethod::SelfObservation,
        ObservationMethod::Survey,
        ObservationMethod::Adaptive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ObservationMethod::BruteForce => "brute-force",
            ObservationMethod::Indirect => "indirect",
            ObservationMethod::SelfObservation => "self-observation",
            ObservationMethod::Survey => "survey",
            ObservationMethod::Adaptive => "adaptive",
        }
    }

    /// Whether the method returns the exact count.
    pub fn is_exact(self) -> bool {
        !matches!(
            self,
            ObservationMethod::Survey | ObservationMethod::Adaptive
        )
    }
}

impl fmt::Display for ObservationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObservationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ObservationMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown observation method `{s}`")))
    }
}

/// One observed value of `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub step: u64,
    pub value: f64,
    pub method: ObservationMethod,
    pub exact: bool,
    pub cost_hint: Option<Duration>,
    /// Method that actually produced the value, for adaptive observations.
    pub delegate: Option<ObservationMethod>,
}

impl Observation {
    pub(crate) fn exact(step: u64, count: u64, method: ObservationMethod) -> Self {
        Self {
            step,
            value: count as f64,
            method,
            exact: true,
            cost_hint: None,
            delegate: None,
        }
    }

    pub(crate) fn estimate(step: u64, value: f64, method: ObservationMethod) -> Self {
        Self {
            step,
            value,
            method,
            exact: false,
            cost_hint: None,
            delegate: None,
        }
    }
}

/// A stateful observer attached to one run.
pub trait Observer {
    fn method(&self) -> ObservationMethod;

    /// Whether the run must maintain the self-observation group `G`.
    fn requires_group(&self) -> bool {
        false
    }

    fn observe(&mut self, state: &SimState) -> Result<Observation>;
}

impl<O: Observer + ?Sized> Observer for Box<O> {
    fn method(&self) -> ObservationMethod {
        (**self).method()
    }

    fn requires_group(&self) -> bool {
        (**self).requires_group()
    }

    fn observe(&mut self, state: &SimState) -> Result<Observation> {
        (**self).observe(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_tags_round_trip() {
        for m in ObservationMethod::ALL {
            assert_eq!(m.as_str().parse::<ObservationMethod>().unwrap(), m);
            assert_eq!(
                serde_json::to_string(&m).unwrap(),
                format!("\"{}\"", m.as_str())
            );
        }
        assert!("naive".parse::<ObservationMethod>().is_err());
    }
}
