//! Fastest-method map over the `(N, p)` lattice.

use std::collections::HashMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::surface::SurfaceData;
use super::timing::TimingRecord;
use crate::observers::ObservationMethod;
use crate::{Error, Result};

/// Where and when a calibration was measured.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub created_unix_s: u64,
    pub host: String,
    pub os: String,
    pub arch: String,
    pub logical_cpus: usize,
    #[serde(default)]
    pub base_seed: Option<u64>,
    #[serde(default)]
    pub steps: Option<u64>,
    #[serde(default)]
    pub replicates: Option<usize>,
    #[serde(default)]
    pub survey_d: Option<f64>,
}

impl Provenance {
    pub fn capture() -> Self {
        let host = std::env::var("HOSTNAME")
            .ok()
            .or_else(|| std::fs::read_to_string("/etc/hostname").ok())
            .map(|h| h.trim().to_string())
            .filter(|h| !h.is_empty())
            .unwrap_or_else(|| "unknown".into());
        Self {
            created_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            host,
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            logical_cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationMap {
    pub n_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    /// `labels[row][col]` labels `(n_axis[col], p_axis[row])`.
    pub labels: Vec<Vec<ObservationMethod>>,
    pub provenance: Provenance,
}

impl CalibrationMap {
    pub fn is_empty(&self) -> bool {
        self.n_axis.is_empty() || self.p_axis.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyMap);
        }
        if self.labels.len() != self.p_axis.len()
            || self.labels.iter().any(|r| r.len() != self.n_axis.len())
        {
            return Err(Error::AxisMismatch(
                "label matrix does not match the map axes".into(),
            ));
        }
        Ok(())
    }

    /// Distinct labels present in the map.
    pub fn distinct_labels(&self) -> Vec<ObservationMethod> {
        let mut v: Vec<_> = self.labels.iter().flatten().copied().collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn count(&self, method: ObservationMethod) -> usize {
        self.labels
            .iter()
            .flatten()
            .filter(|&&m| m == method)
            .count()
    }
}

/// Tie-break rank: lower wins. Exact methods come first so that exactness
/// is never traded for a tie.
fn tie_rank(m: ObservationMethod) -> u8 {
    match m {
        ObservationMethod::BruteForce => 0,
        ObservationMethod::SelfObservation => 1,
        ObservationMethod::Indirect => 2,
        ObservationMethod::Survey => 3,
        ObservationMethod::Adaptive => 4,
    }
}

fn distinct_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Label every `(N, p)` cell with the method of smallest median time.
///
/// Baseline (unobserved) records are ignored. Every combination of the
/// distinct `N`, `p` and methods present must be measured exactly once.
pub fn fastest_method_map(records: &[TimingRecord]) -> Result<CalibrationMap> {
    let observed: Vec<&TimingRecord> = records.iter().filter(|r| r.key.method.is_some()).collect();
    if observed.is_empty() {
        return Err(Error::EmptyMap);
    }
    let n_axis = distinct_sorted(observed.iter().map(|r| r.key.agents as f64).collect());
    let p_axis = distinct_sorted(observed.iter().map(|r| r.key.rate).collect());
    let mut methods: Vec<ObservationMethod> =
        observed.iter().filter_map(|r| r.key.method).collect();
    methods.sort_by_key(|&m| tie_rank(m));
    methods.dedup();

    let mut medians: HashMap<(u32, u64, ObservationMethod), f64> = HashMap::new();
    for r in &observed {
        let key = (r.key.agents, r.key.rate.to_bits(), r.key.method.unwrap());
        if medians.insert(key, r.median()).is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate measurement for N={}, p={}, method={}",
                key.0, r.key.rate, key.2
            )));
        }
    }

    let mut labels = Vec::with_capacity(p_axis.len());
    for &p in &p_axis {
        let mut row = Vec::with_capacity(n_axis.len());
        for &n in &n_axis {
            let mut best: Option<(f64, ObservationMethod)> = None;
            for &m in &methods {
                let t = *medians.get(&(n as u32, p.to_bits(), m)).ok_or_else(|| {
                    Error::MissingCombination {
                        agents: n as u32,
                        rate: p,
                        method: m.to_string(),
                    }
                })?;
                // methods are visited in tie-break order, so strict `<` keeps
                // the preferred method on ties
                if best.is_none_or(|(bt, _)| t < bt) {
                    best = Some((t, m));
                }
            }
            row.push(best.expect("at least one method").1);
        }
        labels.push(row);
    }

    let first = observed[0];
    let provenance = Provenance {
        base_seed: Some(first.key.seed),
        steps: Some(first.key.steps),
        replicates: Some(first.elapsed.len()),
        survey_d: observed.iter().find_map(|r| r.key.survey_d),
        ..Provenance::capture()
    };
    Ok(CalibrationMap {
        n_axis,
        p_axis,
        labels,
        provenance,
    })
}

/// Median run time of `method` on the lattice of its records.
pub fn median_surface(
    records: &[TimingRecord],
    method: Option<ObservationMethod>,
) -> Result<SurfaceData> {
    let own: Vec<&TimingRecord> = records.iter().filter(|r| r.key.method == method).collect();
    let n_axis = distinct_sorted(own.iter().map(|r| r.key.agents as f64).collect());
    let p_axis = distinct_sorted(own.iter().map(|r| r.key.rate).collect());
    let mut values = vec![vec![f64::NAN; n_axis.len()]; p_axis.len()];
    for r in &own {
        let c = n_axis.partition_point(|&a| a < r.key.agents as f64);
        let row = p_axis.partition_point(|&a| a < r.key.rate);
        values[row][c] = r.median();
    }
    for (row, &p) in p_axis.iter().enumerate() {
        for (c, &n) in n_axis.iter().enumerate() {
            if values[row][c].is_nan() {
                return Err(Error::MissingCombination {
                    agents: n as u32,
                    rate: p,
                    method: method.map_or("none", |m| m.as_str()).into(),
                });
            }
        }
    }
    if own.is_empty() {
        return Err(Error::EmptyMap);
    }
    SurfaceData::new(n_axis, p_axis, values)
}
