//! Survey sampling: Horvitz-Thompson sample sizing, expansion estimation
//! and simple random sampling without replacement.
//!
//! For a homogeneous population where each agent is in the zone with the
//! same probability `p = E(Z)/N`, the sample size giving an absolute error
//! of at most `d` on the rate satisfies
//!
//! ```text
//! 1/n = d^2 / (4 S^2) + 1/N,    S^2 = (1 - p) p
//! ```
//!
//! The raw `n` is rounded up and clamped into `[1, N]`.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Variance proxy `S^2 = (1 - p) p` of the in-zone indicator.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct VarianceProxy(f64);

impl VarianceProxy {
    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_rate(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "rate {p} is outside [0, 1]"
        )))
    }
}

pub fn variance_proxy(p: f64) -> Result<VarianceProxy> {
    check_rate(p)?;
    Ok(VarianceProxy((1.0 - p) * p))
}

/// Horvitz-Thompson sample size for population `population`, expected rate
/// `p` and maximal absolute error `d` on the rate.
///
/// A zero-variance population (`p` of 0 or 1) needs a single probe.
pub fn sample_size(population: usize, p: f64, d: f64) -> Result<usize> {
    if population == 0 {
        return Err(Error::InvalidArgument("population must be positive".into()));
    }
    if !d.is_finite() || d <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "maximal error d must be positive and finite, got {d}"
        )));
    }
    let s2 = variance_proxy(p)?.value();
    if s2 == 0.0 {
        return Ok(1);
    }
    let inverse = d * d / (4.0 * s2) + 1.0 / population as f64;
    let raw = 1.0 / inverse;
    Ok((raw.ceil() as usize).clamp(1, population))
}

/// Expansion estimate of the zone total from `hits` in-zone agents in a
/// sample of `n` out of `population`.
pub fn estimate_total(hits: usize, n: usize, population: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "sample size must be positive".into(),
        ));
    }
    if hits > n {
        return Err(Error::InvalidArgument(format!(
            "hits ({hits}) exceed sample size ({n})"
        )));
    }
    if n > population {
        return Err(Error::InvalidArgument(format!(
            "sample size ({n}) exceeds population ({population})"
        )));
    }
    Ok(population as f64 * hits as f64 / n as f64)
}

/// Draw `n` distinct indices from `0..population`, every size-`n` subset
/// being equally likely.
///
/// Partial Fisher-Yates over a virtual identity permutation; displaced
/// entries live in a sparse map, so the cost is O(n) regardless of the
/// population size.
pub fn srswor<R: Rng + ?Sized>(population: usize, n: usize, rng: &mut R) -> Result<Vec<usize>> {
    if n > population {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {n} distinct ids from a population of {population}"
        )));
    }
    let mut displaced: HashMap<usize, usize> = HashMap::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let j = rng.random_range(i..population);
        let at_j = displaced.get(&j).copied().unwrap_or(j);
        let at_i = displaced.get(&i).copied().unwrap_or(i);
        displaced.insert(j, at_i);
        out.push(at_j);
    }
    Ok(out)
}

/// Reusable SRSWOR drawer for the observation hot path.
///
/// Keeps a permutation of the population between draws. A partial
/// Fisher-Yates pass over any permutation yields a uniform subset, so the
/// array never needs resetting and each draw costs `n` swaps.
#[derive(Debug, Clone)]
pub struct IndexSampler {
    perm: Vec<u32>,
}

impl IndexSampler {
    pub fn new(population: u32) -> Self {
        Self {
            perm: (0..population).collect(),
        }
    }

    pub fn population(&self) -> usize {
        self.perm.len()
    }

    pub fn draw<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) -> Result<&[u32]> {
        let len = self.perm.len();
        if n > len {
            return Err(Error::InvalidArgument(format!(
                "cannot draw {n} distinct ids from a population of {len}"
            )));
        }
        for i in 0..n {
            let j = rng.random_range(i as u32..len as u32) as usize;
            self.perm.swap(i, j);
        }
        Ok(&self.perm[..n])
    }
}

/// Sampling design of the survey observer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurveyPlan {
    n: usize,
    d: f64,
    p_expected: f64,
    population: usize,
}

impl SurveyPlan {
    /// Plan sized with [`sample_size`].
    pub fn new(population: usize, p_expected: f64, d: f64) -> Result<Self> {
        let n = sample_size(population, p_expected, d)?;
        Ok(Self {
            n,
            d,
            p_expected,
            population,
        })
    }

    /// Plan with an explicit sample size, e.g. a census (`n = N`).
    pub fn with_sample_size(population: usize, n: usize, p_expected: f64, d: f64) -> Result<Self> {
        if n == 0 || n > population {
            return Err(Error::InvalidArgument(format!(
                "sample size {n} outside [1, {population}]"
            )));
        }
        check_rate(p_expected)?;
        Ok(Self {
            n,
            d,
            p_expected,
            population,
        })
    }

    pub fn sample_size(&self) -> usize {
        self.n
    }

    pub fn max_error(&self) -> f64 {
        self.d
    }

    pub fn expected_rate(&self) -> f64 {
        self.p_expected
    }

    pub fn population(&self) -> usize {
        self.population
    }

    /// Re-size the plan for a new expected rate, keeping `d` and `N`.
    pub fn resized(&self, p_expected: f64) -> Result<Self> {
        Self::new(self.population, p_expected, self.d)
    }
}
