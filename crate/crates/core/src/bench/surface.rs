//! Surfaces over the `(N, p)` plane: rows follow the rate axis, columns
//! the population axis.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceData {
    pub n_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    /// `values[row][col]` is the value at `(n_axis[col], p_axis[row])`.
    pub values: Vec<Vec<f64>>,
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::AxisMismatch(format!("{name} axis is empty")));
    }
    if axis.iter().any(|v| !v.is_finite()) {
        return Err(Error::AxisMismatch(format!(
            "{name} axis has non-finite entries"
        )));
    }
    if axis.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::AxisMismatch(format!(
            "{name} axis is not strictly increasing"
        )));
    }
    Ok(())
}

/// Locate `q` on `axis`: returns `(lower index, fraction)` with the query
/// clamped to the axis range.
fn locate(axis: &[f64], q: f64) -> (usize, f64) {
    if axis.len() == 1 || q <= axis[0] {
        return (0, 0.0);
    }
    let last = axis.len() - 1;
    if q >= axis[last] {
        return (last - 1, 1.0);
    }
    let i = axis.partition_point(|&a| a <= q) - 1;
    let t = (q - axis[i]) / (axis[i + 1] - axis[i]);
    (i, t)
}

impl SurfaceData {
    pub fn new(n_axis: Vec<f64>, p_axis: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        check_axis("N", &n_axis)?;
        check_axis("p", &p_axis)?;
        if values.len() != p_axis.len() || values.iter().any(|r| r.len() != n_axis.len()) {
            return Err(Error::AxisMismatch(format!(
                "value matrix does not match {} x {} axes",
                p_axis.len(),
                n_axis.len()
            )));
        }
        Ok(Self {
            n_axis,
            p_axis,
            values,
        })
    }

    pub fn filled(n_axis: Vec<f64>, p_axis: Vec<f64>, value: f64) -> Result<Self> {
        let values = vec![vec![value; n_axis.len()]; p_axis.len()];
        Self::new(n_axis, p_axis, values)
    }

    pub fn same_axes(&self, other: &SurfaceData) -> bool {
        self.n_axis == other.n_axis && self.p_axis == other.p_axis
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.p_axis.iter().enumerate().flat_map(move |(r, &p)| {
            self.n_axis
                .iter()
                .enumerate()
                .map(move |(c, &n)| (n, p, self.values[r][c]))
        })
    }

    /// Bilinear interpolation, clamped to the axis ranges. A single-entry
    /// axis is treated as constant along that direction.
    pub fn value_at(&self, n: f64, p: f64) -> f64 {
        let (c, tx) = locate(&self.n_axis, n);
        let (r, ty) = locate(&self.p_axis, p);
        let c1 = (c + 1).min(self.n_axis.len() - 1);
        let r1 = (r + 1).min(self.p_axis.len() - 1);
        let v00 = self.values[r][c];
        let v10 = self.values[r][c1];
        let v01 = self.values[r1][c];
        let v11 = self.values[r1][c1];
        (1.0 - tx) * (1.0 - ty) * v00
            + tx * (1.0 - ty) * v10
            + (1.0 - tx) * ty * v01
            + tx * ty * v11
    }
}

/// Cellwise `a - b`.
pub fn diff_surface(a: &SurfaceData, b: &SurfaceData) -> Result<SurfaceData> {
    if !a.same_axes(b) {
        return Err(Error::AxisMismatch(
            "surfaces are sampled on different axes".into(),
        ));
    }
    let values = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
        .collect();
    SurfaceData::new(a.n_axis.clone(), a.p_axis.clone(), values)
}

/// One measured point of a response surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub agents: f64,
    pub rate: f64,
    pub value: f64,
}

fn distinct_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Fit scattered lattice measurements onto the regular grid
/// `n_axis x p_axis` by bilinear interpolation of the sample lattice.
///
/// Samples must cover every combination of their distinct `N` and `p`
/// values; repeated points are averaged. Queries outside the lattice are
/// clamped to its border.
pub fn response_surface(
    samples: &[SurfaceSample],
    n_axis: &[f64],
    p_axis: &[f64],
) -> Result<SurfaceData> {
    if samples.len() < 4 {
        return Err(Error::TooFewPoints(samples.len()));
    }
    let lattice_n = distinct_sorted(samples.iter().map(|s| s.agents).collect());
    let lattice_p = distinct_sorted(samples.iter().map(|s| s.rate).collect());
    let mut sums = vec![vec![(0.0f64, 0usize); lattice_n.len()]; lattice_p.len()];
    for s in samples {
        let c = lattice_n.partition_point(|&a| a < s.agents);
        let r = lattice_p.partition_point(|&a| a < s.rate);
        let slot = &mut sums[r][c];
        slot.0 += s.value;
        slot.1 += 1;
    }
    let mut values = Vec::with_capacity(lattice_p.len());
    for (r, row) in sums.iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (c, &(sum, count)) in row.iter().enumerate() {
            if count == 0 {
                return Err(Error::InvalidArgument(format!(
                    "sample lattice has no point at N={}, p={}",
                    lattice_n[c], lattice_p[r]
                )));
            }
            out.push(sum / count as f64);
        }
        values.push(out);
    }
    let lattice = SurfaceData::new(lattice_n, lattice_p, values)?;
    check_axis("N", n_axis)?;
    check_axis("p", p_axis)?;
    let fitted = p_axis
        .iter()
        .map(|&p| n_axis.iter().map(|&n| lattice.value_at(n, p)).collect())
        .collect();
    SurfaceData::new(n_axis.to_vec(), p_axis.to_vec(), fitted)
}
