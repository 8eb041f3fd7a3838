//! Fuzzy C-means on scalar intensities.
//!
//! Minimises `J = sum_i sum_j u_ij^k (x_i - v_j)^2` by alternating the
//! closed-form membership and center updates. Iteration stops once the
//! largest membership change between two sweeps is at most `epsilon`.

use super::{check_data, quantile_centers};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FcmParams {
    pub num_clusters: usize,
    /// Weighting exponent `k > 1`.
    pub fuzzifier: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Reserved for randomised initialisation; the quantile start ignores it.
    pub seed: u64,
}

impl Default for FcmParams {
    fn default() -> Self {
        Self {
            num_clusters: 3,
            fuzzifier: 2.0,
            epsilon: 1e-3,
            max_iterations: 100,
            seed: 0,
        }
    }
}

impl FcmParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_clusters < 2 {
            return Err(Error::InvalidParams(format!(
                "fcm needs at least 2 clusters, got {}",
                self.num_clusters
            )));
        }
        if !(self.fuzzifier > 1.0 && self.fuzzifier.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "fuzzifier must exceed 1, got {}",
                self.fuzzifier
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParams(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParams(
                "max_iterations must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Row-major N x M matrix of memberships; each row sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl MembershipMatrix {
    const ROW_SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if cols == 0 || rows.checked_mul(cols) != Some(values.len()) {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} membership matrix",
                values.len()
            )));
        }
        for (i, row) in values.chunks_exact(cols).enumerate() {
            if row.iter().any(|u| !(0.0..=1.0).contains(u)) {
                return Err(Error::InvalidParams(format!(
                    "membership row {i} has an entry outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > Self::ROW_SUM_TOLERANCE {
                return Err(Error::InvalidParams(format!(
                    "membership row {i} sums to {sum}"
                )));
            }
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged membership rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows_count(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.cols)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &MembershipMatrix) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub centers: Vec<f64>,
    pub iterations_run: usize,
    /// Largest membership change of the final sweep.
    pub final_delta: f64,
    /// Objective of the returned memberships and centers.
    pub objective: f64,
    /// Objective after initialisation and after every sweep.
    pub objective_trace: Vec<f64>,
}

/// Neumaier-compensated sum.
fn stable_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[inline]
fn weight(u: f64, fuzzifier: f64) -> f64 {
    if fuzzifier == 2.0 {
        u * u
    } else {
        u.powf(fuzzifier)
    }
}

fn objective_unchecked(data: &[f64], u: &[f64], centers: &[f64], fuzzifier: f64) -> f64 {
    let m = centers.len();
    stable_sum(data.iter().enumerate().flat_map(|(i, &x)| {
        let row = &u[i * m..(i + 1) * m];
        row.iter().zip(centers).map(move |(&uij, &v)| {
            let d = x - v;
            weight(uij, fuzzifier) * d * d
        })
    }))
}

/// Evaluates `sum_i sum_j u_ij^k (x_i - v_j)^2`.
pub fn fcm_objective(
    data: &[f64],
    memberships: &MembershipMatrix,
    centers: &[f64],
    fuzzifier: f64,
) -> Result<f64> {
    if memberships.rows != data.len() || memberships.cols != centers.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} samples and {} centers against a {}x{} membership matrix",
            data.len(),
            centers.len(),
            memberships.rows,
            memberships.cols
        )));
    }
    if fuzzifier.partial_cmp(&1.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidParams(format!(
            "fuzzifier must exceed 1, got {fuzzifier}"
        )));
    }
    Ok(objective_unchecked(
        data,
        &memberships.values,
        centers,
        fuzzifier,
    ))
}

/// Membership update. `u_ij = 1 / sum_l (d_ij / d_il)^(2/(k-1))`, written as
/// normalised weights relative to the nearest center so no term overflows.
/// A sample sitting exactly on a center belongs wholly to the first such
/// center.
fn update_memberships(data: &[f64], centers: &[f64], fuzzifier: f64, out: &mut [f64]) {
    let m = centers.len();
    let exponent = 1.0 / (fuzzifier - 1.0);
    let mut dist = vec![0.0; m];
    for (i, &x) in data.iter().enumerate() {
        let row = &mut out[i * m..(i + 1) * m];
        for (d, &v) in dist.iter_mut().zip(centers) {
            *d = (x - v) * (x - v);
        }
        if let Some(hit) = dist.iter().position(|&d| d == 0.0) {
            row.fill(0.0);
            row[hit] = 1.0;
            continue;
        }
        let nearest = dist.iter().copied().fold(f64::INFINITY, f64::min);
        let mut total = 0.0;
        for (u, &d) in row.iter_mut().zip(&dist) {
            let ratio = nearest / d;
            *u = if exponent == 1.0 {
                ratio
            } else {
                ratio.powf(exponent)
            };
            total += *u;
        }
        for u in row.iter_mut() {
            *u /= total;
        }
    }
}

/// Center update `v_j = sum_i u_ij^k x_i / sum_i u_ij^k`. A cluster whose
/// weights all vanish keeps its previous center.
fn update_centers(data: &[f64], u: &[f64], fuzzifier: f64, centers: &mut [f64]) {
    let m = centers.len();
    let mut num = vec![0.0; m];
    let mut den = vec![0.0; m];
    for (i, &x) in data.iter().enumerate() {
        for j in 0..m {
            let w = weight(u[i * m + j], fuzzifier);
            num[j] += w * x;
            den[j] += w;
        }
    }
    for j in 0..m {
        if den[j] > 0.0 {
            centers[j] = num[j] / den[j];
        }
    }
}

/// Fits fuzzy C-means starting from the (j + 0.5) / M intensity quantiles.
pub fn fcm_fit(data: &[f64], params: &FcmParams) -> Result<(MembershipMatrix, ClusterModel)> {
    params.validate()?;
    check_data(data, params.num_clusters)?;
    let init = quantile_centers(data, params.num_clusters);
    fit_from(data, params, init)
}

/// Fits fuzzy C-means from caller-supplied starting centers.
pub fn fcm_fit_with_centers(
    data: &[f64],
    params: &FcmParams,
    initial_centers: &[f64],
) -> Result<(MembershipMatrix, ClusterModel)> {
    params.validate()?;
    check_data(data, params.num_clusters)?;
    if initial_centers.len() != params.num_clusters {
        return Err(Error::DimensionMismatch(format!(
            "{} initial centers for {} clusters",
            initial_centers.len(),
            params.num_clusters
        )));
    }
    if initial_centers.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParams(
            "initial centers must be finite".into(),
        ));
    }
    fit_from(data, params, initial_centers.to_vec())
}

fn fit_from(
    data: &[f64],
    params: &FcmParams,
    mut centers: Vec<f64>,
) -> Result<(MembershipMatrix, ClusterModel)> {
    let m = params.num_clusters;
    let k = params.fuzzifier;
    let mut u = vec![0.0; data.len() * m];
    let mut next = vec![0.0; data.len() * m];
    update_memberships(data, &centers, k, &mut u);

    let mut trace = vec![objective_unchecked(data, &u, &centers, k)];
    let mut iterations = 0;
    let mut delta = f64::INFINITY;
    while iterations < params.max_iterations {
        update_centers(data, &u, k, &mut centers);
        update_memberships(data, &centers, k, &mut next);
        delta = u
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut u, &mut next);
        iterations += 1;
        trace.push(objective_unchecked(data, &u, &centers, k));
        if delta <= params.epsilon {
            break;
        }
    }

    let objective = *trace.last().expect("trace starts non-empty");
    let memberships = MembershipMatrix {
        rows: data.len(),
        cols: m,
        values: u,
    };
    Ok((
        memberships,
        ClusterModel {
            centers,
            iterations_run: iterations,
            final_delta: delta,
            objective,
            objective_trace: trace,
        },
    ))
}
