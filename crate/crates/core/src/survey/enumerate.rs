//! Exhaustive enumeration of small design spaces.
//!
//! Every outcome of an equal-probability design is visited once, so the mean
//! and variance of an estimator over the design are exact up to rounding.
//! These are the reference values for the analytic variance formulas.

use serde::Serialize;

use super::FinitePopulation;
use crate::error::{Error, Result};
use crate::stats::choose;

/// Refuse design spaces larger than this many outcomes.
pub const MAX_OUTCOMES: f64 = 5.0e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactMoments {
    pub mean: f64,
    /// Variance over the design (divisor = number of outcomes).
    pub variance: f64,
    pub outcomes: usize,
}

/// Calls `visit` with every size-`k` subset of `0..n` in lexicographic order.
pub fn for_each_subset<F: FnMut(&[usize])>(n: usize, k: usize, mut visit: F) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let Some(pos) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn moments_of(values: &[f64]) -> ExactMoments {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
    ExactMoments {
        mean,
        variance,
        outcomes: values.len(),
    }
}

fn guard(outcomes: f64) -> Result<()> {
    if outcomes > MAX_OUTCOMES {
        Err(Error::InvalidParameter(format!(
            "design space has {outcomes} outcomes; enumeration limit is {MAX_OUTCOMES}"
        )))
    } else {
        Ok(())
    }
}

/// Moments of an arbitrary estimator over all size-`n` simple random samples.
pub fn srs_exact_with<F>(values: &[f64], n: usize, mut estimator: F) -> Result<ExactMoments>
where
    F: FnMut(&[usize]) -> f64,
{
    if n == 0 || n > values.len() {
        return Err(Error::SampleExceedsPopulation {
            requested: n,
            available: values.len(),
        });
    }
    guard(choose(values.len() as u64, n as u64))?;
    let mut out = Vec::new();
    for_each_subset(values.len(), n, |s| out.push(estimator(s)));
    Ok(moments_of(&out))
}

/// Moments of the sample mean over all size-`n` simple random samples.
pub fn srs_exact(values: &[f64], n: usize) -> Result<ExactMoments> {
    srs_exact_with(values, n, |s| s.iter().map(|&i| values[i]).sum::<f64>() / n as f64)
}

/// Moments of the stratified mean over the product of per-stratum designs.
pub fn stratified_exact(pop: &FinitePopulation, allocation: &[usize]) -> Result<ExactMoments> {
    let groups = pop.strata()?;
    if groups.len() != allocation.len() {
        return Err(Error::LengthMismatch {
            left: groups.len(),
            right: allocation.len(),
        });
    }
    let outcomes: f64 = groups
        .iter()
        .zip(allocation)
        .map(|(g, &n_k)| choose(g.len() as u64, n_k as u64))
        .product();
    guard(outcomes)?;
    let n_total = pop.len() as f64;
    // per-stratum list of weighted sample means
    let mut per_stratum: Vec<Vec<f64>> = Vec::new();
    for (g, &n_k) in groups.iter().zip(allocation) {
        if n_k == 0 || n_k > g.len() {
            return Err(Error::InfeasibleAllocation(format!(
                "stratum {} cannot take {n_k} of {}",
                g.label,
                g.len()
            )));
        }
        let w = g.len() as f64 / n_total;
        let mut means = Vec::new();
        for_each_subset(g.len(), n_k, |s| {
            let m = s.iter().map(|&i| pop.values()[g.indices[i]]).sum::<f64>() / n_k as f64;
            means.push(w * m);
        });
        per_stratum.push(means);
    }
    let mut totals = vec![0.0];
    for means in &per_stratum {
        totals = totals.iter().flat_map(|t| means.iter().map(move |m| t + m)).collect();
    }
    Ok(moments_of(&totals))
}

/// Moments of the cluster-sampling mean over all choices of `c` clusters.
pub fn cluster_exact(pop: &FinitePopulation, c: usize) -> Result<ExactMoments> {
    let groups = pop.clusters()?;
    let totals: Vec<f64> = groups
        .iter()
        .map(|g| g.indices.iter().map(|&i| pop.values()[i]).sum())
        .collect();
    let scale = groups.len() as f64 / pop.len() as f64;
    srs_exact_with(&totals, c, |s| {
        scale * s.iter().map(|&k| totals[k]).sum::<f64>() / c as f64
    })
}
