//! Survey sampling from a finite population.
//!
//! Designs draw index sets from a [`FinitePopulation`]; estimators turn a draw
//! into a [`SurveyEstimate`] carrying the design-based variance of the
//! estimator. The [`enumerate`] module walks whole design spaces and is the
//! exact reference the analytic variances are checked against.

mod allocation;
mod design;
pub mod enumerate;
mod estimate;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{self, Divisor};

pub use allocation::{neyman_allocate, proportional_allocation, stratified_objective};
pub use design::{
    bootstrap_draw, multistage_draw, snowball_draw, snowball_draw_with, srs_draw, MultistageSample, Stage,
};
pub use estimate::{
    cluster_estimate, cluster_variance, equal_cluster_variance, ht_estimate, proportional_variance, srs_mean_estimate,
    srs_variance, srs_variance_approx_by_strata, srs_variance_by_strata, stratified_estimate, stratified_variance,
    total_variance_from_strata, Design, HtQuantity, SurveyEstimate,
};

/// A labeled finite dataset. Stratum and cluster labels, when present, cover every element.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinitePopulation {
    values: Vec<f64>,
    strata: Option<Vec<i64>>,
    clusters: Option<Vec<i64>>,
}

/// One block of a partition: a stratum or a cluster.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Group {
    pub label: i64,
    pub indices: Vec<usize>,
}

impl Group {
    pub fn values(&self, pop: &FinitePopulation) -> Vec<f64> {
        self.indices.iter().map(|&i| pop.values[i]).collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

impl FinitePopulation {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some((i, &v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                value: v,
                context: format!("population value {i}"),
            });
        }
        Ok(Self {
            values,
            strata: None,
            clusters: None,
        })
    }

    pub fn with_strata(mut self, labels: Vec<i64>) -> Result<Self> {
        self.check_labels(&labels)?;
        self.strata = Some(labels);
        Ok(self)
    }

    pub fn with_clusters(mut self, labels: Vec<i64>) -> Result<Self> {
        self.check_labels(&labels)?;
        self.clusters = Some(labels);
        Ok(self)
    }

    fn check_labels(&self, labels: &[i64]) -> Result<()> {
        if labels.len() != self.values.len() {
            return Err(Error::LengthMismatch {
                left: self.values.len(),
                right: labels.len(),
            });
        }
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn stratum_labels(&self) -> Option<&[i64]> {
        self.strata.as_deref()
    }

    pub fn cluster_labels(&self) -> Option<&[i64]> {
        self.clusters.as_deref()
    }

    pub fn mean(&self) -> f64 {
        stats::mean(&self.values).expect("population is nonempty")
    }

    /// Unbiased population variance (divisor `N - 1`); zero for a single element.
    pub fn variance(&self) -> f64 {
        unit_variance(&self.values)
    }

    /// Strata in ascending label order.
    pub fn strata(&self) -> Result<Vec<Group>> {
        self.strata
            .as_deref()
            .map(group_by)
            .ok_or(Error::MissingLabels("stratum"))
    }

    /// Clusters in ascending label order.
    pub fn clusters(&self) -> Result<Vec<Group>> {
        self.clusters
            .as_deref()
            .map(group_by)
            .ok_or(Error::MissingLabels("cluster"))
    }
}

/// Unbiased variance of a block, defined as zero for a single element.
pub(crate) fn unit_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        0.0
    } else {
        stats::variance(values, Divisor::Unbiased).expect("two or more values")
    }
}

fn group_by(labels: &[i64]) -> Vec<Group> {
    let mut map: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        map.entry(l).or_default().push(i);
    }
    map.into_iter()
        .map(|(label, indices)| Group { label, indices })
        .collect()
}

/// The nine-element dataset `{1,2,3,1,2,3,1,2,3}` used throughout the docs and tests.
pub fn demo_population() -> FinitePopulation {
    FinitePopulation::new(vec![1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 1.0, 2.0, 3.0]).expect("nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_sorted_by_label() {
        let pop = demo_population().with_strata(vec![3, 1, 2, 3, 1, 2, 3, 1, 2]).unwrap();
        let strata = pop.strata().unwrap();
        assert_eq!(strata.len(), 3);
        assert_eq!(strata[0].label, 1);
        assert_eq!(strata[0].indices, vec![1, 4, 7]);
        assert_eq!(strata[0].values(&pop), vec![2.0, 2.0, 2.0]);
        assert!(pop.clusters().is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(FinitePopulation::new(vec![]), Err(Error::EmptyInput));
        assert!(FinitePopulation::new(vec![1.0, f64::NAN]).is_err());
        assert!(demo_population().with_clusters(vec![1, 2]).is_err());
    }

    #[test]
    fn demo_moments() {
        let pop = demo_population();
        assert_eq!(pop.mean(), 2.0);
        assert_eq!(pop.variance(), 0.75);
    }
}
