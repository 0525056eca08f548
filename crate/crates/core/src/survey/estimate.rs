use serde::Serialize;

use super::design::srs_indices;
use super::{unit_variance, FinitePopulation, Group};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::stats;

/// Population quantity targeted by the Horvitz-Thompson estimator.
#[derive(Clone, Copy)]
pub enum HtQuantity<'a> {
    /// `h(x) = x`.
    Total,
    /// `h(x) = x / N`.
    Mean { population_size: usize },
    /// `h(x) = 1{predicate(x)} / N`.
    Proportion {
        population_size: usize,
        predicate: &'a dyn Fn(f64) -> bool,
    },
}

/// Horvitz-Thompson estimate `sum h(x_j) / pi_j` over a drawn sample.
pub fn ht_estimate(values: &[f64], inclusion_probs: &[f64], quantity: HtQuantity<'_>) -> Result<f64> {
    if values.len() != inclusion_probs.len() {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: inclusion_probs.len(),
        });
    }
    if let Some((index, &value)) = inclusion_probs
        .iter()
        .enumerate()
        .find(|(_, &p)| !(p > 0.0 && p <= 1.0))
    {
        return Err(Error::InvalidInclusionProbability { index, value });
    }
    let h = |x: f64| -> f64 {
        match quantity {
            HtQuantity::Total => x,
            HtQuantity::Mean { population_size } => x / population_size as f64,
            HtQuantity::Proportion {
                population_size,
                predicate,
            } => {
                if predicate(x) {
                    1.0 / population_size as f64
                } else {
                    0.0
                }
            }
        }
    };
    Ok(values.iter().zip(inclusion_probs).map(|(&x, &p)| h(x) / p).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Design {
    Srs {
        population_size: usize,
        n: usize,
    },
    Stratified {
        population_size: usize,
        strata_sizes: Vec<usize>,
        allocation: Vec<usize>,
    },
    Cluster {
        population_size: usize,
        clusters: usize,
        c: usize,
    },
}

/// Point estimate of the population mean with its design variance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurveyEstimate {
    pub point: f64,
    pub analytic_variance: f64,
    pub design: Design,
    pub sample_indices: Vec<usize>,
}

fn fpc(n: usize, total: usize) -> f64 {
    1.0 - n as f64 / total as f64
}

/// `(1 - n/N) sigma^2 / n` with the unbiased population variance.
pub fn srs_variance(pop: &FinitePopulation, n: usize) -> Result<f64> {
    check_sample_size(n, pop.len())?;
    Ok(fpc(n, pop.len()) * pop.variance() / n as f64)
}

fn check_sample_size(n: usize, available: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter("sample size must be at least 1".into()))
    } else if n > available {
        Err(Error::SampleExceedsPopulation {
            requested: n,
            available,
        })
    } else {
        Ok(())
    }
}

pub fn srs_mean_estimate(pop: &FinitePopulation, n: usize, rng: &mut RngStream) -> Result<SurveyEstimate> {
    let analytic_variance = srs_variance(pop, n)?;
    let idx = srs_indices(pop.len(), n, rng)?;
    let point = idx.iter().map(|&i| pop.values()[i]).sum::<f64>() / n as f64;
    Ok(SurveyEstimate {
        point,
        analytic_variance,
        design: Design::Srs {
            population_size: pop.len(),
            n,
        },
        sample_indices: idx,
    })
}

struct StratumStats {
    size: usize,
    mean: f64,
    variance: f64,
}

fn stratum_stats(pop: &FinitePopulation, groups: &[Group]) -> Vec<StratumStats> {
    groups
        .iter()
        .map(|g| {
            let v = g.values(pop);
            StratumStats {
                size: v.len(),
                mean: stats::mean(&v).expect("groups are nonempty"),
                variance: unit_variance(&v),
            }
        })
        .collect()
}

fn check_allocation(groups: &[Group], allocation: &[usize]) -> Result<()> {
    if allocation.len() != groups.len() {
        return Err(Error::LengthMismatch {
            left: groups.len(),
            right: allocation.len(),
        });
    }
    for (g, &n_k) in groups.iter().zip(allocation) {
        if n_k == 0 {
            return Err(Error::InfeasibleAllocation(format!(
                "stratum {} has an empty sample",
                g.label
            )));
        }
        if n_k > g.len() {
            return Err(Error::SampleExceedsPopulation {
                requested: n_k,
                available: g.len(),
            });
        }
    }
    Ok(())
}

/// `sum_k (N_k/N)^2 (1 - n_k/N_k) sigma_k^2 / n_k`.
pub fn stratified_variance(pop: &FinitePopulation, allocation: &[usize]) -> Result<f64> {
    let groups = pop.strata()?;
    check_allocation(&groups, allocation)?;
    let n_total = pop.len() as f64;
    Ok(stratum_stats(pop, &groups)
        .iter()
        .zip(allocation)
        .map(|(s, &n_k)| {
            let w = s.size as f64 / n_total;
            w * w * fpc(n_k, s.size) * s.variance / n_k as f64
        })
        .sum())
}

/// Stratified variance under proportional allocation `n_k / n = N_k / N`:
/// `(1/n)(1 - n/N) sum_k (N_k/N) sigma_k^2`. `n` need not give integer `n_k`.
pub fn proportional_variance(pop: &FinitePopulation, n: f64) -> Result<f64> {
    let groups = pop.strata()?;
    if !(n > 0.0 && n <= pop.len() as f64) {
        return Err(Error::InvalidParameter(format!("sample size {n} outside (0, N]")));
    }
    let n_total = pop.len() as f64;
    let within: f64 = stratum_stats(pop, &groups)
        .iter()
        .map(|s| s.size as f64 / n_total * s.variance)
        .sum();
    Ok((1.0 - n / n_total) * within / n)
}

/// Population variance recomposed from within- and between-stratum parts.
pub fn total_variance_from_strata(pop: &FinitePopulation) -> Result<f64> {
    let groups = pop.strata()?;
    let st = stratum_stats(pop, &groups);
    let n_total = pop.len() as f64;
    if pop.len() < 2 {
        return Ok(0.0);
    }
    let mu: f64 = st.iter().map(|s| s.size as f64 / n_total * s.mean).sum();
    let within: f64 = st.iter().map(|s| (s.size as f64 - 1.0) * s.variance).sum();
    let between: f64 = st.iter().map(|s| s.size as f64 * (s.mean - mu) * (s.mean - mu)).sum();
    Ok((within + between) / (n_total - 1.0))
}

/// SRS variance of the mean written through the strata (exact restatement).
pub fn srs_variance_by_strata(pop: &FinitePopulation, n: usize) -> Result<f64> {
    check_sample_size(n, pop.len())?;
    let groups = pop.strata()?;
    let st = stratum_stats(pop, &groups);
    let nn = pop.len() as f64;
    let mu = pop.mean();
    let bracket: f64 = st
        .iter()
        .map(|s| {
            (s.size as f64 - 1.0) / (nn - 1.0) * s.variance + s.size as f64 / (nn - 1.0) * (s.mean - mu) * (s.mean - mu)
        })
        .sum();
    Ok(fpc(n, pop.len()) * bracket / n as f64)
}

/// Large-`N` approximation of [`srs_variance_by_strata`] with `(N_k - 1)/(N - 1)` replaced by `N_k / N`.
/// Accepts a real-valued `n` so it can be compared with [`proportional_variance`].
pub fn srs_variance_approx_by_strata(pop: &FinitePopulation, n: f64) -> Result<f64> {
    let groups = pop.strata()?;
    if !(n > 0.0 && n <= pop.len() as f64) {
        return Err(Error::InvalidParameter(format!("sample size {n} outside (0, N]")));
    }
    let st = stratum_stats(pop, &groups);
    let nn = pop.len() as f64;
    let mu = pop.mean();
    let within: f64 = st.iter().map(|s| s.size as f64 / nn * s.variance).sum();
    let between: f64 = st
        .iter()
        .map(|s| s.size as f64 / (nn - 1.0) * (s.mean - mu) * (s.mean - mu))
        .sum();
    Ok((1.0 - n / nn) * (within + between) / n)
}

pub fn stratified_estimate(
    pop: &FinitePopulation,
    allocation: &[usize],
    rng: &mut RngStream,
) -> Result<SurveyEstimate> {
    let analytic_variance = stratified_variance(pop, allocation)?;
    let groups = pop.strata()?;
    let n_total = pop.len() as f64;
    let mut point = 0.0;
    let mut sample_indices = Vec::new();
    for (g, &n_k) in groups.iter().zip(allocation) {
        let picked = srs_indices(g.len(), n_k, rng)?;
        let sample_mean = picked.iter().map(|&i| pop.values()[g.indices[i]]).sum::<f64>() / n_k as f64;
        point += g.len() as f64 / n_total * sample_mean;
        sample_indices.extend(picked.into_iter().map(|i| g.indices[i]));
    }
    sample_indices.sort_unstable();
    Ok(SurveyEstimate {
        point,
        analytic_variance,
        design: Design::Stratified {
            population_size: pop.len(),
            strata_sizes: groups.iter().map(Group::len).collect(),
            allocation: allocation.to_vec(),
        },
        sample_indices,
    })
}

fn cluster_totals(pop: &FinitePopulation, groups: &[Group]) -> Vec<f64> {
    groups
        .iter()
        .map(|g| g.indices.iter().map(|&i| pop.values()[i]).sum())
        .collect()
}

/// `(K/N)^2 (1 - c/K) sigma_*^2 / c`, `sigma_*^2` the unbiased variance of the cluster totals.
pub fn cluster_variance(pop: &FinitePopulation, c: usize) -> Result<f64> {
    let groups = pop.clusters()?;
    let k = groups.len();
    check_sample_size(c, k)?;
    if c == k {
        return Ok(0.0);
    }
    let totals = cluster_totals(pop, &groups);
    let ratio = k as f64 / pop.len() as f64;
    Ok(ratio * ratio * fpc(c, k) * unit_variance(&totals) / c as f64)
}

/// `(1/c)(1 - c/K) [sum_k (mu_k - mu)^2 / (K - 1)]`, valid when every cluster has the same size.
pub fn equal_cluster_variance(pop: &FinitePopulation, c: usize) -> Result<f64> {
    let groups = pop.clusters()?;
    let k = groups.len();
    check_sample_size(c, k)?;
    if groups.iter().any(|g| g.len() != groups[0].len()) {
        return Err(Error::InvalidParameter("clusters have unequal sizes".into()));
    }
    if c == k {
        return Ok(0.0);
    }
    let mu = pop.mean();
    let spread: f64 = stratum_stats(pop, &groups)
        .iter()
        .map(|s| (s.mean - mu) * (s.mean - mu))
        .sum::<f64>()
        / (k as f64 - 1.0);
    Ok(fpc(c, k) * spread / c as f64)
}

pub fn cluster_estimate(pop: &FinitePopulation, c: usize, rng: &mut RngStream) -> Result<SurveyEstimate> {
    let analytic_variance = cluster_variance(pop, c)?;
    let groups = pop.clusters()?;
    let totals = cluster_totals(pop, &groups);
    let picked = srs_indices(groups.len(), c, rng)?;
    let mean_total = picked.iter().map(|&k| totals[k]).sum::<f64>() / c as f64;
    let point = groups.len() as f64 / pop.len() as f64 * mean_total;
    let mut sample_indices: Vec<usize> = picked.iter().flat_map(|&k| groups[k].indices.iter().copied()).collect();
    sample_indices.sort_unstable();
    Ok(SurveyEstimate {
        point,
        analytic_variance,
        design: Design::Cluster {
            population_size: pop.len(),
            clusters: groups.len(),
            c,
        },
        sample_indices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survey::demo_population;

    fn perfect_strata() -> FinitePopulation {
        demo_population().with_strata(vec![1, 2, 3, 1, 2, 3, 1, 2, 3]).unwrap()
    }

    #[test]
    fn ht_examples() {
        let v = [1.0, 2.0, 3.0];
        let census = ht_estimate(&v, &[1.0; 3], HtQuantity::Mean { population_size: 3 }).unwrap();
        assert_eq!(census, 2.0);
        assert_eq!(ht_estimate(&[5.0], &[0.5], HtQuantity::Total).unwrap(), 10.0);
        let big = |x: f64| x > 1.5;
        let prop = ht_estimate(
            &v,
            &[1.0; 3],
            HtQuantity::Proportion {
                population_size: 3,
                predicate: &big,
            },
        )
        .unwrap();
        assert!((prop - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            ht_estimate(&v, &[1.0, 0.0, 1.0], HtQuantity::Total),
            Err(Error::InvalidInclusionProbability { index: 1, .. })
        ));
        assert!(ht_estimate(&v, &[1.0, 1.2, 1.0], HtQuantity::Total).is_err());
        assert!(ht_estimate(&v, &[1.0], HtQuantity::Total).is_err());
    }

    #[test]
    fn srs_variance_examples() {
        let pop = demo_population();
        assert!((srs_variance(&pop, 3).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(srs_variance(&pop, 9).unwrap(), 0.0);
        let e = srs_mean_estimate(&pop, 9, &mut RngStream::new(1)).unwrap();
        assert_eq!(e.point, 2.0);
        assert_eq!(e.analytic_variance, 0.0);
    }

    #[test]
    fn stratified_perfect_strata_zero_variance() {
        let pop = perfect_strata();
        let e = stratified_estimate(&pop, &[1, 1, 1], &mut RngStream::new(2)).unwrap();
        assert_eq!(e.analytic_variance, 0.0);
        assert_eq!(e.point, 2.0);
        assert_eq!(e.sample_indices.len(), 3);
        assert!(e.analytic_variance < srs_variance(&demo_population(), 3).unwrap());
    }

    #[test]
    fn stratified_rejects_bad_allocations() {
        let pop = perfect_strata();
        let mut rng = RngStream::new(3);
        assert!(matches!(
            stratified_estimate(&pop, &[1, 0, 1], &mut rng),
            Err(Error::InfeasibleAllocation(_))
        ));
        assert!(stratified_estimate(&pop, &[1, 4, 1], &mut rng).is_err());
        assert!(stratified_estimate(&pop, &[1, 1], &mut rng).is_err());
        assert_eq!(
            stratified_estimate(&demo_population(), &[3], &mut rng),
            Err(Error::MissingLabels("stratum"))
        );
    }

    #[test]
    fn proportional_matches_general_formula() {
        let pop = FinitePopulation::new((0..12).map(|i| (i * i % 7) as f64).collect())
            .unwrap()
            .with_strata(vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 2, 2, 2])
            .unwrap();
        // N = (6,3,3), n = 4 -> n_k = (2,1,1)
        let general = stratified_variance(&pop, &[2, 1, 1]).unwrap();
        let prop = proportional_variance(&pop, 4.0).unwrap();
        assert!((general - prop).abs() < 1e-12);
    }

    #[test]
    fn variance_decomposition_recomposes() {
        let pop = FinitePopulation::new(vec![1.0, 4.0, 2.0, 8.0, 5.0, 7.0, 3.0])
            .unwrap()
            .with_strata(vec![1, 1, 2, 2, 2, 3, 3])
            .unwrap();
        assert!((total_variance_from_strata(&pop).unwrap() - pop.variance()).abs() < 1e-12);
        assert!((srs_variance_by_strata(&pop, 3).unwrap() - srs_variance(&pop, 3).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn cluster_examples() {
        let same = demo_population()
            .with_clusters(vec![1, 1, 1, 2, 2, 2, 3, 3, 3])
            .unwrap();
        assert_eq!(cluster_variance(&same, 2).unwrap(), 0.0);
        assert_eq!(equal_cluster_variance(&same, 2).unwrap(), 0.0);

        let distinct = demo_population()
            .with_clusters(vec![1, 2, 3, 1, 2, 3, 1, 2, 3])
            .unwrap();
        assert!((cluster_variance(&distinct, 2).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((equal_cluster_variance(&distinct, 2).unwrap() - 1.0 / 6.0).abs() < 1e-15);

        let e = cluster_estimate(&distinct, 3, &mut RngStream::new(4)).unwrap();
        assert_eq!(e.point, 2.0);
        assert_eq!(e.analytic_variance, 0.0);
        assert!(cluster_estimate(&distinct, 4, &mut RngStream::new(4)).is_err());
        assert!(cluster_estimate(&demo_population(), 1, &mut RngStream::new(4)).is_err());
    }

    #[test]
    fn unequal_clusters_rejected_by_equal_size_formula() {
        let pop = demo_population()
            .with_clusters(vec![1, 1, 2, 2, 2, 3, 3, 3, 3])
            .unwrap();
        assert!(equal_cluster_variance(&pop, 1).is_err());
        assert!(cluster_variance(&pop, 1).unwrap() > 0.0);
    }
}
