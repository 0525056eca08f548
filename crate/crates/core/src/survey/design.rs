use std::collections::BTreeMap;

use serde::Serialize;

use super::FinitePopulation;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// `n` distinct indices out of `0..population`, every subset equally likely.
///
/// Partial Fisher-Yates shuffle; the result is sorted.
pub(crate) fn srs_indices(population: usize, n: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    if n > population {
        return Err(Error::SampleExceedsPopulation {
            requested: n,
            available: population,
        });
    }
    let mut idx: Vec<usize> = (0..population).collect();
    for i in 0..n {
        let j = i + rng.index(population - i);
        idx.swap(i, j);
    }
    idx.truncate(n);
    idx.sort_unstable();
    Ok(idx)
}

/// Simple random sample without replacement.
pub fn srs_draw(pop: &FinitePopulation, n: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
    srs_indices(pop.len(), n, rng)
}

/// Simple random sample with replacement; `n` may exceed the population size.
pub fn bootstrap_draw(pop: &FinitePopulation, n: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
    if pop.is_empty() {
        return Err(Error::EmptyInput);
    }
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    Ok((0..n).map(|_| rng.index(pop.len())).collect())
}

/// One stage of a multistage design, applied inside every unit kept by the
/// previous stage. The first stage sees the whole population as one unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "stage", rename_all = "lowercase")]
pub enum Stage {
    /// Keep `c` of the clusters present in the unit (simple random sample of clusters).
    Clusters { c: usize },
    /// Keep `n` elements of the unit (simple random sample of elements).
    Srs { n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultistageSample {
    /// Sorted element indices.
    pub indices: Vec<usize>,
    /// Inclusion probability of each element in `indices`: the product of its stage probabilities.
    pub inclusion_probabilities: Vec<f64>,
}

pub fn multistage_draw(pop: &FinitePopulation, stages: &[Stage], rng: &mut RngStream) -> Result<MultistageSample> {
    if stages.is_empty() {
        return Err(Error::InvalidParameter(
            "multistage design needs at least one stage".into(),
        ));
    }
    let mut units: Vec<(Vec<usize>, f64)> = vec![((0..pop.len()).collect(), 1.0)];
    for stage in stages {
        let mut next = Vec::new();
        for (members, prob) in &units {
            match *stage {
                Stage::Srs { n } => {
                    let picked = srs_indices(members.len(), n, rng)?;
                    let kept = picked.into_iter().map(|i| members[i]).collect();
                    next.push((kept, prob * n as f64 / members.len() as f64));
                }
                Stage::Clusters { c } => {
                    let labels = pop.cluster_labels().ok_or(Error::MissingLabels("cluster"))?;
                    let mut by_label: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
                    for &i in members {
                        by_label.entry(labels[i]).or_default().push(i);
                    }
                    let clusters: Vec<Vec<usize>> = by_label.into_values().collect();
                    let picked = srs_indices(clusters.len(), c, rng)?;
                    let p = prob * c as f64 / clusters.len() as f64;
                    for k in picked {
                        next.push((clusters[k].clone(), p));
                    }
                }
            }
        }
        units = next;
    }
    let mut pairs: Vec<(usize, f64)> = units
        .into_iter()
        .flat_map(|(members, p)| members.into_iter().map(move |i| (i, p)))
        .collect();
    pairs.sort_by_key(|&(i, _)| i);
    Ok(MultistageSample {
        indices: pairs.iter().map(|&(i, _)| i).collect(),
        inclusion_probabilities: pairs.iter().map(|&(_, p)| p).collect(),
    })
}

/// Snowball sample with a per-edge expansion probability.
///
/// In each round every node added in the previous round (seeds first) recruits
/// each not-yet-included neighbour independently with `expansion_probability`.
pub fn snowball_draw(
    adjacency: &[Vec<usize>],
    seeds: &[usize],
    expansion_probability: f64,
    max_rounds: usize,
    rng: &mut RngStream,
) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&expansion_probability) {
        return Err(Error::InvalidParameter(format!(
            "expansion probability {expansion_probability} outside [0, 1]"
        )));
    }
    snowball_draw_with(adjacency, seeds, max_rounds, rng, |_, _, rng| {
        rng.bernoulli(expansion_probability)
    })
}

/// Snowball sample with a caller-supplied recruitment rule `(from, to, rng) -> include`.
pub fn snowball_draw_with<F>(
    adjacency: &[Vec<usize>],
    seeds: &[usize],
    max_rounds: usize,
    rng: &mut RngStream,
    mut recruit: F,
) -> Result<Vec<usize>>
where
    F: FnMut(usize, usize, &mut RngStream) -> bool,
{
    let n = adjacency.len();
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("snowball needs at least one seed".into()));
    }
    if let Some(&bad) = seeds.iter().find(|&&s| s >= n) {
        return Err(Error::InvalidParameter(format!(
            "seed index {bad} out of range for {n} nodes"
        )));
    }
    if let Some((node, _)) = adjacency
        .iter()
        .enumerate()
        .find(|(_, nbrs)| nbrs.iter().any(|&v| v >= n))
    {
        return Err(Error::InvalidParameter(format!(
            "node {node} lists a neighbour outside 0..{n}"
        )));
    }

    let mut included = vec![false; n];
    let mut frontier = Vec::new();
    for &s in seeds {
        if !included[s] {
            included[s] = true;
            frontier.push(s);
        }
    }
    for _ in 0..max_rounds {
        let mut next = Vec::new();
        for &u in &frontier {
            for &v in &adjacency[u] {
                if !included[v] && recruit(u, v, rng) {
                    included[v] = true;
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok((0..n).filter(|&i| included[i]).collect())
}
