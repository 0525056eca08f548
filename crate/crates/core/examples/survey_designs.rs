//! SRS, stratified and cluster sampling on the nine-element dataset
//! `{1,2,3,1,2,3,1,2,3}`: the closed-form design variances next to exact
//! enumeration of every possible sample and a Monte Carlo replication.
//!
//! The same values are grouped two ways. As strata `{1,1,1},{2,2,2},{3,3,3}`
//! the groups differ in mean, which is what stratification wants; as clusters
//! `{1,2,3}` x 3 they are alike, which is what cluster sampling wants. Both
//! designs end up with zero variance.
//!
//! ```text
//! cargo run --example survey_designs
//! ```

use samplekit::survey::enumerate::{cluster_exact, srs_exact, stratified_exact};
use samplekit::survey::{
    cluster_estimate, cluster_variance, demo_population, srs_mean_estimate, srs_variance, stratified_estimate,
    stratified_variance, FinitePopulation,
};
use samplekit::{Result, RngStream};

fn main() -> Result<()> {
    let pop = demo_population();
    let mut rng = RngStream::new(7);
    println!("population mean {}, variance {}", pop.mean(), pop.variance());

    let exact = srs_exact(pop.values(), 3)?;
    let reps: Vec<f64> = (0..100_000)
        .map(|_| srs_mean_estimate(&pop, 3, &mut rng).map(|e| e.point))
        .collect::<Result<_>>()?;
    let (m, v) = mean_var(&reps);
    println!("\nSRS n = 3 over {} samples", exact.outcomes);
    println!("  formula    Var = {:.6}", srs_variance(&pop, 3)?);
    println!("  exhaustive E = {:.6}, Var = {:.6}", exact.mean, exact.variance);
    println!("  simulated  E = {m:.6}, Var = {v:.6}");

    let strata = FinitePopulation::new(vec![1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 3.0, 3.0, 3.0])?
        .with_strata(vec![1, 1, 1, 2, 2, 2, 3, 3, 3])?;
    let alloc = [1, 1, 1];
    let est = stratified_estimate(&strata, &alloc, &mut rng)?;
    println!("\nstratified, one element per stratum");
    println!(
        "  formula Var = {}, exhaustive Var = {}, one draw = {}",
        stratified_variance(&strata, &alloc)?,
        stratified_exact(&strata, &alloc)?.variance,
        est.point
    );

    let clusters = demo_population().with_clusters(vec![1, 1, 1, 2, 2, 2, 3, 3, 3])?;
    let est = cluster_estimate(&clusters, 1, &mut rng)?;
    println!("\ncluster, one of three clusters");
    println!(
        "  formula Var = {}, exhaustive Var = {}, one draw = {} from elements {:?}",
        cluster_variance(&clusters, 1)?,
        cluster_exact(&clusters, 1)?.variance,
        est.point,
        est.sample_indices
    );
    Ok(())
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    (m, xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64)
}
