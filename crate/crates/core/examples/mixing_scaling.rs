//! How long a sampler needs to cross a range of width L.
//!
//! A random walk with step `delta` needs about `(L / delta)^2` steps; HMC,
//! moving ballistically, about `L / eta`. Fitting `ln T` against `ln L` gives
//! slopes near 2 and 1. The last table shows why the random walk cannot
//! simply take bigger steps: acceptance collapses like `(ell / delta)^r`.
//!
//! Writes `scaling.csv` to the current directory.

use samplekit::diagnostics::{acceptance_tradeoff_probe, hmc_scaling, random_walk_scaling, ScalingExperiment};
use samplekit::io::{format_float, write_csv};
use samplekit::{Result, RngStream};

fn show(name: &str, e: &ScalingExperiment) {
    println!("{name}: slope {:.2} (r^2 {:.3})", e.fit.slope, e.fit.r2);
    for p in &e.points {
        println!(
            "  L = {:>3}: T = {:>10.1} +- {:>9.1}  ({} censored)",
            p.l, p.mean_cost, p.sd_cost, p.censored
        );
    }
}

fn main() -> Result<()> {
    let mut rng = RngStream::new(17);
    let ls = [10, 20, 40, 80];
    let rw = random_walk_scaling(&ls, 1, 50, &mut rng)?;
    let hm = hmc_scaling(&ls, 0.5, 50, &mut rng)?;
    show("random walk, delta = 1", &rw);
    show("HMC, eta = 0.5", &hm);

    let rows = rw
        .points
        .iter()
        .zip(&hm.points)
        .map(|(a, b)| vec![a.l.to_string(), format_float(a.mean_cost), format_float(b.mean_cost)]);
    write_csv(
        std::fs::File::create("scaling.csv")?,
        &["L", "random_walk_T", "hmc_T"],
        rows,
    )?;

    println!("\nacceptance against proposal radius, ell = 1, r = 2");
    for p in acceptance_tradeoff_probe(1.0, &[0.1, 0.5, 1.0, 2.0, 5.0, 10.0], 2, 20_000, &mut rng)? {
        println!(
            "  delta = {:>4}: {:.4} (min(1, ell^2/delta^2) = {:.4})",
            p.delta, p.acceptance_rate, p.predicted
        );
    }
    Ok(())
}
