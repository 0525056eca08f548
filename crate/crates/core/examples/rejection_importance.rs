//! Sampling from unnormalized densities without Markov chains.
//!
//! * inverse-CDF sampling of an exponential,
//! * rejection sampling of `P*(x) = 2x` on `[0, 1]` under `c Q` with `Q` uniform,
//!   including the automatic search for `c`,
//! * importance sampling of `E[x^2]` under an unnormalized standard normal.

use samplekit::density::{Density, Proposal, Quantile};
use samplekit::diagnostics::distribution_fit;
use samplekit::mc::{
    importance_estimate, inverse_cdf_sample, rejection_calibrate_c, rejection_sample, CalibrationConfig,
};
use samplekit::{Result, RngStream};

fn main() -> Result<()> {
    let mut rng = RngStream::new(3);

    let q = Quantile::Exponential { rate: 2.0 };
    let xs = inverse_cdf_sample(|u| q.inverse_cdf(u), 50_000, &mut rng)?;
    let fit = distribution_fit(&xs, |x| q.cdf(x))?;
    println!(
        "exponential(2) by inverse CDF: mean {:.4}, {fit:?}",
        xs.iter().sum::<f64>() / xs.len() as f64
    );

    let target = Density::Triangular;
    let uniform = Proposal::Uniform { lo: 0.0, hi: 1.0 };
    let out = rejection_sample(&target, &uniform, 2.0, 50_000, &mut rng)?;
    println!(
        "\nrejection with c = 2: acceptance {:.4} (1/c = 0.5), {} proposals",
        out.acceptance_rate, out.proposals
    );
    let samples: Vec<f64> = out.samples.iter().map(|x| x[0]).collect();
    println!("  {:?}", distribution_fit(&samples, |x| x.clamp(0.0, 1.0).powi(2))?);

    // too small an envelope is detected, not silently accepted
    match rejection_sample(&target, &uniform, 1.5, 10, &mut rng) {
        Err(e) => println!("  c = 1.5 refused: {e}"),
        Ok(_) => println!("  c = 1.5 unexpectedly accepted"),
    }
    let found = rejection_calibrate_c(&target, &uniform, &CalibrationConfig::default(), &mut rng)?;
    println!("  calibrated c = {:.3} after {} restarts", found.c, found.restarts);

    let proposal = Proposal::Normal {
        mean: 0.0,
        sd: 2f64.sqrt(),
        dim: 1,
    };
    let est = importance_estimate(
        &Density::standard_normal(),
        &proposal,
        |x| x[0] * x[0],
        1_000_000,
        &mut rng,
    )?;
    println!(
        "\nimportance sampling E[x^2] = {:.4} (exact 1), effective sample size {:.0} of {}",
        est.value, est.effective_sample_size, est.n
    );
    Ok(())
}
