//! Metropolis sampling, from exact discrete kernels to continuous chains.

use samplekit::density::Density;
use samplekit::diagnostics::{chain_distribution_fit, mixing_report};
use samplekit::mcmc::{
    metropolis, transition_matrix, verify_balance, ChainConfig, DiscreteChainSpec, GaussianStepProposal,
};
use samplekit::{Result, RngStream};

fn main() -> Result<()> {
    let mut rng = RngStream::new(5);

    // Four states, symmetric random proposal: the Metropolis kernel is in
    // detailed balance with the normalized weights, which are therefore stationary.
    let spec = DiscreteChainSpec::random_symmetric(4, &mut rng)?;
    println!("target {:?}", spec.target());
    for row in transition_matrix(&spec) {
        println!("  {:?}", row.iter().map(|p| format!("{p:.4}")).collect::<Vec<_>>());
    }
    let report = verify_balance(&spec)?;
    println!(
        "max balance violation {:.1e}, stationary vector off by {:.1e}",
        report.max_balance_violation, report.stationary_gap
    );

    // Gaussian random-walk proposals of growing scale on a standard normal.
    let target = Density::standard_normal();
    println!("\n{:>6} {:>10} {:>10} {:>8}", "sigma", "accept", "ESS", "KS ok");
    for sigma in [0.1, 1.0, 2.38, 10.0, 50.0] {
        let trace = metropolis(
            &target,
            &GaussianStepProposal::new(sigma)?,
            &ChainConfig::new(50_000),
            &mut rng,
        )?;
        let mix = mixing_report(&trace, 200)?;
        // a badly mixing chain leaves too few effective draws to test at all
        let ks = match chain_distribution_fit(&trace.coordinate(0), samplekit::stats::normal_cdf) {
            Ok((fit, _)) => fit.passed.to_string(),
            Err(e) => format!("- ({e})"),
        };
        println!(
            "{sigma:>6} {:>10.3} {:>10.0} {ks:>8}",
            mix.acceptance_rate, mix.effective_sample_size
        );
    }
    Ok(())
}
