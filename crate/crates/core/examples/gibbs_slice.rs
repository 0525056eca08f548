//! Gibbs sampling of a correlated bivariate normal and slice sampling of a
//! bimodal mixture.

use samplekit::density::Density;
use samplekit::diagnostics::effective_sample_size;
use samplekit::mcmc::{gibbs, slice_sample, ChainConfig, SliceConfig};
use samplekit::stats::{correlation, mean};
use samplekit::{Result, RngStream};

fn main() -> Result<()> {
    let mut rng = RngStream::new(9);
    for rho in [0.0, 0.9, 0.99] {
        let target = Density::BivariateNormal { rho };
        let draw = |j: usize, x: &[f64], r: &mut RngStream| {
            let (m, s) = target
                .gaussian_conditional(j, x)
                .expect("bivariate normal conditionals are Gaussian");
            m + s * r.standard_normal()
        };
        let t = gibbs(draw, 2, &ChainConfig::new(50_000), &mut rng)?;
        let (x, y) = (t.coordinate(0), t.coordinate(1));
        println!(
            "gibbs rho = {rho}: sample correlation {:.3}, ESS of x {:.0} / {}",
            correlation(&x, &y)?,
            effective_sample_size(&x)?,
            t.len()
        );
    }

    let mixture = Density::parse("mixture")?;
    for width in [0.5, 2.0, 8.0] {
        let cfg = SliceConfig {
            width,
            ..SliceConfig::default()
        };
        let t = slice_sample(&mixture, &cfg, &ChainConfig::new(50_000), &mut rng)?;
        let xs = t.coordinate(0);
        println!(
            "slice width {width}: mean {:.3}, ESS {:.0}, {:.1}% of draws right of 0",
            mean(&xs)?,
            effective_sample_size(&xs)?,
            100.0 * xs.iter().filter(|&&x| x > 0.0).count() as f64 / xs.len() as f64
        );
    }
    Ok(())
}
