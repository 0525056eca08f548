//! pi from the fraction of uniform points in the unit square that land
//! inside the quarter circle, with the binomial standard error.

use samplekit::mc::estimate_pi;
use samplekit::{Result, RngStream};

fn main() -> Result<()> {
    let q = std::f64::consts::FRAC_PI_4;
    for n in [100, 10_000, 1_000_000] {
        let est = estimate_pi(n, &mut RngStream::new(1))?;
        let se = 4.0 * (q * (1.0 - q) / n as f64).sqrt();
        println!(
            "n = {n:>9}: {est:.5} +- {se:.5} (error {:+.5})",
            est - std::f64::consts::PI
        );
    }
    Ok(())
}
