//! Neyman allocation against proportional allocation for three strata of
//! very different spread.

use samplekit::survey::{neyman_allocate, proportional_allocation, stratified_objective};
use samplekit::Result;

fn main() -> Result<()> {
    let sizes = [400, 300, 300];
    let sds = [1.0, 5.0, 20.0];
    println!("strata sizes {sizes:?}, standard deviations {sds:?}\n");
    println!(
        "{:>4} {:>18} {:>12} {:>18} {:>12}",
        "n", "proportional", "variance", "neyman", "variance"
    );
    for n in [10, 30, 100, 300] {
        let p = proportional_allocation(&sizes, n)?;
        let y = neyman_allocate(&sizes, &sds, n)?;
        println!(
            "{n:>4} {:>18} {:>12.5} {:>18} {:>12.5}",
            format!("{p:?}"),
            stratified_objective(&sizes, &sds, &p),
            format!("{y:?}"),
            stratified_objective(&sizes, &sds, &y)
        );
    }
    // a stratum with no spread still gets its one mandatory element
    let y = neyman_allocate(&[50, 50], &[0.0, 3.0], 20)?;
    println!("\nwith a constant stratum: {y:?}");
    Ok(())
}
