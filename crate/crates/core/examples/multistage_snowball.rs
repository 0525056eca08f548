//! Two-stage sampling with Horvitz-Thompson weighting, and snowball sampling
//! on a small graph.

use samplekit::survey::{ht_estimate, multistage_draw, snowball_draw, FinitePopulation, HtQuantity, Stage};
use samplekit::{Result, RngStream};

fn main() -> Result<()> {
    let mut rng = RngStream::new(11);
    // 6 clusters of unequal size
    let sizes = [4, 6, 8, 3, 5, 7];
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (c, &m) in sizes.iter().enumerate() {
        for j in 0..m {
            values.push(10.0 * c as f64 + j as f64);
            labels.push(c as i64);
        }
    }
    let pop = FinitePopulation::new(values)?.with_clusters(labels)?;
    let stages = [Stage::Clusters { c: 3 }, Stage::Srs { n: 2 }];

    let s = multistage_draw(&pop, &stages, &mut rng)?;
    println!("one draw: elements {:?}", s.indices);
    println!("inclusion probabilities {:?}", s.inclusion_probabilities);

    let reps = 50_000;
    let mut total = 0.0;
    for _ in 0..reps {
        let s = multistage_draw(&pop, &stages, &mut rng)?;
        let ys: Vec<f64> = s.indices.iter().map(|&i| pop.values()[i]).collect();
        total += ht_estimate(
            &ys,
            &s.inclusion_probabilities,
            HtQuantity::Mean {
                population_size: pop.len(),
            },
        )?;
    }
    println!(
        "population mean {:.4}, mean HT estimate over {reps} draws {:.4}",
        pop.mean(),
        total / reps as f64
    );

    // path 0-1-2-3-4-5 with a chord 1-4
    let mut adjacency = vec![Vec::new(); 6];
    for (a, b) in [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (1, 4)] {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    for p in [1.0, 0.5] {
        let reached = snowball_draw(&adjacency, &[0], p, 10, &mut rng)?;
        println!("snowball from node 0, recruitment probability {p}: {reached:?}");
    }
    Ok(())
}
