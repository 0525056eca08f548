use serde::{Deserialize, Serialize};

use super::{run_chain, ChainConfig, Step, Trace};
use crate::density::TargetDensity;
use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceConfig {
    /// Width of one slice, `delta`.
    pub width: f64,
    /// Stepping-out limit on each side of the current point.
    pub max_slices: usize,
}

impl Default for SliceConfig {
    fn default() -> Self {
        Self {
            width: 1.0,
            max_slices: 1000,
        }
    }
}

/// Shrinkage iterations before giving up; only reachable with a broken density.
const MAX_SHRINKS: usize = 10_000;

/// Slice sampling with stepping out and shrinkage, one coordinate at a time.
///
/// For each coordinate: draw the level `ln y = ln P*(x) + ln u`, place a
/// window of width `delta` around the current value at a uniform offset, step
/// it out by whole windows until both ends fall below the level, then draw
/// uniformly from the window, shrinking it towards the current value after
/// every candidate below the level.
pub fn slice_sample<T>(target: &T, slice: &SliceConfig, cfg: &ChainConfig, rng: &mut RngStream) -> Result<Trace>
where
    T: TargetDensity + ?Sized,
{
    cfg.validate()?;
    if !(slice.width > 0.0 && slice.width.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "slice width must be positive, got {}",
            slice.width
        )));
    }
    let x0 = cfg.initial_state(target, rng)?;
    let mut scratch = x0.clone();
    run_chain(cfg, x0, rng, |x, rng| {
        for j in 0..x.len() {
            x[j] = update_coordinate(target, slice, x, j, &mut scratch, rng)?;
        }
        Ok(Step {
            accepted: true,
            probability: 1.0,
        })
    })
}

fn update_coordinate<T: TargetDensity + ?Sized>(
    target: &T,
    slice: &SliceConfig,
    x: &[f64],
    j: usize,
    scratch: &mut Vec<f64>,
    rng: &mut RngStream,
) -> Result<f64> {
    scratch.clear();
    scratch.extend_from_slice(x);
    let mut log_p = |v: f64| {
        scratch[j] = v;
        target.log_p_star(scratch)
    };
    let x0 = x[j];
    let level = log_p(x0) + rng.uniform_open().ln();
    let w = slice.width;
    let mut lo = x0 - rng.uniform() * w;
    let mut hi = lo + w;

    let mut steps = 0;
    while log_p(lo) >= level {
        if steps == slice.max_slices {
            return Err(Error::NotSliceBounded(slice.max_slices));
        }
        lo -= w;
        steps += 1;
    }
    steps = 0;
    while log_p(hi) >= level {
        if steps == slice.max_slices {
            return Err(Error::NotSliceBounded(slice.max_slices));
        }
        hi += w;
        steps += 1;
    }

    for _ in 0..MAX_SHRINKS {
        let candidate = lo + rng.uniform() * (hi - lo);
        if log_p(candidate) >= level {
            return Ok(candidate);
        }
        if candidate < x0 {
            lo = candidate;
        } else {
            hi = candidate;
        }
    }
    Err(Error::NonFinite {
        value: level,
        context: format!("slice shrinkage around {x0} did not terminate"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{Density, FnDensity};

    fn ks(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn robust_to_width_on_standard_normal() {
        let target = Density::standard_normal();
        for (seed, width) in [0.5, 2.0, 8.0].into_iter().enumerate() {
            let cfg = ChainConfig::new(100_000).starting_at(vec![0.0]);
            let sc = SliceConfig {
                width,
                ..Default::default()
            };
            let t = slice_sample(&target, &sc, &cfg, &mut RngStream::new(seed as u64)).unwrap();
            let d = ks(t.coordinate(0), |x| target.cdf(x).unwrap());
            assert!(d < 0.006, "width {width}: ks {d}");
        }
    }

    #[test]
    fn uniform_target_stays_inside() {
        let target = Density::Uniform { lo: 0.0, hi: 1.0 };
        let cfg = ChainConfig::new(20_000);
        let t = slice_sample(&target, &SliceConfig::default(), &cfg, &mut RngStream::new(10)).unwrap();
        let xs = t.coordinate(0);
        assert!(xs.iter().all(|&x| (0.0..=1.0).contains(&x)));
        assert!(ks(xs, |x| x) < 0.015);
    }

    #[test]
    fn bimodal_mixture_visits_both_modes() {
        let target = Density::parse("mixture").unwrap();
        let cfg = ChainConfig::new(100_000).starting_at(vec![-3.0]);
        let t = slice_sample(&target, &SliceConfig::default(), &cfg, &mut RngStream::new(11)).unwrap();
        let right = t.coordinate(0).iter().filter(|&&x| x > 0.0).count() as f64 / t.len() as f64;
        assert!((right - 0.5).abs() < 0.02, "{right}");
    }

    #[test]
    fn unbounded_slice_errors() {
        let flat = FnDensity::new(1, |_| 0.0);
        let cfg = ChainConfig::new(10).starting_at(vec![0.0]);
        let sc = SliceConfig {
            width: 1.0,
            max_slices: 50,
        };
        assert_eq!(
            slice_sample(&flat, &sc, &cfg, &mut RngStream::new(12)),
            Err(Error::NotSliceBounded(50))
        );
        let bad = SliceConfig {
            width: 0.0,
            ..Default::default()
        };
        assert!(slice_sample(&flat, &bad, &cfg, &mut RngStream::new(12)).is_err());
    }
}
