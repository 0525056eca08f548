use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcmc::{ChainConfig, InitialPoint, Trace};
use crate::rng::RngStream;

/// Number of values in the ordered-overrelaxation multiset unless configured otherwise.
pub const DEFAULT_K_ORDER: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverrelaxConfig {
    /// Adler's `alpha` in `[-1, 1]`; negative values overrelax.
    pub alpha: f64,
    /// Size `K` of the ordered-overrelaxation multiset, including the old value.
    pub k_order: usize,
}

impl Default for OverrelaxConfig {
    fn default() -> Self {
        Self {
            alpha: -0.9,
            k_order: DEFAULT_K_ORDER,
        }
    }
}

impl OverrelaxConfig {
    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [-1, 1], got {}",
                self.alpha
            )));
        }
        if self.k_order < 2 {
            return Err(Error::InvalidParameter(format!(
                "k_order must be at least 2, got {}",
                self.k_order
            )));
        }
        Ok(())
    }
}

fn start(cfg: &ChainConfig, dimension: usize) -> Result<Option<Vec<f64>>> {
    cfg.validate()?;
    if dimension == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    match &cfg.initial {
        InitialPoint::Point(x) if x.len() != dimension => Err(Error::LengthMismatch {
            left: x.len(),
            right: dimension,
        }),
        InitialPoint::Point(x) => Ok(Some(x.clone())),
        InitialPoint::RandomInSupport => Ok(None),
    }
}

fn run<F>(cfg: &ChainConfig, mut x: Vec<f64>, rng: &mut RngStream, mut sweep: F) -> Result<Trace>
where
    F: FnMut(&mut Vec<f64>, &mut RngStream) -> Result<()>,
{
    for _ in 0..cfg.burn_in {
        sweep(&mut x, rng)?;
    }
    let mut trace = Trace::with_capacity(cfg.n_samples);
    for _ in 0..cfg.n_samples {
        sweep(&mut x, rng)?;
        trace.record(&x, true, 1.0);
    }
    Ok(trace)
}

/// Gibbs sampling with Adler's overrelaxation for Gaussian conditionals.
///
/// `conditional(j, x)` returns the mean and standard deviation of coordinate
/// `j` given the rest, or `None` when that conditional is not Gaussian. Each
/// coordinate moves to `mu + alpha (x_j - mu) + sqrt(1 - alpha^2) sigma nu`
/// with `nu ~ N(0, 1)`, which leaves the conditional law invariant for any
/// `alpha` in `[-1, 1]`.
///
/// With [`InitialPoint::RandomInSupport`] the chain starts at the origin
/// followed by one unrecorded plain Gibbs sweep.
pub fn adler_gibbs<F>(
    mut conditional: F,
    dimension: usize,
    alpha: f64,
    cfg: &ChainConfig,
    rng: &mut RngStream,
) -> Result<Trace>
where
    F: FnMut(usize, &[f64]) -> Option<(f64, f64)>,
{
    OverrelaxConfig {
        alpha,
        k_order: DEFAULT_K_ORDER,
    }
    .validate()?;
    let noise = (1.0 - alpha * alpha).sqrt();
    let mut sweep_with = |x: &mut Vec<f64>, a: f64, c: f64, rng: &mut RngStream| -> Result<()> {
        for j in 0..dimension {
            let (mu, sigma) = conditional(j, x).ok_or(Error::NonGaussianConditional(j))?;
            let nu = rng.standard_normal();
            let v = mu + a * (x[j] - mu) + c * sigma * nu;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    value: v,
                    context: format!("Adler update of coordinate {j}"),
                });
            }
            x[j] = v;
        }
        Ok(())
    };
    let x0 = match start(cfg, dimension)? {
        Some(x) => x,
        None => {
            let mut x = vec![0.0; dimension];
            sweep_with(&mut x, 0.0, 1.0, rng)?;
            x
        }
    };
    run(cfg, x0, rng, |x, rng| sweep_with(x, alpha, noise, rng))
}

/// One ordered-overrelaxation update of a scalar.
///
/// Draws `K - 1` values from `sampler`, ranks `x_old` among all `K` values
/// (1-based, ties resolved towards the lowest rank), and returns the value
/// whose rank is `K + 1 - k`: the opposite order statistic.
pub fn ordered_overrelax_step<S>(mut sampler: S, x_old: f64, k_order: usize, rng: &mut RngStream) -> Result<f64>
where
    S: FnMut(&mut RngStream) -> f64,
{
    if k_order < 2 {
        return Err(Error::InvalidParameter(format!(
            "k_order must be at least 2, got {k_order}"
        )));
    }
    let mut values = Vec::with_capacity(k_order);
    for _ in 1..k_order {
        let v = sampler(rng);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                value: v,
                context: "ordered overrelaxation draw".into(),
            });
        }
        values.push(v);
    }
    let rank = 1 + values.iter().filter(|&&v| v < x_old).count();
    values.push(x_old);
    values.sort_by(f64::total_cmp);
    Ok(values[k_order - rank])
}

/// Gibbs sampling where every coordinate update is an [`ordered_overrelax_step`]
/// with candidates from `conditional(j, x, rng)`.
pub fn ordered_overrelax_gibbs<F>(
    mut conditional: F,
    dimension: usize,
    k_order: usize,
    cfg: &ChainConfig,
    rng: &mut RngStream,
) -> Result<Trace>
where
    F: FnMut(usize, &[f64], &mut RngStream) -> f64,
{
    OverrelaxConfig { alpha: 0.0, k_order }.validate()?;
    let x0 = match start(cfg, dimension)? {
        Some(x) => x,
        None => {
            let mut x = vec![0.0; dimension];
            for j in 0..dimension {
                x[j] = conditional(j, &x, rng);
            }
            x
        }
    };
    let mut scratch = x0.clone();
    run(cfg, x0, rng, |x, rng| {
        for j in 0..dimension {
            scratch.copy_from_slice(x);
            x[j] = ordered_overrelax_step(|r| conditional(j, &scratch, r), x[j], k_order, rng)?;
        }
        Ok(())
    })
}
