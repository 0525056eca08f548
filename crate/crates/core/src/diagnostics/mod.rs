//! Chain-quality metrics, goodness-of-fit tests and the mixing-time scaling experiments.

mod scaling;

use serde::Serialize;

pub use scaling::{
    acceptance_tradeoff_probe, hmc_scaling, random_walk_scaling, ScalingExperiment, ScalingPoint, TradeoffPoint,
    HMC_ZONE_FRACTION,
};

use crate::error::{Error, Result};
use crate::mcmc::Trace;

/// Autocorrelation level below which the chain is considered to have forgotten its past.
pub const MIXING_THRESHOLD: f64 = 0.05;

/// Fewest samples accepted by [`distribution_fit`].
pub const MIN_FIT_SAMPLES: usize = 100;

struct Centered {
    dev: Vec<f64>,
    c0: f64,
}

fn center(xs: &[f64]) -> Result<Centered> {
    if xs.len() < 2 {
        return Err(Error::InsufficientSamples {
            required: 2,
            got: xs.len(),
        });
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let dev: Vec<f64> = xs.iter().map(|x| x - m).collect();
    let c0 = dev.iter().map(|d| d * d).sum::<f64>();
    if c0 == 0.0 || !c0.is_finite() {
        return Err(Error::DegenerateTrace);
    }
    Ok(Centered { dev, c0 })
}

impl Centered {
    /// `sum_t d_t d_{t+k} / sum_t d_t^2`.
    fn rho(&self, k: usize) -> f64 {
        self.dev.iter().zip(&self.dev[k..]).map(|(a, b)| a * b).sum::<f64>() / self.c0
    }
}

/// Sample autocorrelations at lags `0..=max_lag`.
pub fn autocorrelation(xs: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if xs.len() <= max_lag {
        return Err(Error::InsufficientSamples {
            required: max_lag + 1,
            got: xs.len(),
        });
    }
    let c = center(xs)?;
    Ok((0..=max_lag).map(|k| c.rho(k)).collect())
}

/// Effective sample size `n / tau` with Geyer's initial positive sequence.
///
/// `tau = -1 + 2 sum_m (rho_{2m} + rho_{2m+1})`, summing pairs while they stay
/// positive, and floored at 1 so that the result never exceeds `n`.
pub fn effective_sample_size(xs: &[f64]) -> Result<f64> {
    let c = center(xs)?;
    let n = xs.len();
    let mut tau = -1.0;
    let mut m = 0;
    while 2 * m + 1 < n {
        let pair = c.rho(2 * m) + c.rho(2 * m + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        m += 1;
    }
    Ok(n as f64 / tau.max(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingReport {
    pub acceptance_rate: f64,
    /// Lags `0..=max_lag`; the first entry is 1.
    pub lag_autocorrelations: Vec<f64>,
    pub effective_sample_size: f64,
    /// First lag whose autocorrelation drops below [`MIXING_THRESHOLD`], if within `max_lag`.
    pub mixing_time_estimate: Option<usize>,
}

/// Mixing summary of coordinate `j` of `trace`.
pub fn mixing_report_coordinate(trace: &Trace, j: usize, max_lag: usize) -> Result<MixingReport> {
    if j >= trace.dimension() {
        return Err(Error::InvalidParameter(format!(
            "coordinate {j} out of range for a {}-dimensional trace",
            trace.dimension()
        )));
    }
    let xs = trace.coordinate(j);
    let lag_autocorrelations = autocorrelation(&xs, max_lag)?;
    let mixing_time_estimate = lag_autocorrelations.iter().position(|&r| r < MIXING_THRESHOLD);
    Ok(MixingReport {
        acceptance_rate: trace.acceptance_rate(),
        effective_sample_size: effective_sample_size(&xs)?,
        lag_autocorrelations,
        mixing_time_estimate,
    })
}

/// Mixing summary of the first coordinate of `trace`.
pub fn mixing_report(trace: &Trace, max_lag: usize) -> Result<MixingReport> {
    mixing_report_coordinate(trace, 0, max_lag)
}

/// Two-sided Kolmogorov-Smirnov distance between `samples` and `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    ks_sorted(&xs, &cdf)
}

fn ks_sorted(xs: &[f64], cdf: &impl Fn(f64) -> f64) -> f64 {
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub ks_statistic: f64,
    /// Asymptotic 1% critical value `1.63 / sqrt(n)`.
    pub critical_value: f64,
    pub passed: bool,
    pub n: usize,
}

const PROBE_GRID: usize = 1000;

/// KS test of `samples` against `reference_cdf` at the 1% level.
///
/// The CDF is first probed at the sorted samples and on a 1000-point grid
/// spanning them; a decrease or a value outside `[0, 1]` is an error.
pub fn distribution_fit(samples: &[f64], reference_cdf: impl Fn(f64) -> f64) -> Result<FitResult> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            required: MIN_FIT_SAMPLES,
            got: samples.len(),
        });
    }
    if let Some(&bad) = samples.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            value: bad,
            context: "sample passed to distribution_fit".into(),
        });
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let mut probes: Vec<f64> = (0..=PROBE_GRID)
        .map(|i| lo + (hi - lo) * i as f64 / PROBE_GRID as f64)
        .chain(xs.iter().copied())
        .collect();
    probes.sort_by(f64::total_cmp);
    let mut prev = f64::NEG_INFINITY;
    for &x in &probes {
        let f = reference_cdf(x);
        if !(0.0..=1.0).contains(&f) || f < prev - 1e-12 {
            return Err(Error::NonMonotoneCdf(x));
        }
        prev = prev.max(f);
    }
    let n = xs.len();
    let ks = ks_sorted(&xs, &reference_cdf);
    let critical_value = 1.63 / (n as f64).sqrt();
    Ok(FitResult {
        ks_statistic: ks,
        critical_value,
        passed: ks < critical_value,
        n,
    })
}

/// Thinning interval that keeps a KS test of a chain near its nominal level.
///
/// Uses the smaller of the effective sample sizes of `x` and `|x - mean|`:
/// on symmetric targets the sign of `x` can decorrelate at once while its
/// magnitude stays correlated. The interval is twice `n / ESS`, because the
/// ESS is calibrated for the variance of the mean and the KS statistic is
/// more sensitive to slow dependence; at one draw per effective sample the
/// 1% test rejects correct Metropolis and slice chains about 3% of the time.
pub fn fit_thinning(xs: &[f64]) -> Result<usize> {
    let ess = effective_sample_size(xs)?;
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let spread: Vec<f64> = xs.iter().map(|x| (x - m).abs()).collect();
    let ess = match effective_sample_size(&spread) {
        Ok(e) => ess.min(e),
        Err(Error::DegenerateTrace) => ess,
        Err(e) => return Err(e),
    };
    Ok((2.0 * xs.len() as f64 / ess).ceil() as usize)
}

/// [`distribution_fit`] of a Markov chain, thinned by [`fit_thinning`] first.
/// Returns the fit and the thinning interval used.
pub fn chain_distribution_fit(xs: &[f64], reference_cdf: impl Fn(f64) -> f64) -> Result<(FitResult, usize)> {
    let thin = fit_thinning(xs)?;
    let thinned: Vec<f64> = xs.iter().step_by(thin).copied().collect();
    Ok((distribution_fit(&thinned, reference_cdf)?, thin))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares `y = intercept + slope x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientSamples {
            required: 2,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter(
            "linear fit needs at least two distinct x values".into(),
        ));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r2,
    })
}
