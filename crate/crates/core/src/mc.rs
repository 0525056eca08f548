//! Memoryless Monte Carlo: inverse-CDF sampling, plain Monte Carlo averages,
//! self-normalized importance sampling and rejection sampling.

use std::fmt::Debug;

use serde::Serialize;

use crate::density::{Interval, ProposalSampler, TargetDensity};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Draws `q(u)` for `n` independent `u ~ U(0, 1)`.
pub fn inverse_cdf_sample(q: impl Fn(f64) -> f64, n: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    (0..n)
        .map(|_| {
            let u = rng.uniform_open();
            let x = q(u);
            if x.is_finite() {
                Ok(x)
            } else {
                Err(Error::NonFinite {
                    value: x,
                    context: format!("quantile at u = {u}"),
                })
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    /// Sample standard deviation over `sqrt(n)`; `NaN` for `n = 1`.
    pub std_error: f64,
    pub n: usize,
}

fn summarize(values: &[f64]) -> McEstimate {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std_error = if n > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
    } else {
        f64::NAN
    };
    McEstimate {
        value: mean,
        std_error,
        n,
    }
}

/// `(1/n) sum h(x_i)` over `n` draws from `sampler`.
pub fn mc_expectation<P, S, H>(h: H, mut sampler: S, n: usize, rng: &mut RngStream) -> Result<McEstimate>
where
    P: Debug,
    S: FnMut(&mut RngStream) -> P,
    H: Fn(&P) -> f64,
{
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let x = sampler(rng);
        let v = h(&x);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                value: v,
                context: format!("h at {x:?}"),
            });
        }
        values.push(v);
    }
    Ok(summarize(&values))
}

/// Fraction of `n` draws satisfying `predicate`.
pub fn mc_probability<P, S, F>(predicate: F, sampler: S, n: usize, rng: &mut RngStream) -> Result<McEstimate>
where
    P: Debug,
    S: FnMut(&mut RngStream) -> P,
    F: Fn(&P) -> bool,
{
    mc_expectation(|x| if predicate(x) { 1.0 } else { 0.0 }, sampler, n, rng)
}

/// `4 x` the fraction of points from `sampler` inside the quarter disc.
pub fn estimate_pi_with<S>(sampler: S, n: usize, rng: &mut RngStream) -> Result<f64>
where
    S: FnMut(&mut RngStream) -> (f64, f64),
{
    let frac = mc_probability(|&(x, y): &(f64, f64)| x * x + y * y <= 1.0, sampler, n, rng)?;
    Ok(4.0 * frac.value)
}

/// Monte Carlo estimate of pi from `n` uniform points in the unit square.
pub fn estimate_pi(n: usize, rng: &mut RngStream) -> Result<f64> {
    estimate_pi_with(|r| (r.uniform(), r.uniform()), n, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImportanceEstimate {
    pub value: f64,
    /// `(sum w)^2 / sum w^2`.
    pub effective_sample_size: f64,
    pub n: usize,
}

/// Self-normalized importance estimate of `E_f[h]` with `f = P*/Z`.
///
/// Weights `w_i = P*(x_i)/Q(x_i)` are formed in log space and shifted by their
/// maximum before exponentiation. The estimate is written as
/// `h_ref + sum w_i (h_i - h_ref) / sum w_i` with `h_ref` the value at the
/// heaviest point, so a constant `h` is returned exactly.
pub fn importance_estimate<T, Q, H>(
    target: &T,
    proposal: &Q,
    h: H,
    n: usize,
    rng: &mut RngStream,
) -> Result<ImportanceEstimate>
where
    T: TargetDensity + ?Sized,
    Q: ProposalSampler + ?Sized,
    H: Fn(&[f64]) -> f64,
{
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let mut log_w = Vec::with_capacity(n);
    let mut hs = Vec::with_capacity(n);
    for _ in 0..n {
        let x = proposal.sample(rng);
        let lw = target.log_p_star(&x) - proposal.log_q(&x);
        if lw == f64::INFINITY {
            return Err(Error::NonFinite {
                value: lw,
                context: format!("importance log-weight at {x:?}"),
            });
        }
        let hv = h(&x);
        if !hv.is_finite() {
            return Err(Error::NonFinite {
                value: hv,
                context: format!("h at {x:?}"),
            });
        }
        log_w.push(if lw.is_nan() { f64::NEG_INFINITY } else { lw });
        hs.push(hv);
    }
    let (ref_idx, max_lw) =
        log_w.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
        );
    if max_lw == f64::NEG_INFINITY {
        return Err(Error::ProposalTargetMismatch);
    }
    let weights: Vec<f64> = log_w.iter().map(|lw| (lw - max_lw).exp()).collect();
    let w_sum: f64 = weights.iter().sum();
    let w_sq: f64 = weights.iter().map(|w| w * w).sum();
    let h_ref = hs[ref_idx];
    let shift: f64 = weights.iter().zip(&hs).map(|(w, hv)| w * (hv - h_ref)).sum();
    Ok(ImportanceEstimate {
        value: h_ref + shift / w_sum,
        effective_sample_size: w_sum * w_sum / w_sq,
        n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectionOutput {
    pub samples: Vec<Vec<f64>>,
    pub proposals: u64,
    pub accepted: u64,
    pub acceptance_rate: f64,
}

/// Give up when fewer than this fraction of proposals are accepted...
pub const MIN_ACCEPTANCE_RATE: f64 = 1e-6;
/// ...after at least this many proposals.
pub const MIN_ACCEPTANCE_WINDOW: u64 = 10_000_000;

const GRID_POINTS: usize = 1000;

fn envelope_tolerance(log_p: f64) -> f64 {
    1e-12 * log_p.abs().max(1.0)
}

fn envelope_violation(point: &[f64], log_c: f64, log_q: f64, log_p: f64) -> Option<Error> {
    (log_p > log_c + log_q + envelope_tolerance(log_p)).then(|| Error::InvalidEnvelope {
        point: point.to_vec(),
        envelope: (log_c + log_q).exp(),
        density: log_p.exp(),
    })
}

/// Checks `c Q(x) >= P*(x)` on a uniform grid when the target is one-dimensional with bounded support.
fn check_envelope_grid<T, Q>(target: &T, proposal: &Q, log_c: f64) -> Result<()>
where
    T: TargetDensity + ?Sized,
    Q: ProposalSampler + ?Sized,
{
    if target.dimension() != 1 {
        return Ok(());
    }
    let Interval { lo, hi } = target.support()[0];
    if !(lo.is_finite() && hi.is_finite()) {
        return Ok(());
    }
    for i in 0..GRID_POINTS {
        let x = [lo + (i as f64 + 0.5) * (hi - lo) / GRID_POINTS as f64];
        if let Some(err) = envelope_violation(&x, log_c, proposal.log_q(&x), target.log_p_star(&x)) {
            return Err(err);
        }
    }
    Ok(())
}

/// Rejection sampling of `n` points from `P*/Z` with envelope `c Q`.
///
/// A proposal `x ~ Q` is accepted when `u < P*(x)` for `u ~ U(0, c Q(x))`.
/// The envelope is checked on a grid (one-dimensional bounded targets) and at
/// every proposal; a violation is an error.
pub fn rejection_sample<T, Q>(
    target: &T,
    proposal: &Q,
    c: f64,
    n: usize,
    rng: &mut RngStream,
) -> Result<RejectionOutput>
where
    T: TargetDensity + ?Sized,
    Q: ProposalSampler + ?Sized,
{
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let log_c = c.ln();
    check_envelope_grid(target, proposal, log_c)?;
    let mut samples = Vec::with_capacity(n);
    let mut proposals: u64 = 0;
    while samples.len() < n {
        let x = proposal.sample(rng);
        proposals += 1;
        let lq = proposal.log_q(&x);
        let lp = target.log_p_star(&x);
        if let Some(err) = envelope_violation(&x, log_c, lq, lp) {
            return Err(err);
        }
        // u ~ U(0, c Q(x)), accept iff u < P*(x)
        if rng.uniform().ln() + log_c + lq < lp {
            samples.push(x);
        }
        if proposals >= MIN_ACCEPTANCE_WINDOW && (samples.len() as f64) < MIN_ACCEPTANCE_RATE * proposals as f64 {
            return Err(Error::AcceptanceTooLow {
                accepted: samples.len() as u64,
                proposals,
            });
        }
    }
    let accepted = samples.len() as u64;
    Ok(RejectionOutput {
        samples,
        proposals,
        accepted,
        acceptance_rate: accepted as f64 / proposals as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationConfig {
    pub initial_c: f64,
    /// Multiplier applied to `c` after a detected violation.
    pub growth_factor: f64,
    /// Consecutive clean probes needed to accept `c`.
    pub probe_n: usize,
    pub ceiling: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            initial_c: 0.1,
            growth_factor: 1.5,
            probe_n: 10_000,
            ceiling: 1e12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibratedC {
    pub c: f64,
    pub restarts: usize,
    pub probes: u64,
}

/// Grows `c` until `probe_n` consecutive proposals satisfy `c Q(x) >= P*(x)`.
///
/// Each violation multiplies `c` by the growth factor and restarts the probe
/// run from scratch.
pub fn rejection_calibrate_c<T, Q>(
    target: &T,
    proposal: &Q,
    config: &CalibrationConfig,
    rng: &mut RngStream,
) -> Result<CalibratedC>
where
    T: TargetDensity + ?Sized,
    Q: ProposalSampler + ?Sized,
{
    if !(config.initial_c > 0.0) || !(config.growth_factor > 1.0) || config.probe_n == 0 {
        return Err(Error::InvalidParameter(
            "calibration needs initial_c > 0, growth_factor > 1 and probe_n >= 1".into(),
        ));
    }
    let mut c = config.initial_c;
    let mut restarts = 0;
    let mut probes: u64 = 0;
    'outer: loop {
        if c > config.ceiling {
            return Err(Error::NoDominatingC(config.ceiling));
        }
        let log_c = c.ln();
        for _ in 0..config.probe_n {
            let x = proposal.sample(rng);
            probes += 1;
            if envelope_violation(&x, log_c, proposal.log_q(&x), target.log_p_star(&x)).is_some() {
                c *= config.growth_factor;
                restarts += 1;
                continue 'outer;
            }
        }
        return Ok(CalibratedC { c, restarts, probes });
    }
}
