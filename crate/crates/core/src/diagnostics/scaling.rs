//! Mixing-time experiments.
//!
//! Mixing time is measured as an end-to-end first passage: starting in the
//! middle of a range of width `L`, count the work until the chain has visited
//! both end zones. For a random walk with step `delta` this grows like
//! `(L/delta)^2`; for Hamiltonian dynamics, which travel ballistically, it
//! grows like `L`. Each experiment fits `ln(cost)` against `ln(L/step)`.

use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use super::{linear_fit, LinearFit};
use crate::density::Density;
use crate::efficient::{leapfrog, refresh_momentum, HamiltonianState};
use crate::error::{Error, Result};
use crate::mcmc::{metropolis, ChainConfig, ProposalKernel};
use crate::rng::RngStream;

/// End zones are this fraction of the range at each side.
pub const HMC_ZONE_FRACTION: f64 = 0.1;

/// Chains are censored at this multiple of the predicted cost.
const CENSOR_FACTOR: f64 = 100.0;

/// Soft walls satisfy `eta sqrt(k) = WALL_STEP` so the leapfrog stays stable inside them.
const WALL_STEP: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub l: usize,
    /// Mean cost over uncensored chains; `NaN` when every chain was censored.
    pub mean_cost: f64,
    pub sd_cost: f64,
    pub chains: usize,
    pub censored: usize,
    /// Whether this range entered the fit.
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingExperiment {
    pub l_values: Vec<usize>,
    /// Random-walk step `delta` or leapfrog step size `eta`.
    pub step: f64,
    pub points: Vec<ScalingPoint>,
    /// `ln(mean_cost) = intercept + slope ln(L / step)` over valid points.
    pub fit: LinearFit,
}

fn validate_l_values(l_values: &[usize], chains: usize) -> Result<()> {
    if l_values.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 range values, got {}",
            l_values.len()
        )));
    }
    if l_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "range values must be strictly increasing".into(),
        ));
    }
    if chains == 0 {
        return Err(Error::InvalidParameter("chains_per_l must be at least 1".into()));
    }
    Ok(())
}

/// `Some(cost)` or `None` when censored.
type ChainOutcome = Option<f64>;

/// Runs every `(L, chain)` pair on its own pre-split stream, in parallel, and
/// collects results in `(L, chain)` order.
fn fan_out<F>(l_values: &[usize], chains: usize, rng: &mut RngStream, run: F) -> Result<Vec<Vec<ChainOutcome>>>
where
    F: Fn(usize, &mut RngStream) -> Result<ChainOutcome> + Sync,
{
    let child = rng.next_u64();
    let base = rng.split(child);
    let jobs: Vec<(usize, usize)> = (0..l_values.len())
        .flat_map(|li| (0..chains).map(move |c| (li, c)))
        .collect();
    let outcomes: Vec<Result<ChainOutcome>> = jobs
        .par_iter()
        .map(|&(li, c)| {
            let mut stream = base.split(((li as u64) << 32) | c as u64);
            run(l_values[li], &mut stream)
        })
        .collect();
    let mut grouped = vec![Vec::with_capacity(chains); l_values.len()];
    for ((li, _), out) in jobs.into_iter().zip(outcomes) {
        grouped[li].push(out?);
    }
    Ok(grouped)
}

fn summarize(l: usize, outcomes: &[ChainOutcome], admissible: bool) -> ScalingPoint {
    let costs: Vec<f64> = outcomes.iter().flatten().copied().collect();
    let censored = outcomes.len() - costs.len();
    let (mean_cost, sd_cost) = if costs.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let m = costs.iter().sum::<f64>() / costs.len() as f64;
        let var = if costs.len() > 1 {
            costs.iter().map(|c| (c - m) * (c - m)).sum::<f64>() / (costs.len() - 1) as f64
        } else {
            0.0
        };
        (m, var.sqrt())
    };
    ScalingPoint {
        l,
        mean_cost,
        sd_cost,
        chains: outcomes.len(),
        censored,
        valid: admissible && !costs.is_empty(),
    }
}

fn fit_points(points: &[ScalingPoint], step: f64) -> Result<LinearFit> {
    let valid: Vec<&ScalingPoint> = points.iter().filter(|p| p.valid).collect();
    if valid.len() < 3 {
        return Err(Error::FitRefused(valid.len()));
    }
    let xs: Vec<f64> = valid.iter().map(|p| (p.l as f64 / step).ln()).collect();
    let ys: Vec<f64> = valid.iter().map(|p| p.mean_cost.ln()).collect();
    linear_fit(&xs, &ys)
}

/// Proposals until a `+-delta` Metropolis walk on the uniform target over
/// `{1, ..., L}` has visited both end zones, starting from the middle.
///
/// Each zone covers `max(delta, 0.1 (L - 1))` at its end of the range.
fn random_walk_cover(l: usize, delta: usize, rng: &mut RngStream) -> ChainOutcome {
    let (lf, df) = (l as f64, delta as f64);
    let zone = df.max(0.1 * (lf - 1.0));
    let cap = (CENSOR_FACTOR * (lf / df).powi(2)).ceil() as u64;
    let mut x = l.div_ceil(2);
    let (mut low, mut high) = (false, false);
    for t in 1..=cap {
        let candidate = if rng.uniform() < 0.5 {
            x.checked_sub(delta)
        } else {
            Some(x + delta)
        };
        // uniform target: in-range proposals are always accepted
        if let Some(c) = candidate.filter(|&c| (1..=l).contains(&c)) {
            x = c;
        }
        low |= x as f64 <= 1.0 + zone;
        high |= x as f64 >= lf - zone;
        if low && high {
            return Some(t as f64);
        }
    }
    None
}

/// Random-walk Metropolis cover times over the ranges in `l_values`.
pub fn random_walk_scaling(
    l_values: &[usize],
    delta: usize,
    chains_per_l: usize,
    rng: &mut RngStream,
) -> Result<ScalingExperiment> {
    validate_l_values(l_values, chains_per_l)?;
    if delta == 0 {
        return Err(Error::InvalidParameter("delta must be at least 1".into()));
    }
    if let Some(&l) = l_values.iter().find(|&&l| l < 10 * delta) {
        return Err(Error::InvalidParameter(format!(
            "L = {l} must be at least 10 delta = {}",
            10 * delta
        )));
    }
    let grouped = fan_out(l_values, chains_per_l, rng, |l, r| Ok(random_walk_cover(l, delta, r)))?;
    let points: Vec<ScalingPoint> = l_values
        .iter()
        .zip(&grouped)
        .map(|(&l, out)| summarize(l, out, true))
        .collect();
    let fit = fit_points(&points, delta as f64)?;
    Ok(ScalingExperiment {
        l_values: l_values.to_vec(),
        step: delta as f64,
        points,
        fit,
    })
}

/// Width of each soft wall: three standard deviations of the wall's Gaussian profile.
fn wall_width(eta: f64) -> f64 {
    3.0 * eta / WALL_STEP
}

/// Leapfrog steps until HMC on a flat well of width `L` has visited both end zones.
fn hmc_cover(l: usize, eta: f64, rng: &mut RngStream) -> Result<ChainOutcome> {
    let lf = l as f64;
    let stiffness = (WALL_STEP / eta).powi(2);
    let target = Density::SoftWell { width: lf, stiffness };
    let steps = (lf / eta).ceil() as usize;
    let max_iterations = CENSOR_FACTOR as usize;
    let mut x = vec![lf / 2.0];
    let (mut low, mut high) = (false, false);
    for i in 1..=max_iterations {
        let start = HamiltonianState::new(&target, x.clone(), refresh_momentum(1, rng));
        let end = leapfrog(&start, eta, steps, &target)?;
        let dh = end.hamiltonian() - start.hamiltonian();
        if dh < 0.0 || rng.uniform() < (-dh).exp() {
            x = end.position;
        }
        low |= x[0] <= HMC_ZONE_FRACTION * lf;
        high |= x[0] >= (1.0 - HMC_ZONE_FRACTION) * lf;
        if low && high {
            return Ok(Some((i * steps) as f64));
        }
    }
    Ok(None)
}

/// HMC cover times, in leapfrog steps, on soft-walled wells of width `L`.
///
/// Each trajectory has `ceil(L / eta)` steps, so its duration is about `L`
/// and a unit-speed particle crosses the well in one trajectory. Walls have
/// stiffness `(0.5/eta)^2`; ranges no wider than one wall are excluded from
/// the fit, and fewer than three usable ranges is an error.
pub fn hmc_scaling(
    l_values: &[usize],
    eta: f64,
    chains_per_l: usize,
    rng: &mut RngStream,
) -> Result<ScalingExperiment> {
    validate_l_values(l_values, chains_per_l)?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    let grouped = fan_out(l_values, chains_per_l, rng, |l, r| hmc_cover(l, eta, r))?;
    let points: Vec<ScalingPoint> = l_values
        .iter()
        .zip(&grouped)
        .map(|(&l, out)| summarize(l, out, l as f64 > wall_width(eta)))
        .collect();
    let fit = fit_points(&points, eta)?;
    Ok(ScalingExperiment {
        l_values: l_values.to_vec(),
        step: eta,
        points,
        fit,
    })
}

/// Uniform proposal on the ball of radius `delta` around the current point.
struct BallProposal {
    delta: f64,
}

impl ProposalKernel for BallProposal {
    fn propose(&self, from: &[f64], rng: &mut RngStream) -> Vec<f64> {
        let r = from.len();
        let dir: Vec<f64> = (0..r).map(|_| rng.standard_normal()).collect();
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        let radius = self.delta * rng.uniform().powf(1.0 / r as f64);
        from.iter().zip(&dir).map(|(x, d)| x + radius * d / norm).collect()
    }

    fn log_q(&self, _to: &[f64], _from: &[f64]) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeoffPoint {
    pub delta: f64,
    pub acceptance_rate: f64,
    /// Volume heuristic `min(1, (ell/delta)^r)`.
    pub predicted: f64,
}

/// Metropolis acceptance rates on an `r`-dimensional Gaussian with standard
/// deviation `ell`, for ball proposals of each radius in `delta_values`.
pub fn acceptance_tradeoff_probe(
    ell: f64,
    delta_values: &[f64],
    r: usize,
    iterations: usize,
    rng: &mut RngStream,
) -> Result<Vec<TradeoffPoint>> {
    if !(ell > 0.0 && ell.is_finite()) || r == 0 {
        return Err(Error::InvalidParameter(format!(
            "need ell > 0 and r >= 1, got ell = {ell}, r = {r}"
        )));
    }
    if let Some(&bad) = delta_values.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
        return Err(Error::InvalidParameter(format!("delta {bad} must be positive")));
    }
    let target = Density::Normal {
        mean: 0.0,
        sd: ell,
        dim: r,
    };
    let cfg = ChainConfig::new(iterations).starting_at(vec![0.0; r]);
    let child = rng.next_u64();
    let base = rng.split(child);
    delta_values
        .iter()
        .enumerate()
        .map(|(i, &delta)| {
            let trace = metropolis(&target, &BallProposal { delta }, &cfg, &mut base.split(i as u64))?;
            Ok(TradeoffPoint {
                delta,
                acceptance_rate: trace.acceptance_rate(),
                predicted: (ell / delta).powi(r as i32).min(1.0),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_walk_slope_near_two() {
        let exp = random_walk_scaling(&[10, 20, 40, 80], 1, 50, &mut RngStream::new(1)).unwrap();
        assert!((exp.fit.slope - 2.0).abs() <= 0.4, "{:?}", exp.fit);
        assert!(exp.points.iter().all(|p| p.censored == 0));
    }

    #[test]
    fn random_walk_predicted_magnitude() {
        let exp = random_walk_scaling(&[50, 100, 200], 1, 50, &mut RngStream::new(2)).unwrap();
        let t100 = exp.points[1].mean_cost;
        // (L/delta)^2 = 1e4, to within an order of magnitude
        assert!((1e3..=1e5).contains(&t100), "{t100}");
    }

    #[test]
    fn doubling_delta_quarters_cost() {
        let one = random_walk_scaling(&[40, 80, 160], 1, 200, &mut RngStream::new(3)).unwrap();
        let two = random_walk_scaling(&[40, 80, 160], 2, 200, &mut RngStream::new(3)).unwrap();
        let ratio = one.points[2].mean_cost / two.points[2].mean_cost;
        assert!((3.0..=5.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn hmc_slope_near_one() {
        let exp = hmc_scaling(&[10, 20, 40, 80], 0.5, 50, &mut RngStream::new(4)).unwrap();
        assert!((exp.fit.slope - 1.0).abs() <= 0.4, "{:?}", exp.fit);
    }

    #[test]
    fn halving_eta_doubles_hmc_cost() {
        let coarse = hmc_scaling(&[20, 40, 80], 0.5, 100, &mut RngStream::new(5)).unwrap();
        let fine = hmc_scaling(&[20, 40, 80], 0.25, 100, &mut RngStream::new(5)).unwrap();
        let ratio = fine.points[1].mean_cost / coarse.points[1].mean_cost;
        assert!((1.6..=2.6).contains(&ratio), "{ratio}");
    }

    #[test]
    fn narrow_wells_refuse_fit() {
        assert_eq!(
            hmc_scaling(&[1, 2, 3, 4], 0.5, 5, &mut RngStream::new(6)).unwrap_err(),
            Error::FitRefused(1)
        );
        assert!(random_walk_scaling(&[5, 20, 40], 1, 5, &mut RngStream::new(6)).is_err());
        assert!(random_walk_scaling(&[20, 10, 40], 1, 5, &mut RngStream::new(6)).is_err());
    }

    #[test]
    fn tradeoff_probe_shape() {
        let pts = acceptance_tradeoff_probe(1.0, &[0.01, 1.0, 3.0, 10.0], 2, 20_000, &mut RngStream::new(7)).unwrap();
        assert!(pts[0].acceptance_rate > 0.99);
        assert!((0.2..=0.8).contains(&pts[1].acceptance_rate), "{:?}", pts[1]);
        // for a ball proposal on a 2-D Gaussian the rate tends to 4 (ell/delta)^2,
        // four times the volume heuristic
        let far = pts[3].acceptance_rate;
        assert!((far / 0.04 - 1.0).abs() < 0.15, "{far}");
        assert!(far / pts[3].predicted < 10.0);
        assert!(pts.windows(2).all(|w| w[0].acceptance_rate > w[1].acceptance_rate));
    }
}
