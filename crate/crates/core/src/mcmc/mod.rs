//! Markov chain Monte Carlo: Metropolis, Metropolis-Hastings, Gibbs and slice
//! sampling, plus an exact check of detailed balance for discrete chains.
//!
//! All samplers share one convention: each post-burn-in iteration appends
//! exactly one point to the [`Trace`]. When a proposal is rejected the
//! current state is appended again, which is what makes the empirical law of
//! the trace converge to the target. [`Trace::accepted_only`] gives the
//! alternative view that keeps only the iterations whose proposal was
//! accepted.

mod balance;
mod gibbs;
mod kernel;
mod metropolis;
mod slice;

use serde::{Deserialize, Serialize};

pub use balance::{transition_matrix, verify_balance, BalanceReport, DiscreteChainSpec};
pub use gibbs::{
    coordinate_proposal_acceptance, gibbs, gibbs_mh_acceptance_check, gibbs_with_scan, CoordinateProposal, GridTarget,
    ScanOrder,
};
pub use kernel::{DiscreteKernel, GaussianStepProposal, IndependenceProposal, ProposalKernel};
pub use metropolis::{metropolis, metropolis_hastings};
pub use slice::{slice_sample, SliceConfig};

use crate::density::TargetDensity;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Iterations discarded before recording, unless configured otherwise.
pub const DEFAULT_BURN_IN: usize = 1000;

/// How many draws [`InitialPoint::RandomInSupport`] may take to find a point of positive density.
const MAX_INIT_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialPoint {
    Point(Vec<f64>),
    /// Uniform on bounded coordinates, shifted exponential on half-lines,
    /// standard normal on the real line; redrawn until `P* > 0`.
    RandomInSupport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_samples: usize,
    pub burn_in: usize,
    pub initial: InitialPoint,
}

impl ChainConfig {
    pub fn new(n_samples: usize) -> Self {
        Self {
            n_samples,
            burn_in: DEFAULT_BURN_IN,
            initial: InitialPoint::RandomInSupport,
        }
    }

    pub fn burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn starting_at(mut self, x0: Vec<f64>) -> Self {
        self.initial = InitialPoint::Point(x0);
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
        }
        if let InitialPoint::Point(x) = &self.initial {
            if let Some(&bad) = x.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    value: bad,
                    context: "initial point".into(),
                });
            }
        }
        Ok(())
    }

    /// Resolves the starting state for `target`, failing when it has zero density.
    pub(crate) fn initial_state<T: TargetDensity + ?Sized>(&self, target: &T, rng: &mut RngStream) -> Result<Vec<f64>> {
        match &self.initial {
            InitialPoint::Point(x) => {
                if x.len() != target.dimension() {
                    return Err(Error::LengthMismatch {
                        left: x.len(),
                        right: target.dimension(),
                    });
                }
                if target.log_p_star(x) == f64::NEG_INFINITY || target.log_p_star(x).is_nan() {
                    return Err(Error::InitialPointOutsideSupport(x.clone()));
                }
                Ok(x.clone())
            }
            InitialPoint::RandomInSupport => {
                let support = target.support();
                let mut last = Vec::new();
                for _ in 0..MAX_INIT_ATTEMPTS {
                    last = support
                        .iter()
                        .map(|iv| match (iv.lo.is_finite(), iv.hi.is_finite()) {
                            (true, true) => rng.uniform_range(iv.lo, iv.hi),
                            (true, false) => iv.lo - rng.uniform_open().ln(),
                            (false, true) => iv.hi + rng.uniform_open().ln(),
                            (false, false) => rng.standard_normal(),
                        })
                        .collect();
                    if target.log_p_star(&last) > f64::NEG_INFINITY {
                        return Ok(last);
                    }
                }
                Err(Error::InitialPointOutsideSupport(last))
            }
        }
    }
}

/// Recorded output of one chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    /// One point per post-burn-in iteration.
    pub samples: Vec<Vec<f64>>,
    /// Whether each recorded iteration's proposal was accepted.
    pub accepted: Vec<bool>,
    /// Acceptance probability `min(1, ratio)` of each recorded iteration.
    pub acceptance_probabilities: Vec<f64>,
    /// Proposals made during recorded iterations.
    pub proposals_total: u64,
    pub accepted_total: u64,
}

impl Trace {
    pub(crate) fn with_capacity(n: usize) -> Self {
        Self {
            samples: Vec::with_capacity(n),
            accepted: Vec::with_capacity(n),
            acceptance_probabilities: Vec::with_capacity(n),
            proposals_total: 0,
            accepted_total: 0,
        }
    }

    pub(crate) fn record(&mut self, x: &[f64], accepted: bool, probability: f64) {
        self.samples.push(x.to_vec());
        self.accepted.push(accepted);
        self.acceptance_probabilities.push(probability);
        self.proposals_total += 1;
        self.accepted_total += u64::from(accepted);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals_total == 0 {
            0.0
        } else {
            self.accepted_total as f64 / self.proposals_total as f64
        }
    }

    /// Values of coordinate `j` across the trace.
    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.samples.iter().map(|x| x[j]).collect()
    }

    /// Only the points produced by accepted proposals.
    pub fn accepted_only(&self) -> Vec<Vec<f64>> {
        self.samples
            .iter()
            .zip(&self.accepted)
            .filter(|(_, &a)| a)
            .map(|(x, _)| x.clone())
            .collect()
    }
}

/// Outcome of one transition.
pub(crate) struct Step {
    pub accepted: bool,
    pub probability: f64,
}

/// Runs `burn_in + n_samples` transitions from `x0`, recording the last `n_samples`.
pub(crate) fn run_chain<F>(cfg: &ChainConfig, mut x: Vec<f64>, rng: &mut RngStream, mut step: F) -> Result<Trace>
where
    F: FnMut(&mut Vec<f64>, &mut RngStream) -> Result<Step>,
{
    for _ in 0..cfg.burn_in {
        step(&mut x, rng)?;
    }
    let mut trace = Trace::with_capacity(cfg.n_samples);
    for _ in 0..cfg.n_samples {
        let s = step(&mut x, rng)?;
        trace.record(&x, s.accepted, s.probability);
    }
    Ok(trace)
}

/// `ln u < log_ratio` with one uniform consumed per call, whatever the ratio.
pub(crate) fn accept(log_ratio: f64, rng: &mut RngStream) -> Step {
    let u = rng.uniform();
    Step {
        accepted: u.ln() < log_ratio,
        probability: log_ratio.min(0.0).exp(),
    }
}
