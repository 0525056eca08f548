use serde::Serialize;

use crate::density::ProposalSampler;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::stats::normal_log_pdf;

/// A Markov proposal `Q(to; from)`.
pub trait ProposalKernel: Send + Sync {
    fn propose(&self, from: &[f64], rng: &mut RngStream) -> Vec<f64>;
    /// `ln Q(to; from)`, up to a constant that does not depend on `from` or `to`.
    fn log_q(&self, to: &[f64], from: &[f64]) -> f64;
}

/// Random-walk step `x + N(0, sigma^2 I)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianStepProposal {
    pub sigma: f64,
}

impl Default for GaussianStepProposal {
    fn default() -> Self {
        Self { sigma: 2.38 }
    }
}

impl GaussianStepProposal {
    pub fn new(sigma: f64) -> Result<Self> {
        if sigma > 0.0 && sigma.is_finite() {
            Ok(Self { sigma })
        } else {
            Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")))
        }
    }
}

impl ProposalKernel for GaussianStepProposal {
    fn propose(&self, from: &[f64], rng: &mut RngStream) -> Vec<f64> {
        from.iter().map(|x| x + self.sigma * rng.standard_normal()).collect()
    }

    /// Depends on `to - from` only through its square, so it is exactly symmetric.
    fn log_q(&self, to: &[f64], from: &[f64]) -> f64 {
        to.iter()
            .zip(from)
            .map(|(t, f)| normal_log_pdf(*t, *f, self.sigma))
            .sum()
    }
}

/// Proposes from a fixed distribution, ignoring the current state.
#[derive(Debug, Clone)]
pub struct IndependenceProposal<Q>(pub Q);

impl<Q: ProposalSampler> ProposalKernel for IndependenceProposal<Q> {
    fn propose(&self, _from: &[f64], rng: &mut RngStream) -> Vec<f64> {
        self.0.sample(rng)
    }

    fn log_q(&self, to: &[f64], _from: &[f64]) -> f64 {
        self.0.log_q(to)
    }
}

/// Row-stochastic proposal matrix on the states `0..n`; row `u` is `Q(.; u)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteKernel {
    matrix: Vec<Vec<f64>>,
}

pub(crate) const ROW_SUM_TOLERANCE: f64 = 1e-12;

pub(crate) fn validate_stochastic(matrix: &[Vec<f64>]) -> Result<()> {
    let n = matrix.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    for (row, r) in matrix.iter().enumerate() {
        if r.len() != n {
            return Err(Error::LengthMismatch {
                left: r.len(),
                right: n,
            });
        }
        if let Some(&bad) = r.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParameter(format!("row {row} has entry {bad}")));
        }
        let sum: f64 = r.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::NonStochastic { row, sum });
        }
    }
    Ok(())
}

impl DiscreteKernel {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        validate_stochastic(&matrix)?;
        Ok(Self { matrix })
    }

    /// Always proposes the other state of a two-state chain.
    pub fn flip() -> Self {
        Self {
            matrix: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        }
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    fn state(&self, x: &[f64]) -> Option<usize> {
        let v = *x.first()?;
        (v >= 0.0 && v.fract() == 0.0 && (v as usize) < self.matrix.len()).then_some(v as usize)
    }
}

impl ProposalKernel for DiscreteKernel {
    fn propose(&self, from: &[f64], rng: &mut RngStream) -> Vec<f64> {
        let row = &self.matrix[self
            .state(from)
            .expect("current state outside the kernel's state space")];
        let u = rng.uniform();
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (j, &p) in row.iter().enumerate() {
            if p > 0.0 {
                last_positive = j;
                acc += p;
                if u < acc {
                    return vec![j as f64];
                }
            }
        }
        // rounding left u above the accumulated row sum
        vec![last_positive as f64]
    }

    fn log_q(&self, to: &[f64], from: &[f64]) -> f64 {
        match (self.state(to), self.state(from)) {
            (Some(t), Some(f)) => self.matrix[f][t].ln(),
            _ => f64::NEG_INFINITY,
        }
    }
}
