use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::kernel::validate_stochastic;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Largest chain handled by [`verify_balance`].
pub const MAX_STATES: usize = 1000;

/// A finite target with a proposal matrix, for exact checks of the Metropolis kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteChainSpec {
    target_weights: Vec<f64>,
    proposal: Vec<Vec<f64>>,
}

impl DiscreteChainSpec {
    pub fn new(target_weights: Vec<f64>, proposal: Vec<Vec<f64>>) -> Result<Self> {
        let n = target_weights.len();
        if !(2..=MAX_STATES).contains(&n) {
            return Err(Error::InvalidParameter(format!(
                "state count {n} must lie in [2, {MAX_STATES}]"
            )));
        }
        if let Some(&bad) = target_weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidParameter(format!("target weight {bad} must be positive")));
        }
        if proposal.len() != n {
            return Err(Error::LengthMismatch {
                left: proposal.len(),
                right: n,
            });
        }
        validate_stochastic(&proposal)?;
        Ok(Self {
            target_weights,
            proposal,
        })
    }

    /// Weights log-uniform on `[0.01, 100]` and a random symmetric proposal.
    ///
    /// The proposal is `(S + S^T) / 2` for a random row-stochastic `S`, which is
    /// symmetric and (being doubly stochastic) row-stochastic. `S` always
    /// contains a cycle through every state, so the chain is irreducible.
    pub fn random_symmetric(states: usize, rng: &mut RngStream) -> Result<Self> {
        let weights = (0..states).map(|_| 10f64.powf(rng.uniform_range(-2.0, 2.0))).collect();
        // a random doubly stochastic matrix: average of random permutation
        // matrices, the first a single cycle through all states so that the
        // proposal graph is connected
        let mut s = vec![vec![0.0; states]; states];
        let perms = states.max(2);
        for k in 0..perms {
            let mut order: Vec<usize> = (0..states).collect();
            for i in (1..states).rev() {
                order.swap(i, rng.index(i + 1));
            }
            let p: Vec<usize> = if k == 0 {
                let mut cycle = vec![0; states];
                for i in 0..states {
                    cycle[order[i]] = order[(i + 1) % states];
                }
                cycle
            } else {
                order
            };
            for (i, &j) in p.iter().enumerate() {
                s[i][j] += 1.0 / perms as f64;
            }
        }
        let proposal = (0..states)
            .map(|i| (0..states).map(|j| 0.5 * (s[i][j] + s[j][i])).collect())
            .collect();
        Self::new(weights, proposal)
    }

    pub fn state_count(&self) -> usize {
        self.target_weights.len()
    }

    pub fn target(&self) -> Vec<f64> {
        let z: f64 = self.target_weights.iter().sum();
        self.target_weights.iter().map(|w| w / z).collect()
    }
}

/// Exact transition matrix of the Metropolis-Hastings chain; row `u` is `A(.; u)`.
///
/// Off the diagonal `A(v; u) = Q(v; u) min(1, P*(v) Q(u; v) / (P*(u) Q(v; u)))`,
/// which for symmetric `Q` is the Metropolis form `Q(v; u) min(1, P*(v)/P*(u))`.
/// The diagonal holds the self-loop mass `1 - sum_{v != u} A(v; u)`, the
/// probability of staying put after a rejection or a self-proposal.
pub fn transition_matrix(spec: &DiscreteChainSpec) -> Vec<Vec<f64>> {
    let n = spec.state_count();
    let p = &spec.target_weights;
    let q = &spec.proposal;
    let mut a = vec![vec![0.0; n]; n];
    for u in 0..n {
        let mut off = 0.0;
        for v in (0..n).filter(|&v| v != u && q[u][v] > 0.0) {
            let ratio = (p[v] * q[v][u]) / (p[u] * q[u][v]);
            a[u][v] = q[u][v] * ratio.min(1.0);
            off += a[u][v];
        }
        // off <= sum_v Q(v; u) <= 1 exactly; only rounding can push this below 0
        a[u][u] = (1.0 - off).max(0.0);
    }
    a
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceReport {
    /// `max |pi_u A(v; u) - pi_v A(u; v)|` over all pairs, with `pi` the normalized target.
    pub max_balance_violation: f64,
    /// L1 distance between the normalized target and the solved stationary vector.
    pub stationary_gap: f64,
    pub stationary: Vec<f64>,
}

/// Builds the exact Metropolis kernel for `spec` and checks detailed balance and stationarity.
///
/// The stationary vector solves `pi A = pi`, `sum pi = 1` by LU decomposition.
pub fn verify_balance(spec: &DiscreteChainSpec) -> Result<BalanceReport> {
    let a = transition_matrix(spec);
    let pi = spec.target();
    let n = pi.len();
    let mut violation: f64 = 0.0;
    for u in 0..n {
        for v in u + 1..n {
            violation = violation.max((pi[u] * a[u][v] - pi[v] * a[v][u]).abs());
        }
    }
    // (A^T - I) pi = 0 with the last equation replaced by sum pi = 1
    let mut m = DMatrix::from_fn(n, n, |i, j| a[j][i] - if i == j { 1.0 } else { 0.0 });
    m.row_mut(n - 1).fill(1.0);
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let stationary = m.lu().solve(&rhs).ok_or_else(|| {
        Error::InvalidParameter("transition matrix has no unique stationary vector (reducible chain)".into())
    })?;
    let stationary: Vec<f64> = stationary.iter().copied().collect();
    let gap = stationary.iter().zip(&pi).map(|(s, t)| (s - t).abs()).sum();
    Ok(BalanceReport {
        max_balance_violation: violation,
        stationary_gap: gap,
        stationary,
    })
}
