use serde::{Deserialize, Serialize};

use crate::density::TargetDensity;
use crate::error::{Error, Result};
use crate::mcmc::{ChainConfig, Trace};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmcConfig {
    /// Leapfrog step size `eta`.
    pub step_size: f64,
    /// Leapfrog steps per trajectory `T`.
    pub leapfrog_steps: usize,
    pub chain: ChainConfig,
}

impl HmcConfig {
    pub fn new(step_size: f64, leapfrog_steps: usize, chain: ChainConfig) -> Result<Self> {
        let cfg = Self {
            step_size,
            leapfrog_steps,
            chain,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if self.leapfrog_steps == 0 {
            return Err(Error::InvalidParameter("leapfrog_steps must be at least 1".into()));
        }
        self.chain.validate()
    }
}

/// Phase-space point with its energies; `H = E(x) + p.p / 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HamiltonianState {
    pub position: Vec<f64>,
    pub momentum: Vec<f64>,
    pub energy: f64,
    pub kinetic: f64,
}

fn kinetic(p: &[f64]) -> f64 {
    p.iter().map(|v| v * v).sum::<f64>() / 2.0
}

impl HamiltonianState {
    pub fn new<T: TargetDensity + ?Sized>(target: &T, position: Vec<f64>, momentum: Vec<f64>) -> Self {
        let energy = target.energy(&position);
        let kinetic = kinetic(&momentum);
        Self {
            position,
            momentum,
            energy,
            kinetic,
        }
    }

    pub fn hamiltonian(&self) -> f64 {
        self.energy + self.kinetic
    }
}

/// Fresh momentum `p ~ N(0, I)`. Depends only on the dimension and the stream,
/// never on the position.
pub fn refresh_momentum(dimension: usize, rng: &mut RngStream) -> Vec<f64> {
    (0..dimension).map(|_| rng.standard_normal()).collect()
}

fn gradient<T: TargetDensity + ?Sized>(target: &T, x: &[f64], step: usize) -> Result<Vec<f64>> {
    let g = target.energy_gradient(x).ok_or_else(|| Error::IntegrationFailure {
        step,
        what: "target has no energy gradient".into(),
    })?;
    if let Some(bad) = g.iter().find(|v| !v.is_finite()) {
        return Err(Error::IntegrationFailure {
            step,
            what: format!("gradient component {bad} at {x:?}"),
        });
    }
    Ok(g)
}

/// `steps` leapfrog steps of size `eta`: half-step momentum, full-step
/// position, gradient refresh, half-step momentum.
pub fn leapfrog<T>(state: &HamiltonianState, eta: f64, steps: usize, target: &T) -> Result<HamiltonianState>
where
    T: TargetDensity + ?Sized,
{
    let mut x = state.position.clone();
    let mut p = state.momentum.clone();
    let mut g = gradient(target, &x, 0)?;
    for step in 1..=steps {
        for (pi, gi) in p.iter_mut().zip(&g) {
            *pi -= eta * gi / 2.0;
        }
        for (xi, pi) in x.iter_mut().zip(&p) {
            *xi += eta * pi;
        }
        g = gradient(target, &x, step)?;
        for (pi, gi) in p.iter_mut().zip(&g) {
            *pi -= eta * gi / 2.0;
        }
        if let Some(bad) = x.iter().chain(&p).find(|v| !v.is_finite()) {
            return Err(Error::IntegrationFailure {
                step,
                what: format!("phase-space coordinate became {bad}"),
            });
        }
    }
    let energy = target.energy(&x);
    if energy.is_nan() {
        return Err(Error::IntegrationFailure {
            step: steps,
            what: format!("energy is NaN at {x:?}"),
        });
    }
    Ok(HamiltonianState {
        kinetic: kinetic(&p),
        position: x,
        momentum: p,
        energy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HmcTrace {
    pub trace: Trace,
    /// `H(end) - H(start)` of each recorded trajectory.
    pub delta_h: Vec<f64>,
}

/// Hamiltonian Monte Carlo.
///
/// Each iteration draws `p ~ N(0, I)`, integrates with [`leapfrog`], and
/// accepts the end point when `Delta H < 0` or otherwise with probability
/// `exp(-Delta H)`. A rejected trajectory records the previous position again.
pub fn hmc<T>(target: &T, cfg: &HmcConfig, rng: &mut RngStream) -> Result<HmcTrace>
where
    T: TargetDensity + ?Sized,
{
    cfg.validate()?;
    let mut x = cfg.chain.initial_state(target, rng)?;
    let dim = x.len();
    let mut trace = Trace::with_capacity(cfg.chain.n_samples);
    let mut delta_h = Vec::with_capacity(cfg.chain.n_samples);
    for i in 0..cfg.chain.burn_in + cfg.chain.n_samples {
        let start = HamiltonianState::new(target, x.clone(), refresh_momentum(dim, rng));
        let end = leapfrog(&start, cfg.step_size, cfg.leapfrog_steps, target)?;
        let dh = end.hamiltonian() - start.hamiltonian();
        let (accepted, probability) = if dh < 0.0 {
            (true, 1.0)
        } else {
            let p = (-dh).exp();
            (rng.uniform() < p, p)
        };
        if accepted {
            x = end.position;
        }
        if i >= cfg.chain.burn_in {
            trace.record(&x, accepted, probability);
            delta_h.push(dh);
        }
    }
    Ok(HmcTrace { trace, delta_h })
}
