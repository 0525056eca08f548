use super::{accept, run_chain, ChainConfig, ProposalKernel, Step, Trace};
use crate::density::TargetDensity;
use crate::error::{Error, Result};
use crate::rng::RngStream;

fn log_density<T: TargetDensity + ?Sized>(target: &T, x: &[f64]) -> Result<f64> {
    let lp = target.log_p_star(x);
    if lp.is_nan() || lp == f64::INFINITY {
        return Err(Error::NonFinite {
            value: lp,
            context: format!("log P* at {x:?}"),
        });
    }
    Ok(lp)
}

/// Metropolis sampling with a symmetric `kernel`.
///
/// The proposal is accepted when `ln u < ln P*(x') - ln P*(x)`; only
/// differences of `ln P*` enter, so the normalizing constant is never needed.
/// The kernel's `log_q` is not consulted: symmetry is the caller's promise.
pub fn metropolis<T, K>(target: &T, kernel: &K, cfg: &ChainConfig, rng: &mut RngStream) -> Result<Trace>
where
    T: TargetDensity + ?Sized,
    K: ProposalKernel + ?Sized,
{
    cfg.validate()?;
    let x0 = cfg.initial_state(target, rng)?;
    let mut lp = log_density(target, &x0)?;
    run_chain(cfg, x0, rng, |x, rng| {
        let candidate = kernel.propose(x, rng);
        let lp_new = log_density(target, &candidate)?;
        let step = accept(lp_new - lp, rng);
        if step.accepted {
            *x = candidate;
            lp = lp_new;
        }
        Ok(step)
    })
}

/// Metropolis-Hastings with a possibly asymmetric `kernel`.
///
/// The log acceptance ratio is `(ln P*(x') - ln P*(x)) + (ln Q(x; x') - ln Q(x'; x))`.
/// For a symmetric kernel the correction is exactly `0.0` and every decision
/// and probability coincides with [`metropolis`] on the same stream.
pub fn metropolis_hastings<T, K>(target: &T, kernel: &K, cfg: &ChainConfig, rng: &mut RngStream) -> Result<Trace>
where
    T: TargetDensity + ?Sized,
    K: ProposalKernel + ?Sized,
{
    cfg.validate()?;
    let x0 = cfg.initial_state(target, rng)?;
    let mut lp = log_density(target, &x0)?;
    run_chain(cfg, x0, rng, |x, rng| {
        let candidate = kernel.propose(x, rng);
        let lp_new = log_density(target, &candidate)?;
        let correction = kernel.log_q(x, &candidate) - kernel.log_q(&candidate, x);
        let log_ratio = (lp_new - lp) + correction;
        let step = if log_ratio.is_nan() {
            // both directions impossible under the kernel: treat as a rejection
            Step {
                accepted: false,
                probability: 0.0,
            }
        } else {
            accept(log_ratio, rng)
        };
        if step.accepted {
            *x = candidate;
            lp = lp_new;
        }
        Ok(step)
    })
}
