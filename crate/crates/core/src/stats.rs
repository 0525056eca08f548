//! Moments, estimator identities and the discrete PMFs used by the survey designs.
//!
//! Every reduction is a plain left-to-right sum so results are reproducible
//! bit for bit.

use serde::Serialize;
use statrs::function::{erf::erfc, gamma::ln_gamma};

use crate::error::{Error, Result};

/// Divisor used by [`variance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Divisor {
    /// `N - 1`.
    #[default]
    Unbiased,
    /// `N`.
    Biased,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance_biased: f64,
    /// `NaN` when `count == 1`.
    pub variance_unbiased: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MseDecomposition {
    pub mse: f64,
    pub variance: f64,
    pub bias: f64,
    /// `mse - variance - bias^2`; zero up to rounding.
    pub residual: f64,
}

pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

fn sum_sq_dev(values: &[f64], center: f64) -> f64 {
    values.iter().map(|x| (x - center) * (x - center)).sum()
}

pub fn variance(values: &[f64], divisor: Divisor) -> Result<f64> {
    let mu = mean(values)?;
    let n = values.len();
    match divisor {
        Divisor::Biased => Ok(sum_sq_dev(values, mu) / n as f64),
        Divisor::Unbiased if n < 2 => Err(Error::InsufficientData(
            "unbiased variance needs at least 2 values".into(),
        )),
        Divisor::Unbiased => Ok(sum_sq_dev(values, mu) / (n - 1) as f64),
    }
}

/// Biased variance through the second raw moment, `E(x^2) - mu^2`.
pub fn variance_from_second_moment(values: &[f64]) -> Result<f64> {
    let mu = mean(values)?;
    let second = values.iter().map(|x| x * x).sum::<f64>() / values.len() as f64;
    Ok(second - mu * mu)
}

pub fn moments(values: &[f64]) -> Result<MomentSummary> {
    let mu = mean(values)?;
    let n = values.len();
    let ss = sum_sq_dev(values, mu);
    Ok(MomentSummary {
        mean: mu,
        variance_biased: ss / n as f64,
        variance_unbiased: if n >= 2 { ss / (n - 1) as f64 } else { f64::NAN },
        count: n,
    })
}

/// Empirical MSE of `estimates` around `truth`, split into variance and bias.
pub fn mse_decomposition_check(estimates: &[f64], truth: f64) -> Result<MseDecomposition> {
    let mu = mean(estimates)?;
    let n = estimates.len() as f64;
    let mse = estimates.iter().map(|e| (e - truth) * (e - truth)).sum::<f64>() / n;
    let var = sum_sq_dev(estimates, mu) / n;
    let bias = mu - truth;
    Ok(MseDecomposition {
        mse,
        variance: var,
        bias,
        residual: mse - var - bias * bias,
    })
}

/// `E(ab) - E(a)E(b)` under the empirical measure.
pub fn covariance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let ma = mean(a)?;
    let mb = mean(b)?;
    let eab = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64;
    Ok(eab - ma * mb)
}

/// Pearson correlation under the empirical measure.
pub fn correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    let c = covariance(a, b)?;
    let va = variance(a, Divisor::Biased)?;
    let vb = variance(b, Divisor::Biased)?;
    Ok(c / (va * vb).sqrt())
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_log_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * z * z - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

/// Largest `N` for which binomial coefficients are computed exactly in integers.
pub const EXACT_CHOOSE_LIMIT: u64 = 60;

fn choose_exact(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `ln C(n, k)`; `-inf` outside `0 <= k <= n`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if n <= EXACT_CHOOSE_LIMIT {
        return (choose_exact(n, k) as f64).ln();
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `C(n, k)` as a float.
pub fn choose(n: u64, k: u64) -> f64 {
    if k > n {
        0.0
    } else if n <= EXACT_CHOOSE_LIMIT {
        choose_exact(n, k) as f64
    } else {
        ln_choose(n, k).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Pmf {
    Bernoulli {
        p: f64,
    },
    Binomial {
        trials: u64,
        p: f64,
    },
    /// `population` items of which `successes` are marked; `draws` taken without replacement.
    Hypergeometric {
        population: u64,
        successes: u64,
        draws: u64,
    },
}

impl Pmf {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            Pmf::Bernoulli { p } | Pmf::Binomial { p, .. } if !(0.0..=1.0).contains(&p) => {
                bad(format!("probability {p} outside [0, 1]"))
            }
            Pmf::Hypergeometric {
                population,
                successes,
                draws,
            } if successes > population || draws > population => bad(format!(
                "hypergeometric needs K <= N and n <= N (N={population}, K={successes}, n={draws})"
            )),
            _ => Ok(()),
        }
    }

    /// Inclusive support bounds.
    pub fn support(&self) -> (u64, u64) {
        match *self {
            Pmf::Bernoulli { .. } => (0, 1),
            Pmf::Binomial { trials, .. } => (0, trials),
            Pmf::Hypergeometric {
                population,
                successes,
                draws,
            } => ((draws + successes).saturating_sub(population), draws.min(successes)),
        }
    }

    /// Exact probability of `k`; zero outside the support.
    pub fn pmf(&self, k: i64) -> Result<f64> {
        self.validate()?;
        let (lo, hi) = self.support();
        if k < 0 || (k as u64) < lo || (k as u64) > hi {
            return Ok(0.0);
        }
        let k = k as u64;
        Ok(match *self {
            Pmf::Bernoulli { p } => {
                if k == 1 {
                    p
                } else {
                    1.0 - p
                }
            }
            Pmf::Binomial { trials, p } => {
                // 0^0 = 1 handles the p in {0, 1} edges
                if p == 0.0 || p == 1.0 {
                    let certain = if p == 0.0 { 0 } else { trials };
                    if k == certain {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    (ln_choose(trials, k) + k as f64 * p.ln() + (trials - k) as f64 * (1.0 - p).ln()).exp()
                }
            }
            Pmf::Hypergeometric {
                population,
                successes,
                draws,
            } => (ln_choose(successes, k) + ln_choose(population - successes, draws - k)
                - ln_choose(population, draws))
            .exp(),
        })
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Pmf::Bernoulli { p } => p,
            Pmf::Binomial { trials, p } => trials as f64 * p,
            Pmf::Hypergeometric {
                population,
                successes,
                draws,
            } => draws as f64 * successes as f64 / population as f64,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Pmf::Bernoulli { p } => p * (1.0 - p),
            Pmf::Binomial { trials, p } => trials as f64 * p * (1.0 - p),
            Pmf::Hypergeometric {
                population,
                successes,
                draws,
            } => {
                let (nn, kk, n) = (population as f64, successes as f64, draws as f64);
                if population < 2 {
                    0.0
                } else {
                    n * (kk / nn) * (1.0 - kk / nn) * (nn - n) / (nn - 1.0)
                }
            }
        }
    }
}
