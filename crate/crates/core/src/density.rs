//! Unnormalized target densities, proposal distributions and quantile functions.
//!
//! Targets are specified by `log P*(x)`, the log of a density known only up to
//! its normalizing constant. `-inf` marks points outside the support. The
//! energy is `E(x) = -log P*(x)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::stats::{normal_cdf, normal_log_pdf};

/// Closed interval per dimension; bounds may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

pub trait TargetDensity: Send + Sync {
    fn dimension(&self) -> usize;

    /// `log P*(x)`; `-inf` outside the support.
    fn log_p_star(&self, x: &[f64]) -> f64;

    fn support(&self) -> Vec<Interval> {
        vec![Interval::REAL_LINE; self.dimension()]
    }

    /// `dE/dx` with `E = -log P*`, when available.
    fn energy_gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn energy(&self, x: &[f64]) -> f64 {
        -self.log_p_star(x)
    }

    fn in_support(&self, x: &[f64]) -> bool {
        x.len() == self.dimension() && self.support().iter().zip(x).all(|(s, &v)| s.contains(v))
    }
}

impl<T: TargetDensity + ?Sized> TargetDensity for &T {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn log_p_star(&self, x: &[f64]) -> f64 {
        (**self).log_p_star(x)
    }
    fn support(&self) -> Vec<Interval> {
        (**self).support()
    }
    fn energy_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        (**self).energy_gradient(x)
    }
}

/// `log P*` shifted by a constant, i.e. `P*` rescaled by `exp(shift)`.
#[derive(Debug, Clone)]
pub struct Shifted<T> {
    pub inner: T,
    pub shift: f64,
}

impl<T: TargetDensity> TargetDensity for Shifted<T> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }
    fn log_p_star(&self, x: &[f64]) -> f64 {
        self.inner.log_p_star(x) + self.shift
    }
    fn support(&self) -> Vec<Interval> {
        self.inner.support()
    }
    fn energy_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.inner.energy_gradient(x)
    }
}

type LogFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Target built from closures.
#[derive(Clone)]
pub struct FnDensity {
    dimension: usize,
    log_p: LogFn,
    gradient: Option<GradFn>,
    support: Vec<Interval>,
}

impl FnDensity {
    pub fn new(dimension: usize, log_p: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            dimension,
            log_p: Arc::new(log_p),
            gradient: None,
            support: vec![Interval::REAL_LINE; dimension],
        }
    }

    pub fn with_gradient(mut self, grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(grad));
        self
    }

    pub fn with_support(mut self, support: Vec<Interval>) -> Self {
        self.support = support;
        self
    }
}

impl fmt::Debug for FnDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnDensity")
            .field("dimension", &self.dimension)
            .field("has_gradient", &self.gradient.is_some())
            .finish()
    }
}

impl TargetDensity for FnDensity {
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn log_p_star(&self, x: &[f64]) -> f64 {
        if !self.in_support(x) {
            return f64::NEG_INFINITY;
        }
        (self.log_p)(x)
    }
    fn support(&self) -> Vec<Interval> {
        self.support.clone()
    }
    fn energy_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| g(x))
    }
}

/// Built-in targets, addressable by name from the command line.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Density {
    /// Isotropic Gaussian in `dim` dimensions.
    Normal {
        mean: f64,
        sd: f64,
        dim: usize,
    },
    /// Standard bivariate Gaussian with correlation `rho`.
    BivariateNormal {
        rho: f64,
    },
    /// `P*(x) = 2x` on `[0, 1]`.
    Triangular,
    /// `weight N(m1, s1^2) + (1 - weight) N(m2, s2^2)`.
    Mixture {
        weight: f64,
        m1: f64,
        s1: f64,
        m2: f64,
        s2: f64,
    },
    /// Weights on the integer states `0..weights.len()`.
    Discrete {
        weights: Vec<f64>,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    Exponential {
        rate: f64,
    },
    /// Flat on `[0, width]` with quadratic walls `stiffness d^2 / 2` outside.
    SoftWell {
        width: f64,
        stiffness: f64,
    },
}

/// Names accepted by [`Density::parse`].
pub const DENSITY_NAMES: &[&str] = &[
    "normal",
    "mvnormal",
    "bivariate-normal",
    "triangular",
    "mixture",
    "discrete",
    "uniform",
    "exponential",
    "soft-well",
];

fn parse_params(raw: Option<&str>) -> Result<Vec<f64>> {
    match raw {
        None | Some("") => Ok(vec![]),
        Some(s) => s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("cannot parse parameter `{p}`")))
            })
            .collect(),
    }
}

fn arity(name: &str, params: &[f64], allowed: &[usize]) -> Result<()> {
    if allowed.contains(&params.len()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "`{name}` takes {allowed:?} parameters, got {}",
            params.len()
        )))
    }
}

impl Density {
    pub fn standard_normal() -> Self {
        Density::Normal {
            mean: 0.0,
            sd: 1.0,
            dim: 1,
        }
    }

    /// Parses `name` or `name:p1,p2,...`.
    ///
    /// | name | parameters | default |
    /// |---|---|---|
    /// | `normal` | `mean,sd` | `0,1` |
    /// | `mvnormal` | `dim[,sd]` | - |
    /// | `bivariate-normal` | `rho` | - |
    /// | `triangular` | - | - |
    /// | `mixture` | `weight,m1,s1,m2,s2` | `0.5,-3,1,3,1` |
    /// | `discrete` | `w0,w1,...` | - |
    /// | `uniform` | `lo,hi` | `0,1` |
    /// | `exponential` | `rate` | `1` |
    /// | `soft-well` | `width[,stiffness]` | stiffness `100` |
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, raw) = match spec.split_once(':') {
            Some((n, r)) => (n.trim(), Some(r)),
            None => (spec.trim(), None),
        };
        let p = parse_params(raw)?;
        let d = match name {
            "normal" => {
                arity(name, &p, &[0, 2])?;
                if p.is_empty() {
                    Density::standard_normal()
                } else {
                    Density::Normal {
                        mean: p[0],
                        sd: p[1],
                        dim: 1,
                    }
                }
            }
            "mvnormal" => {
                arity(name, &p, &[1, 2])?;
                if p[0] < 1.0 || p[0].fract() != 0.0 {
                    return Err(Error::InvalidParameter(
                        "mvnormal dim must be a positive integer".into(),
                    ));
                }
                Density::Normal {
                    mean: 0.0,
                    sd: p.get(1).copied().unwrap_or(1.0),
                    dim: p[0] as usize,
                }
            }
            "bivariate-normal" => {
                arity(name, &p, &[1])?;
                Density::BivariateNormal { rho: p[0] }
            }
            "triangular" => {
                arity(name, &p, &[0])?;
                Density::Triangular
            }
            "mixture" => {
                arity(name, &p, &[0, 5])?;
                if p.is_empty() {
                    Density::Mixture {
                        weight: 0.5,
                        m1: -3.0,
                        s1: 1.0,
                        m2: 3.0,
                        s2: 1.0,
                    }
                } else {
                    Density::Mixture {
                        weight: p[0],
                        m1: p[1],
                        s1: p[2],
                        m2: p[3],
                        s2: p[4],
                    }
                }
            }
            "discrete" => Density::Discrete { weights: p },
            "uniform" => {
                arity(name, &p, &[0, 2])?;
                let (lo, hi) = if p.is_empty() { (0.0, 1.0) } else { (p[0], p[1]) };
                Density::Uniform { lo, hi }
            }
            "exponential" => {
                arity(name, &p, &[0, 1])?;
                Density::Exponential {
                    rate: p.first().copied().unwrap_or(1.0),
                }
            }
            "soft-well" => {
                arity(name, &p, &[1, 2])?;
                Density::SoftWell {
                    width: p[0],
                    stiffness: p.get(1).copied().unwrap_or(100.0),
                }
            }
            _ => {
                return Err(Error::UnknownDensity {
                    name: name.to_string(),
                    valid: DENSITY_NAMES.join(", "),
                })
            }
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        match self {
            Density::Normal { sd, dim, .. } if !(*sd > 0.0) || *dim == 0 => bad("normal needs sd > 0 and dim >= 1"),
            Density::BivariateNormal { rho } if !(rho.abs() < 1.0) => bad("bivariate-normal needs |rho| < 1"),
            Density::Mixture { weight, s1, s2, .. }
                if !(0.0..=1.0).contains(weight) || !(*s1 > 0.0) || !(*s2 > 0.0) =>
            {
                bad("mixture needs weight in [0,1] and positive sds")
            }
            Density::Discrete { weights } if weights.is_empty() || weights.iter().any(|w| !(*w > 0.0)) => {
                bad("discrete needs one or more positive weights")
            }
            Density::Uniform { lo, hi } if !(lo < hi) => bad("uniform needs lo < hi"),
            Density::Exponential { rate } if !(*rate > 0.0) => bad("exponential needs rate > 0"),
            Density::SoftWell { width, stiffness } if !(*width > 0.0) || !(*stiffness > 0.0) => {
                bad("soft-well needs width > 0 and stiffness > 0")
            }
            _ => Ok(()),
        }
    }

    /// Normalized CDF for one-dimensional continuous targets.
    pub fn cdf(&self, x: f64) -> Option<f64> {
        match *self {
            Density::Normal { mean, sd, dim: 1 } => Some(normal_cdf((x - mean) / sd)),
            Density::Triangular => Some(x.clamp(0.0, 1.0).powi(2)),
            Density::Mixture { weight, m1, s1, m2, s2 } => {
                Some(weight * normal_cdf((x - m1) / s1) + (1.0 - weight) * normal_cdf((x - m2) / s2))
            }
            Density::Uniform { lo, hi } => Some(((x - lo) / (hi - lo)).clamp(0.0, 1.0)),
            Density::Exponential { rate } => Some(if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() }),
            _ => None,
        }
    }

    /// Mean and standard deviation of coordinate `j` given the others, for Gaussian targets.
    pub fn gaussian_conditional(&self, j: usize, x: &[f64]) -> Option<(f64, f64)> {
        match *self {
            Density::Normal { mean, sd, dim } if j < dim => Some((mean, sd)),
            Density::BivariateNormal { rho } if j < 2 => Some((rho * x[1 - j], (1.0 - rho * rho).sqrt())),
            _ => None,
        }
    }

    /// Mean and covariance diagonal for targets with known second moments.
    pub fn moments(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match *self {
            Density::Normal { mean, sd, dim } => Some((vec![mean; dim], vec![sd * sd; dim])),
            Density::BivariateNormal { .. } => Some((vec![0.0; 2], vec![1.0; 2])),
            Density::Triangular => Some((vec![2.0 / 3.0], vec![1.0 / 18.0])),
            Density::Mixture { weight, m1, s1, m2, s2 } => {
                let m = weight * m1 + (1.0 - weight) * m2;
                let second = weight * (s1 * s1 + m1 * m1) + (1.0 - weight) * (s2 * s2 + m2 * m2);
                Some((vec![m], vec![second - m * m]))
            }
            Density::Uniform { lo, hi } => Some((vec![(lo + hi) / 2.0], vec![(hi - lo).powi(2) / 12.0])),
            Density::Exponential { rate } => Some((vec![1.0 / rate], vec![1.0 / (rate * rate)])),
            _ => None,
        }
    }
}

fn log_sum_exp2(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

impl TargetDensity for Density {
    fn dimension(&self) -> usize {
        match self {
            Density::Normal { dim, .. } => *dim,
            Density::BivariateNormal { .. } => 2,
            _ => 1,
        }
    }

    fn log_p_star(&self, x: &[f64]) -> f64 {
        if x.len() != self.dimension() || x.iter().any(|v| v.is_nan()) {
            return f64::NEG_INFINITY;
        }
        match *self {
            Density::Normal { mean, sd, .. } => {
                -x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (2.0 * sd * sd)
            }
            Density::BivariateNormal { rho } => {
                let (a, b) = (x[0], x[1]);
                -(a * a - 2.0 * rho * a * b + b * b) / (2.0 * (1.0 - rho * rho))
            }
            Density::Triangular => {
                if (0.0..=1.0).contains(&x[0]) {
                    (2.0 * x[0]).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Density::Mixture { weight, m1, s1, m2, s2 } => log_sum_exp2(
                weight.ln() + normal_log_pdf(x[0], m1, s1),
                (1.0 - weight).ln() + normal_log_pdf(x[0], m2, s2),
            ),
            Density::Discrete { ref weights } => {
                let v = x[0];
                if v.fract() == 0.0 && v >= 0.0 && (v as usize) < weights.len() {
                    weights[v as usize].ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Density::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x[0]) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Density::Exponential { rate } => {
                if x[0] >= 0.0 {
                    -rate * x[0]
                } else {
                    f64::NEG_INFINITY
                }
            }
            Density::SoftWell { width, stiffness } => {
                let d = if x[0] < 0.0 {
                    -x[0]
                } else if x[0] > width {
                    x[0] - width
                } else {
                    0.0
                };
                -0.5 * stiffness * d * d
            }
        }
    }

    fn support(&self) -> Vec<Interval> {
        match *self {
            Density::Triangular => vec![Interval::new(0.0, 1.0)],
            Density::Uniform { lo, hi } => vec![Interval::new(lo, hi)],
            Density::Exponential { .. } => vec![Interval::new(0.0, f64::INFINITY)],
            Density::Discrete { ref weights } => vec![Interval::new(0.0, (weights.len() - 1) as f64)],
            _ => vec![Interval::REAL_LINE; self.dimension()],
        }
    }

    fn energy_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        match *self {
            Density::Normal { mean, sd, .. } => Some(x.iter().map(|v| (v - mean) / (sd * sd)).collect()),
            Density::BivariateNormal { rho } => {
                let s = 1.0 - rho * rho;
                Some(vec![(x[0] - rho * x[1]) / s, (x[1] - rho * x[0]) / s])
            }
            Density::Triangular => Some(vec![-1.0 / x[0]]),
            Density::Mixture { weight, m1, s1, m2, s2 } => {
                let l1 = weight.ln() + normal_log_pdf(x[0], m1, s1);
                let l2 = (1.0 - weight).ln() + normal_log_pdf(x[0], m2, s2);
                let total = log_sum_exp2(l1, l2);
                let r1 = (l1 - total).exp();
                let r2 = (l2 - total).exp();
                Some(vec![r1 * (x[0] - m1) / (s1 * s1) + r2 * (x[0] - m2) / (s2 * s2)])
            }
            Density::Uniform { .. } => Some(vec![0.0]),
            Density::Exponential { rate } => Some(vec![rate]),
            Density::SoftWell { width, stiffness } => Some(vec![if x[0] < 0.0 {
                stiffness * x[0]
            } else if x[0] > width {
                stiffness * (x[0] - width)
            } else {
                0.0
            }]),
            Density::Discrete { .. } => None,
        }
    }
}

/// A normalized distribution that can be sampled and evaluated.
pub trait ProposalSampler: Send + Sync {
    fn dimension(&self) -> usize;
    fn sample(&self, rng: &mut RngStream) -> Vec<f64>;
    /// Normalized `log Q(x)`.
    fn log_q(&self, x: &[f64]) -> f64;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Proposal {
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Isotropic Gaussian.
    Normal {
        mean: f64,
        sd: f64,
        dim: usize,
    },
}

impl Proposal {
    /// Parses `uniform:lo,hi` or `normal:mean,sd` (defaults `0,1` for both).
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, raw) = match spec.split_once(':') {
            Some((n, r)) => (n.trim(), Some(r)),
            None => (spec.trim(), None),
        };
        let p = parse_params(raw)?;
        arity(name, &p, &[0, 2])?;
        let (a, b) = if p.is_empty() { (0.0, 1.0) } else { (p[0], p[1]) };
        let prop = match name {
            "uniform" => Proposal::Uniform { lo: a, hi: b },
            "normal" => Proposal::Normal { mean: a, sd: b, dim: 1 },
            _ => {
                return Err(Error::UnknownDensity {
                    name: name.to_string(),
                    valid: "uniform, normal".into(),
                })
            }
        };
        match prop {
            Proposal::Uniform { lo, hi } if !(lo < hi) => Err(Error::InvalidParameter("uniform needs lo < hi".into())),
            Proposal::Normal { sd, .. } if !(sd > 0.0) => Err(Error::InvalidParameter("normal needs sd > 0".into())),
            p => Ok(p),
        }
    }

    pub fn support(&self) -> Vec<Interval> {
        match *self {
            Proposal::Uniform { lo, hi } => vec![Interval::new(lo, hi)],
            Proposal::Normal { dim, .. } => vec![Interval::REAL_LINE; dim],
        }
    }
}

impl ProposalSampler for Proposal {
    fn dimension(&self) -> usize {
        match *self {
            Proposal::Uniform { .. } => 1,
            Proposal::Normal { dim, .. } => dim,
        }
    }

    fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        match *self {
            Proposal::Uniform { lo, hi } => vec![rng.uniform_range(lo, hi)],
            Proposal::Normal { mean, sd, dim } => (0..dim).map(|_| mean + sd * rng.standard_normal()).collect(),
        }
    }

    fn log_q(&self, x: &[f64]) -> f64 {
        match *self {
            Proposal::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x[0]) {
                    -(hi - lo).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Proposal::Normal { mean, sd, .. } => x.iter().map(|&v| normal_log_pdf(v, mean, sd)).sum(),
        }
    }
}

/// Closed-form quantile functions for inverse-CDF sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Quantile {
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
    Cauchy { location: f64, scale: f64 },
    Logistic { location: f64, scale: f64 },
}

impl Quantile {
    /// Parses `exponential[:rate]`, `uniform[:lo,hi]`, `cauchy[:loc,scale]`, `logistic[:loc,scale]`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, raw) = match spec.split_once(':') {
            Some((n, r)) => (n.trim(), Some(r)),
            None => (spec.trim(), None),
        };
        let p = parse_params(raw)?;
        let q = match name {
            "exponential" => {
                arity(name, &p, &[0, 1])?;
                Quantile::Exponential {
                    rate: p.first().copied().unwrap_or(1.0),
                }
            }
            "uniform" | "cauchy" | "logistic" => {
                arity(name, &p, &[0, 2])?;
                let (a, b) = if p.is_empty() { (0.0, 1.0) } else { (p[0], p[1]) };
                match name {
                    "uniform" => Quantile::Uniform { lo: a, hi: b },
                    "cauchy" => Quantile::Cauchy { location: a, scale: b },
                    _ => Quantile::Logistic { location: a, scale: b },
                }
            }
            _ => {
                return Err(Error::UnknownDensity {
                    name: name.to_string(),
                    valid: "exponential, uniform, cauchy, logistic".into(),
                })
            }
        };
        let ok = match q {
            Quantile::Exponential { rate } => rate > 0.0,
            Quantile::Uniform { lo, hi } => lo < hi,
            Quantile::Cauchy { scale, .. } | Quantile::Logistic { scale, .. } => scale > 0.0,
        };
        if ok {
            Ok(q)
        } else {
            Err(Error::InvalidParameter(format!("invalid parameters for `{name}`")))
        }
    }

    pub fn inverse_cdf(&self, u: f64) -> f64 {
        match *self {
            Quantile::Exponential { rate } => -(-u).ln_1p() / rate,
            Quantile::Uniform { lo, hi } => lo + (hi - lo) * u,
            Quantile::Cauchy { location, scale } => location + scale * (PI * (u - 0.5)).tan(),
            Quantile::Logistic { location, scale } => location + scale * (u / (1.0 - u)).ln(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Quantile::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Quantile::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Quantile::Cauchy { location, scale } => 0.5 + ((x - location) / scale).atan() / PI,
            Quantile::Logistic { location, scale } => 1.0 / (1.0 + (-(x - location) / scale).exp()),
        }
    }
}

/// Checks a quantile function is nondecreasing on an interior grid of `points` values.
pub fn check_quantile_monotone(q: impl Fn(f64) -> f64, points: usize) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for i in 1..=points {
        let u = i as f64 / (points + 1) as f64;
        let v = q(u);
        if v.is_nan() || v < prev {
            return Err(Error::InvalidParameter(format!(
                "quantile function decreases or is undefined at u = {u}"
            )));
        }
        prev = v;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite_difference(d: &dyn TargetDensity, x: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|j| {
                let h = 1e-6 * x[j].abs().max(1.0);
                let mut up = x.to_vec();
                let mut dn = x.to_vec();
                up[j] += h;
                dn[j] -= h;
                (d.energy(&up) - d.energy(&dn)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn gradients_match_finite_differences() {
        let cases: Vec<(Density, Vec<Vec<f64>>)> = vec![
            (Density::standard_normal(), vec![vec![0.3], vec![-1.7]]),
            (
                Density::Normal {
                    mean: 1.0,
                    sd: 2.0,
                    dim: 3,
                },
                vec![vec![0.1, -2.0, 4.0]],
            ),
            (
                Density::BivariateNormal { rho: 0.9 },
                vec![vec![0.4, -0.2], vec![1.5, 1.1]],
            ),
            (Density::Triangular, vec![vec![0.2], vec![0.8]]),
            (
                Density::parse("mixture").unwrap(),
                vec![vec![-2.5], vec![0.1], vec![3.3]],
            ),
            (Density::Exponential { rate: 2.0 }, vec![vec![0.7]]),
            (
                Density::SoftWell {
                    width: 5.0,
                    stiffness: 10.0,
                },
                vec![vec![-0.3], vec![2.0], vec![5.4]],
            ),
        ];
        for (d, points) in cases {
            for x in points {
                let g = d.energy_gradient(&x).unwrap();
                let fd = finite_difference(&d, &x);
                for (a, b) in g.iter().zip(&fd) {
                    assert!((a - b).abs() <= 1e-5 * b.abs().max(1.0), "{d:?} at {x:?}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn parse_registry() {
        assert_eq!(Density::parse("normal").unwrap(), Density::standard_normal());
        assert_eq!(
            Density::parse("bivariate-normal:0.9").unwrap(),
            Density::BivariateNormal { rho: 0.9 }
        );
        assert_eq!(
            Density::parse("discrete:1,3").unwrap(),
            Density::Discrete {
                weights: vec![1.0, 3.0]
            }
        );
        match Density::parse("gamma:2") {
            Err(Error::UnknownDensity { valid, .. }) => assert!(valid.contains("triangular")),
            other => panic!("{other:?}"),
        }
        assert!(Density::parse("bivariate-normal:1.0").is_err());
        assert!(Density::parse("normal:0").is_err());
        assert!(Density::parse("normal:0,x").is_err());
        assert_eq!(
            Proposal::parse("normal:0,2").unwrap(),
            Proposal::Normal {
                mean: 0.0,
                sd: 2.0,
                dim: 1
            }
        );
    }

    #[test]
    fn support_handling() {
        let t = Density::Triangular;
        assert_eq!(t.log_p_star(&[-0.1]), f64::NEG_INFINITY);
        assert_eq!(t.log_p_star(&[0.5]), 0.0);
        let d = Density::Discrete {
            weights: vec![1.0, 3.0],
        };
        assert_eq!(d.log_p_star(&[0.5]), f64::NEG_INFINITY);
        assert_eq!(d.log_p_star(&[1.0]), 3f64.ln());
        assert!(!d.in_support(&[2.0]));
    }

    #[test]
    fn proposal_densities_normalized() {
        // trapezoid rule over a wide window
        for p in [
            Proposal::Uniform { lo: -1.0, hi: 2.0 },
            Proposal::Normal {
                mean: 0.5,
                sd: 2.0,
                dim: 1,
            },
        ] {
            let (a, b, m) = (-20.0, 20.0, 400_000);
            let h = (b - a) / m as f64;
            let total: f64 = (0..m).map(|i| p.log_q(&[a + (i as f64 + 0.5) * h]).exp() * h).sum();
            assert!((total - 1.0).abs() < 1e-4, "{p:?}: {total}");
        }
    }

    #[test]
    fn quantiles() {
        let e = Quantile::Exponential { rate: 1.0 };
        assert!((e.inverse_cdf(0.5) - std::f64::consts::LN_2).abs() < 1e-15);
        for q in [
            e,
            Quantile::Cauchy {
                location: 0.0,
                scale: 1.0,
            },
            Quantile::Logistic {
                location: 1.0,
                scale: 2.0,
            },
        ] {
            check_quantile_monotone(|u| q.inverse_cdf(u), 1000).unwrap();
            for u in [0.1, 0.5, 0.9] {
                assert!((q.cdf(q.inverse_cdf(u)) - u).abs() < 1e-12);
            }
        }
        assert!(check_quantile_monotone(|u| -u, 10).is_err());
    }
}
