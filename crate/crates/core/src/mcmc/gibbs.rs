use serde::{Deserialize, Serialize};

use super::{run_chain, ChainConfig, InitialPoint, Step, Trace};
use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanOrder {
    /// Coordinates `0, 1, ..., d-1` in every sweep.
    #[default]
    Fixed,
    /// A fresh uniformly random permutation for every sweep.
    Random,
}

/// Gibbs sampling with a fixed coordinate sweep. See [`gibbs_with_scan`].
pub fn gibbs<F>(conditional: F, dimension: usize, cfg: &ChainConfig, rng: &mut RngStream) -> Result<Trace>
where
    F: FnMut(usize, &[f64], &mut RngStream) -> f64,
{
    gibbs_with_scan(conditional, dimension, cfg, ScanOrder::Fixed, rng)
}

/// Gibbs sampling from per-coordinate conditionals.
///
/// `conditional(j, x, rng)` draws coordinate `j` given the current values of
/// every other coordinate of `x`; each draw is written back before the next
/// coordinate is updated. Every sweep is one recorded iteration, with
/// acceptance probability 1.
///
/// With [`InitialPoint::RandomInSupport`] the chain starts from the origin
/// followed by one unrecorded sweep, since conditionals carry no support
/// information.
pub fn gibbs_with_scan<F>(
    mut conditional: F,
    dimension: usize,
    cfg: &ChainConfig,
    scan: ScanOrder,
    rng: &mut RngStream,
) -> Result<Trace>
where
    F: FnMut(usize, &[f64], &mut RngStream) -> f64,
{
    cfg.validate()?;
    if dimension == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let mut order: Vec<usize> = (0..dimension).collect();
    let mut sweep = |x: &mut Vec<f64>, rng: &mut RngStream| -> Result<Step> {
        if scan == ScanOrder::Random {
            for i in (1..dimension).rev() {
                order.swap(i, rng.index(i + 1));
            }
        }
        for &j in &order {
            let v = conditional(j, x, rng);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    value: v,
                    context: format!("conditional draw for coordinate {j} at {x:?}"),
                });
            }
            x[j] = v;
        }
        Ok(Step {
            accepted: true,
            probability: 1.0,
        })
    };
    let x0 = match &cfg.initial {
        InitialPoint::Point(x) if x.len() != dimension => {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: dimension,
            })
        }
        InitialPoint::Point(x) => x.clone(),
        InitialPoint::RandomInSupport => {
            let mut x = vec![0.0; dimension];
            sweep(&mut x, rng)?;
            x
        }
    };
    run_chain(cfg, x0, rng, sweep)
}

/// Positive weights on a rectangular grid of integer states, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridTarget {
    shape: Vec<usize>,
    weights: Vec<f64>,
}

impl GridTarget {
    pub fn new(shape: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::InvalidParameter(format!("bad grid shape {shape:?}")));
        }
        let size: usize = shape.iter().product();
        if size != weights.len() {
            return Err(Error::LengthMismatch {
                left: size,
                right: weights.len(),
            });
        }
        if let Some(&bad) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidParameter(format!("grid weight {bad} must be positive")));
        }
        Ok(Self { shape, weights })
    }

    /// Weights drawn log-uniformly from `[0.01, 100]`.
    pub fn random(shape: Vec<usize>, rng: &mut RngStream) -> Result<Self> {
        let size = shape.iter().product();
        let weights = (0..size).map(|_| 10f64.powf(rng.uniform_range(-2.0, 2.0))).collect();
        Self::new(shape, weights)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn state_count(&self) -> usize {
        self.weights.len()
    }

    fn offset(&self, state: &[usize]) -> Result<usize> {
        if state.len() != self.shape.len() {
            return Err(Error::LengthMismatch {
                left: state.len(),
                right: self.shape.len(),
            });
        }
        let mut off = 0;
        for (&s, &m) in state.iter().zip(&self.shape) {
            if s >= m {
                return Err(Error::InvalidParameter(format!(
                    "state {state:?} outside grid {:?}",
                    self.shape
                )));
            }
            off = off * m + s;
        }
        Ok(off)
    }

    pub fn weight(&self, state: &[usize]) -> Result<f64> {
        Ok(self.weights[self.offset(state)?])
    }

    /// Every state in row-major order.
    pub fn states(&self) -> Vec<Vec<usize>> {
        (0..self.state_count())
            .map(|mut off| {
                let mut s = vec![0; self.shape.len()];
                for (slot, &m) in s.iter_mut().zip(&self.shape).rev() {
                    *slot = off % m;
                    off /= m;
                }
                s
            })
            .collect()
    }
}

/// Single-coordinate proposals on a [`GridTarget`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CoordinateProposal {
    /// Draw the coordinate from its full conditional `P*(x_j | x_rest)`.
    GibbsConditional,
    /// Draw the coordinate uniformly from its range.
    Uniform,
}

/// Metropolis-Hastings acceptance probability of one single-coordinate proposal.
///
/// Each kernel is written as `Q(to; from) = a(to) / b` with `b` constant along
/// the coordinate line. The ratio is evaluated as
/// `(P*(x') a(x) / b) / (P*(x) a(x') / b)`. For the Gibbs kernel `a = P*`, so
/// numerator and denominator are the same product and the result is exactly 1.
pub fn coordinate_proposal_acceptance(
    target: &GridTarget,
    point: &[usize],
    coordinate: usize,
    proposal: CoordinateProposal,
    rng: &mut RngStream,
) -> Result<f64> {
    let w_old = target.weight(point)?;
    let m = *target
        .shape
        .get(coordinate)
        .ok_or_else(|| Error::InvalidParameter(format!("coordinate {coordinate} out of range")))?;
    let line: Vec<f64> = (0..m)
        .map(|v| {
            let mut s = point.to_vec();
            s[coordinate] = v;
            target.weight(&s)
        })
        .collect::<Result<_>>()?;
    let (a, b): (Vec<f64>, f64) = match proposal {
        CoordinateProposal::GibbsConditional => (line.clone(), line.iter().sum()),
        CoordinateProposal::Uniform => (vec![1.0; m], m as f64),
    };
    let u = rng.uniform() * b;
    let mut acc = 0.0;
    let mut v_new = m - 1;
    for (v, &av) in a.iter().enumerate() {
        acc += av;
        if u < acc {
            v_new = v;
            break;
        }
    }
    let w_new = line[v_new];
    let a_old = a[point[coordinate]];
    let a_new = a[v_new];
    let num = w_new * a_old / b;
    let den = w_old * a_new / b;
    Ok((num / den).min(1.0))
}

/// Acceptance probability of a Gibbs coordinate update viewed as a
/// Metropolis-Hastings proposal; always exactly 1.
pub fn gibbs_mh_acceptance_check(
    target: &GridTarget,
    point: &[usize],
    coordinate: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    coordinate_proposal_acceptance(target, point, coordinate, CoordinateProposal::GibbsConditional, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{correlation, mean};

    fn bivariate(rho: f64) -> impl FnMut(usize, &[f64], &mut RngStream) -> f64 {
        move |j, x, rng| rho * x[1 - j] + (1.0 - rho * rho).sqrt() * rng.standard_normal()
    }

    #[test]
    fn one_dimension_is_iid() {
        let cfg = ChainConfig::new(1000).burn_in(0).starting_at(vec![0.0]);
        let t = gibbs(|_, _, rng| rng.uniform(), 1, &cfg, &mut RngStream::new(1)).unwrap();
        let mut r = RngStream::new(1);
        let direct: Vec<f64> = (0..1000).map(|_| r.uniform()).collect();
        assert_eq!(t.coordinate(0), direct);
    }

    #[test]
    fn bivariate_normal_correlation() {
        let cfg = ChainConfig::new(100_000).starting_at(vec![0.0, 0.0]);
        let t = gibbs(bivariate(0.9), 2, &cfg, &mut RngStream::new(2)).unwrap();
        let r = correlation(&t.coordinate(0), &t.coordinate(1)).unwrap();
        assert!((r - 0.9).abs() < 0.02, "{r}");
        assert_eq!(t.acceptance_rate(), 1.0);
    }

    #[test]
    fn independent_coordinates() {
        let cfg = ChainConfig::new(100_000);
        for scan in [ScanOrder::Fixed, ScanOrder::Random] {
            let t = gibbs_with_scan(bivariate(0.0), 2, &cfg, scan, &mut RngStream::new(3)).unwrap();
            assert!(correlation(&t.coordinate(0), &t.coordinate(1)).unwrap().abs() < 0.01);
            assert!(mean(&t.coordinate(1)).unwrap().abs() < 0.02);
        }
    }

    #[test]
    fn non_finite_conditional_errors() {
        let cfg = ChainConfig::new(10);
        let err = gibbs(|_, _, _| f64::NAN, 2, &cfg, &mut RngStream::new(4)).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
        assert!(gibbs(|_, _, _| 0.0, 0, &cfg, &mut RngStream::new(4)).is_err());
    }

    #[test]
    fn grid_states_roundtrip() {
        let g = GridTarget::random(vec![2, 3], &mut RngStream::new(5)).unwrap();
        let states = g.states();
        assert_eq!(states.len(), 6);
        assert_eq!(states[4], vec![1, 1]);
        assert_eq!(g.offset(&states[4]).unwrap(), 4);
        assert!(g.weight(&[2, 0]).is_err());
    }

    #[test]
    fn gibbs_proposals_always_accepted() {
        let mut rng = RngStream::new(6);
        let two = GridTarget::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        for s in two.states() {
            for j in 0..2 {
                assert_eq!(gibbs_mh_acceptance_check(&two, &s, j, &mut rng).unwrap(), 1.0);
            }
        }
        for _ in 0..100 {
            let g = GridTarget::random(vec![3, 3], &mut rng).unwrap();
            let s = vec![rng.index(3), rng.index(3)];
            let j = rng.index(2);
            assert_eq!(gibbs_mh_acceptance_check(&g, &s, j, &mut rng).unwrap(), 1.0);
        }
    }

    #[test]
    fn uniform_coordinate_proposal_is_not_always_accepted() {
        let mut rng = RngStream::new(7);
        let g = GridTarget::new(vec![3, 3], (1..=9).map(f64::from).collect()).unwrap();
        let below_one = (0..200).any(|_| {
            let s = vec![rng.index(3), rng.index(3)];
            coordinate_proposal_acceptance(&g, &s, 1, CoordinateProposal::Uniform, &mut rng).unwrap() < 1.0
        });
        assert!(below_one);
    }
}
