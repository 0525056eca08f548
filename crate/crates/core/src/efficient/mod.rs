//! Samplers that suppress random-walk behaviour: Hamiltonian Monte Carlo and
//! Gibbs sampling with Adler's or ordered overrelaxation.

mod hmc;
mod overrelax;

pub use hmc::{hmc, leapfrog, refresh_momentum, HamiltonianState, HmcConfig, HmcTrace};
pub use overrelax::{adler_gibbs, ordered_overrelax_gibbs, ordered_overrelax_step, OverrelaxConfig, DEFAULT_K_ORDER};
