//! Survey sampling and Monte Carlo methods.

// `!(x > 0.0)` is used on purpose: unlike `x <= 0.0` it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod density;
pub mod diagnostics;
pub mod efficient;
pub mod error;
pub mod io;
pub mod mc;
pub mod mcmc;
pub mod rng;
pub mod stats;
pub mod survey;

pub use error::{Error, Result};
pub use rng::RngStream;
