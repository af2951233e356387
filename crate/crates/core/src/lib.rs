//! Volterra processes with long memory: kernels, Appell-polynomial
//! combinatorics, simulation and limit experiments.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::excessive_precision
)]

pub mod combinatorics;
pub mod error;
pub mod kernel;
pub mod limit;
pub mod mc;
pub mod quad;
pub mod sim;
pub mod verify;

pub use error::{Error, Result};
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
