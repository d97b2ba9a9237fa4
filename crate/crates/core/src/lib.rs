// Guards are written `!(x > 0.0)` so that NaN is rejected with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod constants;
pub mod coupling;
pub mod error;
pub mod lattice;
pub mod protocol;
pub mod quadrature;
pub mod species;
pub mod stability;
pub mod transport;

pub use error::{Error, Result};
