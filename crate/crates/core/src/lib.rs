#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail validation checks.

pub mod antenna;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod harness;
pub mod rng;
pub mod routing;
pub mod stats;

pub use error::{Error, Result};
