#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod config;
pub mod divergences;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod metrics;
pub mod optimizer;
pub mod petz;
pub mod rng;
pub mod states;
pub mod verify;

pub use error::{QngError, Result};
