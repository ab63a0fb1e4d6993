//! Robust matching pursuit for sparse linear regression when an adversary
//! corrupts both covariates and responses.

pub mod corruption;
pub mod datagen;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod model;
pub mod probes;
pub mod rng;

pub use error::{Error, Result};
