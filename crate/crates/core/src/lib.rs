pub mod cli;
pub mod config;
pub mod corpus;
pub mod curve;
mod error;
pub mod featurize;
pub mod rng;
pub mod simulator;
pub mod synth;
pub mod teachers;
pub mod tracking;
pub mod trainer;

pub use error::{Error, Result};
