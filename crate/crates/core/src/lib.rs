pub mod alternation;
pub mod cli;
pub mod coding;
pub mod eqrel;
pub mod harness;
pub mod error;
pub mod ordinal;
pub mod rng;
pub mod words;

pub use error::{Error, Result};
