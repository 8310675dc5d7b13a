pub mod baselines;
pub mod datagen;
pub mod diagnostics;
pub mod error;
pub mod lp;
pub mod metrics;
pub mod rng;
pub mod selectors;
pub mod tuning;
pub mod types;

pub use error::{Error, Result};
