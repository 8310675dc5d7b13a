//! Simulation drivers, dataset evaluation and persistence for the
//! constrained Dantzig selector.

pub mod config;
pub mod data;
pub mod diag;
pub mod error;
pub mod fitting;
pub mod methods;
pub mod output;
pub mod robust;
pub mod sim1;
pub mod sim2;
pub mod split_eval;

pub use error::{ExpError, Result};
