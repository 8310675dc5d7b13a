use cds_core::diagnostics::{uup_report, UupReport};
use cds_core::types::DesignMatrix;
use nalgebra::DMatrix;

use crate::error::Result;

/// Uniform-uncertainty report of `x` after rescaling its columns to norm `√n`.
pub fn run_diag(x: DMatrix<f64>, s: usize, budget: u128) -> Result<UupReport> {
    let design = DesignMatrix::new(x)?.rescale_columns()?;
    Ok(uup_report(&design, s, budget)?)
}
