//! Dantzig selector, thresholded Dantzig selector and the constrained
//! Dantzig selector with its solution path.

mod cds;
mod dantzig;

pub use cds::{cds_feasibility_residual, cds_fit_single, cds_path, cds_path_until, violation_scan, ActiveSetState};
pub use dantzig::{
    dantzig_path, dantzig_selector, dantzig_selector_with, threshold_estimate, thresholded_dantzig, DantzigOptions,
};
