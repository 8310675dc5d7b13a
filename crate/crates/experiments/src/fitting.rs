//! Single-dataset fits behind the `fit`, `path` and `cv` subcommands.
//!
//! Covariates are centered and rescaled to norm `√n` and the response is
//! centered; coefficients are reported on that scale and in original units.

use cds_core::selectors::cds_path;
use cds_core::tuning::{cross_validate_path, CvResult};
use cds_core::types::{DesignMatrix, RegressionProblem, SolutionPath, SparseEstimate, StopReason};
use serde::{Deserialize, Serialize};

use crate::config::FitConfig;
use crate::data::Dataset;
use crate::error::{ExpError, Result};
use crate::methods::{cds_config, selector_grid, tuned_fit, Method};

pub const INTERCEPT: &str = "(intercept)";

/// Standardized problem plus what is needed to map back to original units.
pub struct Prepared {
    pub problem: RegressionProblem,
    pub y_mean: f64,
}

pub fn prepare(ds: &Dataset) -> Result<Prepared> {
    let x = DesignMatrix::new(ds.x.clone())?.standardize_columns(true)?;
    let y_mean = ds.y.mean();
    let problem = RegressionProblem::new(x, ds.y.add_scalar(-y_mean), None)?;
    Ok(Prepared { problem, y_mean })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefRow {
    pub term: String,
    pub coefficient: f64,
    pub coefficient_original: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub lambda1: f64,
    pub support_size: usize,
    pub converged: bool,
    /// The path left `B_λ` above `lambda1` and the estimate is carried over.
    pub inherited: bool,
}

/// Coefficient table, intercept first.
pub fn coefficient_rows(ds: &Dataset, prep: &Prepared, est: &SparseEstimate) -> Vec<CoefRow> {
    let design = prep.problem.design();
    let scale = design.scale_factors();
    let centers = design.centers().expect("prepared designs are centered");
    let original: Vec<f64> = (0..ds.covariates.len()).map(|j| est.beta[j] * scale[j]).collect();
    let intercept = prep.y_mean - original.iter().zip(centers.iter()).map(|(b, m)| b * m).sum::<f64>();
    std::iter::once(CoefRow {
        term: INTERCEPT.to_string(),
        coefficient: prep.y_mean,
        coefficient_original: intercept,
    })
    .chain(ds.covariates.iter().enumerate().map(|(j, name)| CoefRow {
        term: name.clone(),
        coefficient: est.beta[j],
        coefficient_original: original[j],
    }))
    .collect()
}

/// Constrained Dantzig fit at the configured `λ₁`, or the cross-validated one.
pub fn run_fit(ds: &Dataset, cfg: &FitConfig) -> Result<(Vec<CoefRow>, FitSummary)> {
    cfg.validate()?;
    let prep = prepare(ds)?;
    let problem = &prep.problem;
    let (est, lambda1, inherited) = match cfg.lambda1 {
        Some(l1) => {
            let mut grid = selector_grid(problem, &cfg.tuning, cfg.tuning.lambda0)?;
            grid.retain(|&g| g > l1);
            grid.push(l1);
            let path = cds_path(problem, &cds_config(&cfg.tuning, grid)?)?;
            let (est, inh) = path
                .estimate_at(l1)
                .ok_or_else(|| ExpError::Numerical("empty solution path".into()))?;
            (est.clone(), l1, inh)
        }
        None => {
            let fit = tuned_fit(Method::Cds, problem, &cfg.tuning, cfg.seed)?;
            let l1 = fit.tuning_value.expect("cross-validated fits report their value");
            (fit.estimate, l1, false)
        }
    };
    let summary = FitSummary {
        lambda1,
        support_size: est.support.len(),
        converged: est.converged,
        inherited,
    };
    Ok((coefficient_rows(ds, &prep, &est), summary))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRow {
    pub lambda1: f64,
    pub term: String,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSummaryRow {
    pub lambda1: f64,
    pub support_size: usize,
    pub l1_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub feasibility_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathInfo {
    pub entries: usize,
    pub stopped_early: bool,
    pub stop_reason: StopReason,
}

pub fn run_path(ds: &Dataset, cfg: &FitConfig) -> Result<(Vec<PathRow>, Vec<PathSummaryRow>, PathInfo)> {
    cfg.validate()?;
    let prep = prepare(ds)?;
    let grid = selector_grid(&prep.problem, &cfg.tuning, cfg.tuning.lambda0)?;
    let path: SolutionPath = cds_path(&prep.problem, &cds_config(&cfg.tuning, grid)?)?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for e in path.entries() {
        for &j in &e.estimate.support {
            rows.push(PathRow {
                lambda1: e.lambda1,
                term: ds.covariates[j].clone(),
                coefficient: e.estimate.beta[j],
            });
        }
        summary.push(PathSummaryRow {
            lambda1: e.lambda1,
            support_size: e.estimate.support.len(),
            l1_norm: e.estimate.l1_norm,
            converged: e.estimate.converged,
            iterations: e.estimate.iterations,
            feasibility_residual: e.estimate.feasibility_residual,
        });
    }
    let info = PathInfo {
        entries: path.len(),
        stopped_early: path.stopped_early,
        stop_reason: path.stop_reason,
    };
    Ok((rows, summary, info))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub lambda1: f64,
    pub mean_mse: f64,
    pub se: f64,
    pub inherited_folds: usize,
    pub chosen: bool,
}

pub fn run_cv(ds: &Dataset, cfg: &FitConfig) -> Result<(Vec<CvRow>, CvResult)> {
    cfg.validate()?;
    let prep = prepare(ds)?;
    let grid = selector_grid(&prep.problem, &cfg.tuning, cfg.tuning.lambda0)?;
    let base = cds_config(&cfg.tuning, grid.clone())?;
    let cv = cross_validate_path(&prep.problem, &grid, cfg.tuning.folds, cfg.seed, &|train, g| {
        cds_path(train, &base.with_grid(g.to_vec())?)
    })?;
    let rows = cv
        .cv_errors
        .iter()
        .map(|pt| CvRow {
            lambda1: pt.lambda1,
            mean_mse: pt.mean_mse,
            se: pt.se,
            inherited_folds: pt.inherited_folds,
            chosen: pt.lambda1 == cv.chosen_lambda1,
        })
        .collect();
    Ok((rows, cv))
}
