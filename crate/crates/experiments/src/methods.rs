//! Estimators compared in the experiments, each tuned by the same
//! cross-validation driver.

use cds_core::baselines::{
    adaptive_lasso_path, default_penalty_grid, elastic_net_path, lasso_path, oracle_fit, weighted_lasso_path,
};
use cds_core::selectors::{cds_path, dantzig_path, threshold_estimate, DantzigOptions};
use cds_core::tuning::{cross_validate_path, lambda1_grid};
use cds_core::types::{CdsConfig, RegressionProblem, SolutionPath, SparseEstimate};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::config::TuningSettings;
use crate::error::{ExpError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "DS")]
    Ds,
    #[serde(rename = "TDS")]
    Tds,
    Lasso,
    Enet,
    ALasso,
    #[serde(rename = "CDS")]
    Cds,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Ds,
        Method::Tds,
        Method::Lasso,
        Method::Enet,
        Method::ALasso,
        Method::Cds,
        Method::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ds => "DS",
            Method::Tds => "TDS",
            Method::Lasso => "Lasso",
            Method::Enet => "Enet",
            Method::ALasso => "ALasso",
            Method::Cds => "CDS",
            Method::Oracle => "Oracle",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A tuned estimate and the tuning value cross-validation picked, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct TunedFit {
    pub method: Method,
    pub estimate: SparseEstimate,
    pub tuning_value: Option<f64>,
}

pub fn cds_config(tuning: &TuningSettings, grid: Vec<f64>) -> Result<CdsConfig> {
    Ok(CdsConfig::builder()
        .lambda0(tuning.lambda0)
        .lambda(tuning.lambda)
        .cv_folds(tuning.folds)
        .lambda1_grid(grid)
        .build()?)
}

/// Default `λ₁` grid of the problem, cut below at `floor`.
pub fn selector_grid(problem: &RegressionProblem, tuning: &TuningSettings, floor: f64) -> Result<Vec<f64>> {
    let mut grid = lambda1_grid(problem, tuning.grid_length, tuning.floor_ratio)?;
    grid.retain(|&g| g >= floor);
    if grid.is_empty() {
        return Err(ExpError::Config(format!("field `tuning.lambda0`: {floor} exceeds every grid value")));
    }
    Ok(grid)
}

/// Applies the hard threshold `tau` to every entry of a path.
pub fn thresholded_path(path: &SolutionPath, tau: f64) -> cds_core::Result<SolutionPath> {
    let mut out = SolutionPath::new();
    for e in path.entries() {
        out.push(e.lambda1, threshold_estimate(&e.estimate, tau))?;
    }
    if path.stopped_early {
        out.stop(path.stop_reason);
    }
    Ok(out)
}

type PathFitter<'a> = Box<dyn Fn(&RegressionProblem, &[f64]) -> cds_core::Result<SolutionPath> + 'a>;

/// Grid and path fitter of a path-based method on `problem`.
fn path_method<'a>(
    method: Method,
    problem: &RegressionProblem,
    tuning: &'a TuningSettings,
    seed: u64,
) -> Result<(Vec<f64>, PathFitter<'a>)> {
    let ones = DVector::from_element(problem.p(), 1.0);
    let penalty = &tuning.penalty;
    Ok(match method {
        Method::Ds => (
            selector_grid(problem, tuning, 0.0)?,
            Box::new(|prob, g| dantzig_path(prob, g, &DantzigOptions::default())),
        ),
        Method::Tds => {
            let tau = tuning.tds_threshold();
            (
                selector_grid(problem, tuning, 0.0)?,
                Box::new(move |prob, g| thresholded_path(&dantzig_path(prob, g, &DantzigOptions::default())?, tau)),
            )
        }
        Method::Lasso => (
            default_penalty_grid(problem, &ones, 1.0)?,
            Box::new(|prob, g| lasso_path(prob, &penalty.with_grid(g.to_vec()))),
        ),
        Method::Enet => (
            default_penalty_grid(problem, &ones, penalty.enet_alpha)?,
            Box::new(|prob, g| elastic_net_path(prob, &penalty.with_grid(g.to_vec()))),
        ),
        Method::ALasso => {
            let mut init_cfg = penalty.clone();
            init_cfg.init_seed = seed;
            init_cfg.init_folds = tuning.folds;
            let weights = adaptive_lasso_path(problem, &init_cfg)?.weights;
            let grid = default_penalty_grid(problem, &weights, 1.0)?;
            (
                grid,
                Box::new(move |prob, g| weighted_lasso_path(prob, &penalty.with_grid(g.to_vec()), &weights)),
            )
        }
        Method::Cds => {
            let grid = selector_grid(problem, tuning, tuning.lambda0)?;
            let cfg = cds_config(tuning, grid.clone())?;
            (grid, Box::new(move |prob, g| cds_path(prob, &cfg.with_grid(g.to_vec())?)))
        }
        Method::Oracle => unreachable!("oracle has no tuning path"),
    })
}

/// Fits `method` with its tuning value chosen by `tuning.folds`-fold
/// cross-validation using fold seed `seed`.
pub fn tuned_fit(method: Method, problem: &RegressionProblem, tuning: &TuningSettings, seed: u64) -> Result<TunedFit> {
    if method == Method::Oracle {
        return Ok(TunedFit {
            method,
            estimate: oracle_fit(problem)?,
            tuning_value: None,
        });
    }
    let (grid, fit) = path_method(method, problem, tuning, seed)?;
    let cv = cross_validate_path(problem, &grid, tuning.folds, seed, &*fit)?;
    let full = fit(problem, &grid)?;
    let (est, _) = full
        .estimate_at(cv.chosen_lambda1)
        .ok_or_else(|| ExpError::Numerical(format!("{method} produced an empty path")))?;
    Ok(TunedFit {
        method,
        estimate: est.clone(),
        tuning_value: Some(cv.chosen_lambda1),
    })
}

/// Untuned solution path of `method` over its default grid.
pub fn full_path(method: Method, problem: &RegressionProblem, tuning: &TuningSettings, seed: u64) -> Result<SolutionPath> {
    if method == Method::Oracle {
        return Err(ExpError::Config("Oracle has no solution path".into()));
    }
    let (grid, fit) = path_method(method, problem, tuning, seed)?;
    Ok(fit(problem, &grid)?)
}
