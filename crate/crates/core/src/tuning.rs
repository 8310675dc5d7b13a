//! Tuning grids and K-fold cross-validation along solution paths.
//!
//! Each fold's training rows are rescaled on their own; validation rows are
//! mapped with the training scale factors, so validation data never reaches
//! a fit. Validation loss is mean squared prediction error.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::selectors::cds_path;
use crate::types::{CdsConfig, RegressionProblem, SolutionPath};

pub const DEFAULT_GRID_LENGTH: usize = 50;
pub const DEFAULT_FLOOR_RATIO: f64 = 0.05;
pub const DEFAULT_FOLDS: usize = 5;

/// Default threshold `λ = √(log p / n)`.
pub fn default_lambda(n: usize, p: usize) -> f64 {
    ((p as f64).ln() / n as f64).sqrt()
}

/// Default lower bound `λ₀ = 0.05·√(log p / n)`.
pub fn default_lambda0(n: usize, p: usize) -> f64 {
    0.05 * default_lambda(n, p)
}

/// Log-spaced decreasing grid from `λ_max = ‖n⁻¹Xᵀy‖_∞` to `floor_ratio·λ_max`.
pub fn lambda1_grid(problem: &RegressionProblem, length: usize, floor_ratio: f64) -> Result<Vec<f64>> {
    lambda1_grid_from_max(problem.lambda_max(), length, floor_ratio)
}

pub fn lambda1_grid_from_max(lambda_max: f64, length: usize, floor_ratio: f64) -> Result<Vec<f64>> {
    if length < 2 {
        return Err(Error::InvalidArgument(format!("grid length must be >= 2, got {length}")));
    }
    if !(floor_ratio > 0.0 && floor_ratio < 1.0) {
        return Err(Error::InvalidArgument(format!("floor ratio must lie in (0, 1), got {floor_ratio}")));
    }
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "grid needs a positive finite lambda_max, got {lambda_max}"
        )));
    }
    let step = floor_ratio.ln() / (length - 1) as f64;
    let mut grid: Vec<f64> = (0..length).map(|i| lambda_max * (step * i as f64).exp()).collect();
    grid[0] = lambda_max;
    grid[length - 1] = lambda_max * floor_ratio;
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CvStatus {
    Ok,
    /// Every fold's path stopped at its head; the grid head is returned.
    HeadOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvPoint {
    pub lambda1: f64,
    pub mean_mse: f64,
    pub se: f64,
    /// Number of folds whose estimate here was inherited past an early stop.
    pub inherited_folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub chosen_lambda1: f64,
    pub cv_errors: Vec<CvPoint>,
    /// Fold index of every row.
    pub fold_assignment: Vec<usize>,
    pub status: CvStatus,
}

/// Seeded balanced fold labels: a shuffled `0..n` dealt round-robin.
pub fn assign_folds(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    SimRng::seed_from_u64(seed).shuffle(&mut order);
    let mut labels = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        labels[row] = pos % folds;
    }
    labels
}

/// Training problem (rescaled on its rows) and mapped validation rows of one fold.
pub fn fold_split(
    problem: &RegressionProblem,
    labels: &[usize],
    fold: usize,
) -> Result<(RegressionProblem, nalgebra::DMatrix<f64>, DVector<f64>)> {
    let train: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] != fold).collect();
    let valid: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == fold).collect();
    let x = problem.design();
    let train_x = x.select_rows(&train)?.rescale_columns()?;
    let valid_x = train_x.transform_rows(&x.values().select_rows(&valid))?;
    let y = problem.response();
    let train_y = DVector::from_iterator(train.len(), train.iter().map(|&i| y[i]));
    let valid_y = DVector::from_iterator(valid.len(), valid.iter().map(|&i| y[i]));
    Ok((RegressionProblem::new(train_x, train_y, None)?, valid_x, valid_y))
}

/// Cross-validates any path-producing fitter over `grid`.
///
/// Grid values above a fold's path head use the head; values past an
/// early-stopped path inherit its last estimate and are counted in
/// `inherited_folds`. The chosen value minimizes mean validation MSE, ties
/// going to the larger value.
pub fn cross_validate_path(
    problem: &RegressionProblem,
    grid: &[f64],
    folds: usize,
    seed: u64,
    fit: &dyn Fn(&RegressionProblem, &[f64]) -> Result<SolutionPath>,
) -> Result<CvResult> {
    let n = problem.n();
    if folds < 2 || n < folds {
        return Err(Error::InvalidArgument(format!("need 2 <= folds <= n, got folds = {folds}, n = {n}")));
    }
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty tuning grid".into()));
    }
    let labels = assign_folds(n, folds, seed);
    let mut mse = vec![vec![0.0; folds]; grid.len()];
    let mut inherited = vec![0usize; grid.len()];
    let mut head_only = true;
    for fold in 0..folds {
        let (train, valid_x, valid_y) = fold_split(problem, &labels, fold)?;
        let path = fit(&train, grid)?;
        if path.len() > 1 || !path.stopped_early {
            head_only = false;
        }
        for (g, &lambda1) in grid.iter().enumerate() {
            let (est, inh) = path
                .estimate_at(lambda1)
                .ok_or_else(|| Error::InvalidArgument("fitter returned an empty path".into()))?;
            if inh {
                inherited[g] += 1;
            }
            let mut err = valid_y.clone();
            for &j in &est.support {
                err.axpy(-est.beta[j], &valid_x.column(j), 1.0);
            }
            mse[g][fold] = err.norm_squared() / valid_y.len() as f64;
        }
    }
    let k = folds as f64;
    let cv_errors: Vec<CvPoint> = grid
        .iter()
        .enumerate()
        .map(|(g, &lambda1)| {
            let mean = mse[g].iter().sum::<f64>() / k;
            let var = mse[g].iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0);
            CvPoint {
                lambda1,
                mean_mse: mean,
                se: (var / k).sqrt(),
                inherited_folds: inherited[g],
            }
        })
        .collect();
    if head_only {
        return Ok(CvResult {
            chosen_lambda1: grid[0],
            cv_errors,
            fold_assignment: labels,
            status: CvStatus::HeadOnly,
        });
    }
    let mut best = 0;
    for g in 1..cv_errors.len() {
        if cv_errors[g].mean_mse < cv_errors[best].mean_mse {
            best = g;
        }
    }
    Ok(CvResult {
        chosen_lambda1: grid[best],
        cv_errors,
        fold_assignment: labels,
        status: CvStatus::Ok,
    })
}

/// Cross-validates `λ₁` for the constrained Dantzig selector with fixed
/// `λ₀` and `λ`. An empty configured grid means the default grid.
pub fn cross_validate_lambda1(
    problem: &RegressionProblem,
    config: &CdsConfig,
    folds: usize,
    seed: u64,
) -> Result<CvResult> {
    let grid = cds_grid(problem, config)?;
    cross_validate_path(problem, &grid, folds, seed, &|train, g| cds_path(train, &config.with_grid(g.to_vec())?))
}

/// Configured grid, or the default grid cut below at `λ₀`.
pub fn cds_grid(problem: &RegressionProblem, config: &CdsConfig) -> Result<Vec<f64>> {
    if !config.lambda1_grid().is_empty() {
        return Ok(config.lambda1_grid().to_vec());
    }
    let mut grid = lambda1_grid(problem, DEFAULT_GRID_LENGTH, DEFAULT_FLOOR_RATIO)?;
    grid.retain(|&g| g >= config.lambda0());
    if grid.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "lambda0 = {} exceeds every default grid value",
            config.lambda0()
        )));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::DesignMatrix;
    use nalgebra::DMatrix;

    #[test]
    fn two_point_grid() {
        let g = lambda1_grid_from_max(2.0, 2, 0.5).unwrap();
        assert_eq!(g, vec![2.0, 1.0]);
    }

    #[test]
    fn grid_decreasing_from_lambda_max() {
        let g = lambda1_grid_from_max(0.7, 50, 0.05).unwrap();
        assert_eq!(g[0], 0.7);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
        assert!((g[49] - 0.035).abs() < 1e-15);
    }

    #[test]
    fn grid_rejects_degenerate_input() {
        assert!(lambda1_grid_from_max(0.0, 10, 0.1).is_err());
        assert!(lambda1_grid_from_max(1.0, 1, 0.1).is_err());
        assert!(lambda1_grid_from_max(1.0, 10, 1.0).is_err());
    }

    #[test]
    fn response_equal_to_scaled_column_has_unit_lambda_max() {
        let x = DesignMatrix::from_row_slice(3, 2, &[1.0, 0.0, 2.0, 1.0, -1.0, 1.0]).unwrap().rescale_columns().unwrap();
        let y = x.values().column(0).into_owned();
        let prob = RegressionProblem::new(x, y, None).unwrap();
        let g = lambda1_grid(&prob, 5, 0.1).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn folds_are_balanced_and_seeded() {
        let a = assign_folds(23, 5, 4);
        assert_eq!(a, assign_folds(23, 5, 4));
        for f in 0..5 {
            let c = a.iter().filter(|&&v| v == f).count();
            assert!(c == 4 || c == 5);
        }
    }

    #[test]
    fn fold_split_scales_on_training_rows() {
        let mut rng = SimRng::seed_from_u64(2);
        let raw = DMatrix::from_fn(12, 3, |_, _| rng.normal());
        let x = DesignMatrix::new(raw).unwrap().rescale_columns().unwrap();
        let y = DVector::from_fn(12, |i, _| i as f64);
        let prob = RegressionProblem::new(x.clone(), y, None).unwrap();
        let labels = assign_folds(12, 3, 1);
        let (train, vx, vy) = fold_split(&prob, &labels, 0).unwrap();
        assert_eq!(train.n() + vy.len(), 12);
        for c in train.design().values().column_iter() {
            assert!((c.norm() - (train.n() as f64).sqrt()).abs() < 1e-12);
        }
        let valid: Vec<usize> = (0..12).filter(|&i| labels[i] == 0).collect();
        for (a, &i) in valid.iter().enumerate() {
            for j in 0..3 {
                let expect = x.values()[(i, j)] * train.design().scale_factors()[j];
                assert!((vx[(a, j)] - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ties_go_to_larger_lambda() {
        // a constant fitter gives identical errors at every grid value
        let mut rng = SimRng::seed_from_u64(8);
        let x = DesignMatrix::new(DMatrix::from_fn(6, 2, |_, _| rng.normal())).unwrap().rescale_columns().unwrap();
        let prob = RegressionProblem::new(x, DVector::from_element(6, 1.0), None).unwrap();
        let res = cross_validate_path(&prob, &[0.3, 0.2, 0.1], 3, 0, &|t, g| {
            let mut path = SolutionPath::new();
            for &l in g {
                path.push(l, crate::types::SparseEstimate::zeros(t.p()))?;
            }
            Ok(path)
        })
        .unwrap();
        assert_eq!(res.chosen_lambda1, 0.3);
        assert_eq!(res.status, CvStatus::Ok);
    }

    #[test]
    fn default_tuning_constants() {
        let l = default_lambda(100, 1000);
        assert!((l - (1000f64.ln() / 100.0).sqrt()).abs() < 1e-15);
        assert!((default_lambda0(100, 1000) - 0.05 * l).abs() < 1e-15);
    }
}
