mod common;

use cds_core::baselines::{lasso_path, PenaltyConfig};
use cds_core::rng::SimRng;
use cds_core::selectors::cds_path;
use cds_core::tuning::{assign_folds, cds_grid, cross_validate_lambda1, cross_validate_path, fold_split, CvStatus};
use cds_core::types::{support_of, CdsConfig, DesignMatrix, RegressionProblem};
use common::gaussian_matrix;
use nalgebra::DVector;

fn problem(seed: u64, n: usize, p: usize, beta: &[f64], sigma: f64) -> RegressionProblem {
    let mut rng = SimRng::seed_from_u64(seed);
    let x = DesignMatrix::new(gaussian_matrix(&mut rng, n, p)).unwrap().rescale_columns().unwrap();
    let b = DVector::from_fn(p, |j, _| beta.get(j).copied().unwrap_or(0.0));
    let mut y = x.predict(&b);
    for v in y.iter_mut() {
        *v += sigma * rng.normal();
    }
    RegressionProblem::new(x, y, None).unwrap()
}

fn cds_config() -> CdsConfig {
    CdsConfig::builder().lambda0(0.01).lambda(0.2).build().unwrap()
}

#[test]
fn pure_noise_prefers_large_lambda() {
    let mut top = 0;
    for seed in 0..10 {
        let prob = problem(100 + seed, 60, 80, &[], 1.0);
        let cfg = cds_config();
        let grid = cds_grid(&prob, &cfg).unwrap();
        let cv = cross_validate_lambda1(&prob, &cfg, 5, seed).unwrap();
        let rank = grid.iter().position(|&g| g == cv.chosen_lambda1).unwrap();
        if rank < grid.len().div_ceil(4) {
            top += 1;
        }
    }
    assert!(top >= 8, "top-quartile choice in {top}/10 seeds");
}

#[test]
fn strong_signal_recovers_support() {
    let mut exact = 0;
    for seed in 0..10 {
        let prob = problem(200 + seed, 150, 40, &[1.0, -1.0, 1.0], 0.3);
        let cfg = cds_config();
        let cv = cross_validate_lambda1(&prob, &cfg, 5, seed).unwrap();
        assert_eq!(cv.status, CvStatus::Ok);
        let path = cds_path(&prob, &cfg.with_grid(cds_grid(&prob, &cfg).unwrap()).unwrap()).unwrap();
        let (est, _) = path.estimate_at(cv.chosen_lambda1).unwrap();
        if support_of(&est.beta) == vec![0, 1, 2] {
            exact += 1;
        }
    }
    assert!(exact >= 9, "exact support in {exact}/10 seeds");
}

#[test]
fn leave_one_out_on_twelve_rows() {
    let prob = problem(7, 12, 5, &[1.0, 0.5], 0.2);
    let cfg = PenaltyConfig::default();
    let grid = vec![0.4, 0.2, 0.1, 0.05];
    let cv = cross_validate_path(&prob, &grid, 12, 3, &|train, g| lasso_path(train, &cfg.with_grid(g.to_vec()))).unwrap();
    let mut labels = cv.fold_assignment.clone();
    labels.sort_unstable();
    assert_eq!(labels, (0..12).collect::<Vec<_>>());
    assert_eq!(cv.cv_errors.len(), 4);
    assert!(cv.cv_errors.iter().all(|p| p.mean_mse.is_finite() && p.se.is_finite()));
    assert!(grid.contains(&cv.chosen_lambda1));
}

#[test]
fn validation_rows_never_reach_training() {
    let prob = problem(8, 40, 6, &[1.0], 0.5);
    let labels = assign_folds(40, 5, 21);
    let (train, valid_x, _) = fold_split(&prob, &labels, 0).unwrap();

    // overwrite every fold-0 row; the fold-0 training problem must not change
    let mut x = prob.design().values().clone();
    let mut y = prob.response().clone();
    for i in (0..40).filter(|&i| labels[i] == 0) {
        x.row_mut(i).fill(1e3);
        y[i] = -1e3;
    }
    let tampered = RegressionProblem::new(DesignMatrix::new(x.clone()).unwrap(), y, None).unwrap();
    let (train2, _, _) = fold_split(&tampered, &labels, 0).unwrap();
    assert_eq!(train.design().values(), train2.design().values());
    assert_eq!(train.response(), train2.response());
    assert_eq!(train.design().scale_factors(), train2.design().scale_factors());

    // validation rows are mapped with the training factors
    let valid: Vec<usize> = (0..40).filter(|&i| labels[i] == 0).collect();
    for (r, &i) in valid.iter().enumerate() {
        for j in 0..6 {
            let expect = prob.design().values()[(i, j)] * train.design().scale_factors()[j];
            assert!((valid_x[(r, j)] - expect).abs() <= 1e-12);
        }
    }
}
