mod common;

use cds_core::baselines::{
    adaptive_lasso_from_init, adaptive_lasso_path, elastic_net_fit, elastic_net_path, lasso_path, oracle_fit,
    soft_threshold, PenaltyConfig,
};
use cds_core::datagen::{example2_beta0, generate, make_test_sample, DesignKind, SimDesign};
use cds_core::rng::SimRng;
use cds_core::types::{DesignMatrix, RegressionProblem, TrueModel};
use common::gaussian_matrix;
use nalgebra::{DMatrix, DVector};

fn random_problem(seed: u64, n: usize, p: usize) -> RegressionProblem {
    let mut rng = SimRng::seed_from_u64(seed);
    let x = DesignMatrix::new(gaussian_matrix(&mut rng, n, p)).unwrap().rescale_columns().unwrap();
    let beta = DVector::from_fn(p, |j, _| [1.5, -1.0, 0.5].get(j).copied().unwrap_or(0.0));
    let mut y = x.predict(&beta);
    for v in y.iter_mut() {
        *v += 0.5 * rng.normal();
    }
    RegressionProblem::new(x, y, None).unwrap()
}

fn lasso_objective(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, lambda: f64) -> f64 {
    let n = x.nrows() as f64;
    (y - x * beta).norm_squared() / (2.0 * n) + lambda * beta.lp_norm(1)
}

/// Proximal gradient descent with step `1/L`, `L` the largest eigenvalue of `XᵀX/n`.
fn ista(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let n = x.nrows() as f64;
    let g = x.tr_mul(x) / n;
    let lip = g.clone().symmetric_eigen().eigenvalues.max();
    let xty = x.tr_mul(y) / n;
    let mut beta = DVector::zeros(x.ncols());
    for _ in 0..1_000_000 {
        let grad = &g * &beta - &xty;
        let next = (&beta - grad / lip).map(|v| soft_threshold(v, lambda / lip));
        let change = (&next - &beta).amax();
        beta = next;
        if change < 1e-13 {
            break;
        }
    }
    beta
}

#[test]
fn lasso_matches_proximal_gradient_objective() {
    let prob = random_problem(20, 20, 10);
    let x = prob.design().values();
    for &lambda in &[0.3, 0.1, 0.02] {
        let path = lasso_path(&prob, &PenaltyConfig::default().with_grid(vec![lambda])).unwrap();
        let est = &path.entries()[0].estimate;
        assert!(est.converged);
        let ours = lasso_objective(x, prob.response(), &est.beta, lambda);
        let oracle = lasso_objective(x, prob.response(), &ista(x, prob.response(), lambda), lambda);
        assert!((ours - oracle).abs() <= 1e-6, "lambda {lambda}: {ours} vs {oracle}");
    }
}

#[test]
fn kkt_residuals_within_tolerance_along_paths() {
    let prob = random_problem(4, 50, 80);
    let cfg = PenaltyConfig::default();
    for path in [lasso_path(&prob, &cfg).unwrap(), elastic_net_path(&prob, &cfg).unwrap()] {
        for e in path.entries() {
            assert!(e.estimate.converged);
            assert!(e.estimate.feasibility_residual <= cfg.cd_tol, "{}", e.estimate.feasibility_residual);
        }
    }
    // direct recomputation of the Lasso conditions
    let path = lasso_path(&prob, &cfg).unwrap();
    for e in path.entries() {
        let corr = prob.residual_correlations(&e.estimate.beta);
        for j in 0..prob.p() {
            let b = e.estimate.beta[j];
            if b == 0.0 {
                assert!(corr[j].abs() <= e.lambda1 + 1e-8);
            } else {
                assert!((corr[j] - e.lambda1 * b.signum()).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn enet_with_unit_alpha_is_lasso() {
    let prob = random_problem(5, 30, 40);
    let cfg = PenaltyConfig {
        enet_alpha: 1.0,
        ..PenaltyConfig::default()
    };
    let a = elastic_net_path(&prob, &cfg).unwrap();
    let b = lasso_path(&prob, &cfg).unwrap();
    for (x, y) in a.entries().iter().zip(b.entries()) {
        assert!((&x.estimate.beta - &y.estimate.beta).amax() <= 1e-8);
    }
}

#[test]
fn enet_matches_augmented_lasso() {
    // (2n)⁻¹‖y − Xβ‖² + λ(1−α)/2 ‖β‖² = (2n)⁻¹‖ỹ − X̃β‖² with X̃ = [X; √(nλ(1−α)) I]
    let prob = random_problem(6, 25, 8);
    let (n, p) = (25usize, 8usize);
    let (lambda, alpha) = (0.15, 0.4);
    let cfg = PenaltyConfig {
        enet_alpha: alpha,
        cd_tol: 1e-12,
        ..PenaltyConfig::default()
    };
    let enet = elastic_net_path(&prob, &cfg.with_grid(vec![lambda])).unwrap();
    let ridge = (n as f64 * lambda * (1.0 - alpha)).sqrt();
    let mut xa = DMatrix::zeros(n + p, p);
    xa.view_mut((0, 0), (n, p)).copy_from(prob.design().values());
    for j in 0..p {
        xa[(n + j, j)] = ridge;
    }
    let mut ya = DVector::zeros(n + p);
    ya.rows_mut(0, n).copy_from(prob.response());
    // the augmented fit normalizes by n + p rows
    let l_aug = lambda * alpha * n as f64 / (n + p) as f64;
    let (beta_aug, converged) = elastic_net_fit(&xa, &ya, l_aug, 1.0, 1e-13, 1_000_000);
    assert!(converged);
    assert!((&enet.entries()[0].estimate.beta - beta_aug).amax() <= 1e-8);
}

#[test]
fn uniform_adaptive_weights_rescale_the_lasso_path() {
    let prob = random_problem(7, 40, 30);
    let cfg = PenaltyConfig::default().with_grid(vec![0.2, 0.1, 0.05]);
    let init = DVector::from_element(30, 0.5);
    let fit = adaptive_lasso_from_init(&prob, &cfg, &init, 0.0).unwrap();
    let w = fit.weights[0];
    assert!(fit.weights.iter().all(|&v| v == w));
    let scaled: Vec<f64> = cfg.lambda_grid.iter().map(|l| l * w).collect();
    let lasso = lasso_path(&prob, &cfg.with_grid(scaled)).unwrap();
    for (a, b) in fit.path.entries().iter().zip(lasso.entries()) {
        assert!((&a.estimate.beta - &b.estimate.beta).amax() <= 1e-7);
    }
}

#[test]
fn adaptive_weights_steer_entry_order() {
    let prob = random_problem(8, 40, 30);
    let mut init = DVector::from_element(30, 0.01);
    init[20] = 1e6;
    init[0] = 0.0;
    let fit = adaptive_lasso_from_init(&prob, &PenaltyConfig::default(), &init, 0.0).unwrap();
    let first = fit.path.entries().iter().find(|e| !e.estimate.support.is_empty()).unwrap();
    assert_eq!(first.estimate.support, vec![20]);
    // weight 1e6 on coordinate 0 keeps it out along the whole default grid
    assert!(fit.path.entries().iter().all(|e| e.estimate.beta[0] == 0.0));
}

#[test]
fn adaptive_lasso_records_weights() {
    let prob = random_problem(9, 60, 40);
    let fit = adaptive_lasso_path(&prob, &PenaltyConfig::default()).unwrap();
    assert_eq!(fit.weights.len(), 40);
    for j in 0..40 {
        let expect = 1.0 / (fit.init[j].abs() + 1e-6);
        assert!((fit.weights[j] - expect).abs() <= 1e-9 * expect);
    }
    assert!(fit.init_lambda > 0.0);
}

#[test]
fn oracle_prediction_error_near_inflated_noise() {
    // σ²(1 + s/(n − s − 1)) ≈ 0.182 at n = 100, s = 12, σ = 0.4
    let p = 1000;
    let mut pes = Vec::new();
    for seed in 0..8 {
        let design = SimDesign {
            kind: DesignKind::Ar1,
            n: 100,
            p,
            correlation: 0.5,
            truth: TrueModel::new(example2_beta0(p), 0.4).unwrap(),
            noiseless: false,
            seed,
        };
        let prob = generate(&design).unwrap();
        let est = oracle_fit(&prob).unwrap();
        pes.push(make_test_sample(&design, prob.design().scale_factors(), 10_000, &est.beta).unwrap());
    }
    let mean = pes.iter().sum::<f64>() / pes.len() as f64;
    assert!((0.17..=0.20).contains(&mean), "oracle PE mean {mean}");
}
