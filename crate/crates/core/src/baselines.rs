//! Comparator estimators: Lasso, elastic net, adaptive Lasso and the oracle
//! least-squares fit.
//!
//! The penalized fits minimize
//! `(2n)⁻¹‖y − Xβ‖² + λ Σ_j w_j {α|β_j| + (1 − α)β_j²/2}`-style objectives by
//! cyclic coordinate descent, with `w ≡ 1` except for the adaptive Lasso. The
//! ridge part is unweighted: `λ{α Σ w_j|β_j| + (1 − α)‖β‖²/2}`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tuning::{cross_validate_path, lambda1_grid_from_max, DEFAULT_FLOOR_RATIO, DEFAULT_GRID_LENGTH};
use crate::types::{RegressionProblem, SolutionPath, SparseEstimate};

/// Guard added to initial magnitudes before forming adaptive weights.
pub const WEIGHT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PenaltyConfig {
    /// Strictly decreasing penalty levels; empty means a default log grid
    /// from the method's own zero-solution boundary.
    pub lambda_grid: Vec<f64>,
    pub enet_alpha: f64,
    pub adaptive_gamma: f64,
    pub cd_tol: f64,
    pub cd_max_iters: usize,
    /// Folds and seed for the Lasso fit that initializes the adaptive weights.
    pub init_folds: usize,
    pub init_seed: u64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            lambda_grid: Vec::new(),
            enet_alpha: 0.5,
            adaptive_gamma: 1.0,
            cd_tol: 1e-8,
            cd_max_iters: 100_000,
            init_folds: 5,
            init_seed: 0,
        }
    }
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.enet_alpha > 0.0 && self.enet_alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!("enet_alpha must lie in (0, 1], got {}", self.enet_alpha)));
        }
        if !(self.adaptive_gamma > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "adaptive_gamma must be positive, got {}",
                self.adaptive_gamma
            )));
        }
        if !(self.cd_tol > 0.0) || self.cd_max_iters == 0 {
            return Err(Error::InvalidConfig("cd_tol and cd_max_iters must be positive".into()));
        }
        if self.lambda_grid.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidConfig("penalty grid values must be positive and finite".into()));
        }
        if self.lambda_grid.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidConfig("penalty grid must be strictly decreasing".into()));
        }
        Ok(())
    }

    pub fn with_grid(&self, grid: Vec<f64>) -> Self {
        Self {
            lambda_grid: grid,
            ..self.clone()
        }
    }
}

/// Weighted elastic-net problem data in Gram-free form.
struct Penalized<'a> {
    x: &'a DMatrix<f64>,
    y: &'a DVector<f64>,
    /// `n⁻¹‖x_j‖²`.
    diag: DVector<f64>,
    weights: &'a DVector<f64>,
    alpha: f64,
}

impl<'a> Penalized<'a> {
    fn new(x: &'a DMatrix<f64>, y: &'a DVector<f64>, weights: &'a DVector<f64>, alpha: f64) -> Self {
        let n = x.nrows() as f64;
        let diag = DVector::from_iterator(x.ncols(), x.column_iter().map(|c| c.norm_squared() / n));
        Self { x, y, diag, weights, alpha }
    }

    fn n(&self) -> f64 {
        self.x.nrows() as f64
    }

    fn residual(&self, beta: &DVector<f64>) -> DVector<f64> {
        let mut r = self.y.clone();
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                r.axpy(-b, &self.x.column(j), 1.0);
            }
        }
        r
    }

    /// Largest violation of the stationarity conditions at `beta`.
    fn kkt_residual(&self, beta: &DVector<f64>, lambda: f64) -> f64 {
        let r = self.residual(beta);
        let corr = self.x.tr_mul(&r) / self.n();
        let mut worst: f64 = 0.0;
        for j in 0..beta.len() {
            let l1 = lambda * self.alpha * self.weights[j];
            let v = if beta[j] == 0.0 {
                (corr[j].abs() - l1).max(0.0)
            } else {
                (corr[j] - lambda * (1.0 - self.alpha) * beta[j] - l1 * beta[j].signum()).abs()
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Cyclic coordinate descent from `beta`; returns sweeps and convergence.
    ///
    /// Sweeps alternate between the full index set and the current support;
    /// convergence needs a full sweep with maximal change below `tol` and a
    /// KKT residual within `tol`.
    fn descend(&self, beta: &mut DVector<f64>, lambda: f64, tol: f64, max_sweeps: usize) -> (usize, bool) {
        let n = self.n();
        let p = beta.len();
        let ridge = lambda * (1.0 - self.alpha);
        let mut r = self.residual(beta);
        let mut sweeps = 0;
        let mut full = true;
        while sweeps < max_sweeps {
            sweeps += 1;
            let mut max_change: f64 = 0.0;
            for j in 0..p {
                if !full && beta[j] == 0.0 {
                    continue;
                }
                let d = self.diag[j];
                if d == 0.0 {
                    continue;
                }
                let old = beta[j];
                let z = self.x.column(j).dot(&r) / n + d * old;
                let t = lambda * self.alpha * self.weights[j];
                let new = soft_threshold(z, t) / (d + ridge);
                if new != old {
                    r.axpy(old - new, &self.x.column(j), 1.0);
                    beta[j] = new;
                    max_change = max_change.max((new - old).abs());
                }
            }
            if max_change < tol {
                if full {
                    if self.kkt_residual(beta, lambda) <= tol {
                        return (sweeps, true);
                    }
                    r = self.residual(beta);
                } else {
                    full = true;
                    continue;
                }
            }
            full = max_change < tol;
        }
        (sweeps, false)
    }
}

pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Smallest penalty at which zero solves the weighted elastic net:
/// `max_j |n⁻¹x_jᵀy| / (α w_j)`.
fn zero_boundary(problem: &RegressionProblem, weights: &DVector<f64>, alpha: f64) -> f64 {
    problem
        .xty()
        .iter()
        .zip(weights.iter())
        .map(|(c, w)| c.abs() / (alpha * w))
        .fold(0.0, f64::max)
}

/// Default log grid from the zero-solution boundary `max_j |c_j| / (α w_j)`.
pub fn default_penalty_grid(problem: &RegressionProblem, weights: &DVector<f64>, alpha: f64) -> Result<Vec<f64>> {
    lambda1_grid_from_max(zero_boundary(problem, weights, alpha), DEFAULT_GRID_LENGTH, DEFAULT_FLOOR_RATIO)
}

fn penalized_path(
    problem: &RegressionProblem,
    config: &PenaltyConfig,
    weights: &DVector<f64>,
    alpha: f64,
) -> Result<SolutionPath> {
    problem.require_scaled()?;
    config.validate()?;
    let grid = if config.lambda_grid.is_empty() {
        default_penalty_grid(problem, weights, alpha)?
    } else {
        config.lambda_grid.clone()
    };
    let pen = Penalized::new(problem.design().values(), problem.response(), weights, alpha);
    let mut beta = DVector::zeros(problem.p());
    let mut path = SolutionPath::new();
    for &lambda in &grid {
        let (sweeps, converged) = pen.descend(&mut beta, lambda, config.cd_tol, config.cd_max_iters);
        let mut est = SparseEstimate::from_beta(beta.clone());
        est.iterations = sweeps;
        est.converged = converged;
        est.feasibility_residual = pen.kkt_residual(&est.beta, lambda);
        path.push(lambda, est)?;
    }
    Ok(path)
}

/// Lasso path: `(2n)⁻¹‖y − Xβ‖² + λ‖β‖₁` along the grid, warm-started.
pub fn lasso_path(problem: &RegressionProblem, config: &PenaltyConfig) -> Result<SolutionPath> {
    let w = DVector::from_element(problem.p(), 1.0);
    penalized_path(problem, config, &w, 1.0)
}

/// Elastic-net path: `(2n)⁻¹‖y − Xβ‖² + λ{α‖β‖₁ + (1 − α)‖β‖²/2}`.
pub fn elastic_net_path(problem: &RegressionProblem, config: &PenaltyConfig) -> Result<SolutionPath> {
    let w = DVector::from_element(problem.p(), 1.0);
    penalized_path(problem, config, &w, config.enet_alpha)
}

/// Weighted Lasso `(2n)⁻¹‖y − Xβ‖² + λ Σ w_j|β_j|` along the grid.
pub fn weighted_lasso_path(
    problem: &RegressionProblem,
    config: &PenaltyConfig,
    weights: &DVector<f64>,
) -> Result<SolutionPath> {
    if weights.len() != problem.p() {
        return Err(Error::DimensionMismatch {
            what: "penalty weights",
            expected: problem.p(),
            got: weights.len(),
        });
    }
    if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidArgument("penalty weights must be positive and finite".into()));
    }
    penalized_path(problem, config, weights, 1.0)
}

/// Cyclic coordinate descent for a raw (possibly unscaled) design.
///
/// Exposed for reformulation checks; the path functions wrap it.
pub fn elastic_net_fit(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    alpha: f64,
    tol: f64,
    max_sweeps: usize,
) -> (DVector<f64>, bool) {
    let w = DVector::from_element(x.ncols(), 1.0);
    let pen = Penalized::new(x, y, &w, alpha);
    let mut beta = DVector::zeros(x.ncols());
    let (_, converged) = pen.descend(&mut beta, lambda, tol, max_sweeps);
    (beta, converged)
}

/// `w_j = (|β_init,j| + WEIGHT_EPS)^(−γ)`.
pub fn adaptive_weights(init: &DVector<f64>, gamma: f64) -> DVector<f64> {
    init.map(|b| (b.abs() + WEIGHT_EPS).powf(-gamma))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveLassoFit {
    pub path: SolutionPath,
    /// Lasso estimate the weights were built from.
    pub init: DVector<f64>,
    /// Penalty level of `init`, chosen by cross-validation.
    pub init_lambda: f64,
    pub gamma: f64,
    pub weights: DVector<f64>,
}

/// Adaptive Lasso path with weights from a cross-validated Lasso fit.
pub fn adaptive_lasso_path(problem: &RegressionProblem, config: &PenaltyConfig) -> Result<AdaptiveLassoFit> {
    problem.require_scaled()?;
    config.validate()?;
    let init_cfg = config.with_grid(lambda1_grid_from_max(
        problem.lambda_max(),
        DEFAULT_GRID_LENGTH,
        DEFAULT_FLOOR_RATIO,
    )?);
    let cv = cross_validate_path(problem, &init_cfg.lambda_grid, config.init_folds, config.init_seed, &|prob, grid| {
        lasso_path(prob, &init_cfg.with_grid(grid.to_vec()))
    })?;
    let full = lasso_path(problem, &init_cfg)?;
    let (init, _) = full
        .estimate_at(cv.chosen_lambda1)
        .ok_or_else(|| Error::InvalidArgument("empty Lasso path".into()))?;
    adaptive_lasso_from_init(problem, config, &init.beta, cv.chosen_lambda1)
}

/// Adaptive Lasso path from a given initial estimate.
pub fn adaptive_lasso_from_init(
    problem: &RegressionProblem,
    config: &PenaltyConfig,
    init: &DVector<f64>,
    init_lambda: f64,
) -> Result<AdaptiveLassoFit> {
    let weights = adaptive_weights(init, config.adaptive_gamma);
    let path = weighted_lasso_path(problem, config, &weights)?;
    Ok(AdaptiveLassoFit {
        path,
        init: init.clone(),
        init_lambda,
        gamma: config.adaptive_gamma,
        weights,
    })
}

/// Least squares restricted to the true support.
pub fn oracle_fit(problem: &RegressionProblem) -> Result<SparseEstimate> {
    let truth = problem.truth().ok_or(Error::MissingTruth)?;
    let support = truth.support().to_vec();
    let p = problem.p();
    if support.is_empty() {
        return Ok(SparseEstimate::zeros(p));
    }
    let gram = problem.design().gram_block(&support, &support);
    let eig = gram.clone().symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(min > 1e-12 * max.max(f64::MIN_POSITIVE)) {
        return Err(Error::Singular(format!(
            "Gram matrix on the true support has eigenvalue range [{min:e}, {max:e}]"
        )));
    }
    let rhs = DVector::from_iterator(support.len(), support.iter().map(|&j| problem.xty()[j]));
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Singular("Cholesky factorization failed on the true support".into()))?;
    let coef = chol.solve(&rhs);
    let mut beta = DVector::zeros(p);
    for (a, &j) in support.iter().enumerate() {
        beta[j] = coef[a];
    }
    let mut est = SparseEstimate::zeros(p);
    est.beta = beta;
    est.refresh();
    Ok(est)
}
