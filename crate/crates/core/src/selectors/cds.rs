//! Active-set algorithm for the constrained Dantzig selector.
//!
//! For a fixed `λ₁` the fit alternates two restricted linear programs. With
//! `A` the current support, the indices off `A` whose residual correlation
//! exceeds `λ₁` join `A`; the Dantzig problem on the enlarged set is solved
//! with bound `λ₀` on the old support and `λ₁` on the newcomers, and entries
//! below `λ` in magnitude are zeroed. The surviving support is then refit
//! with the uniform bound `λ₀`. The fit has converged once no index off the
//! support violates its `λ₁` bound, at which point the estimate is feasible
//! for the constrained problem and optimal restricted to its support.

use nalgebra::DVector;

use super::dantzig::{dantzig_working_set, solve_restricted, DantzigOptions, WorkingSet};
use crate::error::{Error, Result};
use crate::types::{
    snap_zeros, support_of, CdsConfig, RegressionProblem, SolutionPath, SparseEstimate, StopReason, ZERO_SNAP,
};

/// Largest restricted set solved as a single LP.
const DIRECT_LP_MAX: usize = 40;

/// Iterate of the active-set loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSetState {
    /// Sorted support of the current iterate.
    pub active: Vec<usize>,
    /// Coefficients on `active`; the iterate is zero elsewhere.
    pub beta_active: DVector<f64>,
    pub iteration: usize,
    pub violators_last: Vec<usize>,
}

impl ActiveSetState {
    fn from_beta(beta: &DVector<f64>, iteration: usize) -> Self {
        let active = support_of(beta);
        let beta_active = DVector::from_iterator(active.len(), active.iter().map(|&j| beta[j]));
        Self {
            active,
            beta_active,
            iteration,
            violators_last: Vec::new(),
        }
    }

    fn to_beta(&self, p: usize) -> DVector<f64> {
        let mut beta = DVector::zeros(p);
        for (a, &j) in self.active.iter().enumerate() {
            beta[j] = self.beta_active[a];
        }
        beta
    }
}

/// Indices outside `active` with `|n⁻¹x_jᵀ(y − Xβ)| > λ₁ + feas_tol`.
pub fn violation_scan(
    problem: &RegressionProblem,
    beta: &DVector<f64>,
    active: &[usize],
    lambda1: f64,
    feas_tol: f64,
) -> Vec<usize> {
    let corr = problem.residual_correlations(beta);
    scan_correlations(&corr, active, lambda1 + feas_tol)
}

fn scan_correlations(corr: &DVector<f64>, active: &[usize], limit: f64) -> Vec<usize> {
    let mut in_active = vec![false; corr.len()];
    for &j in active {
        in_active[j] = true;
    }
    corr.iter()
        .enumerate()
        .filter(|&(j, c)| !in_active[j] && c.abs() > limit)
        .map(|(j, _)| j)
        .collect()
}

/// Largest violation of the constrained Dantzig constraints: bound `λ₀` on
/// the support of `beta`, `λ₁` off it.
pub fn cds_feasibility_residual(corr: &DVector<f64>, beta: &DVector<f64>, lambda0: f64, lambda1: f64) -> f64 {
    corr.iter()
        .zip(beta.iter())
        .map(|(c, &b)| {
            let bound = if b != 0.0 { lambda0 } else { lambda1 };
            (c.abs() - bound).max(0.0)
        })
        .fold(0.0, f64::max)
}

/// Dantzig LP with rows and variables limited to `set` (sorted), returned
/// aligned with `set`. Large sets go through row and column generation.
fn restricted(
    problem: &RegressionProblem,
    lambda1: f64,
    set: &[usize],
    bounds: &[f64],
    config: &CdsConfig,
) -> Result<DVector<f64>> {
    let wrap = |status| Error::RestrictedLp {
        lambda1,
        active: set.to_vec(),
        status,
    };
    if set.len() <= DIRECT_LP_MAX {
        return solve_restricted(problem, set, bounds, config.lp_tol(), None).map(|s| s.beta).map_err(wrap);
    }
    let p = problem.p();
    let mut allowed = vec![false; p];
    let mut b = DVector::from_element(p, f64::INFINITY);
    for (&j, &bj) in set.iter().zip(bounds) {
        allowed[j] = true;
        b[j] = bj;
    }
    let opts = DantzigOptions {
        lp_tol: config.lp_tol(),
        feas_tol: config.feas_tol(),
    };
    let (est, _) = dantzig_working_set(problem, &b, Some(&allowed), &WorkingSet::default(), &opts).map_err(|e| match e {
        Error::Lp { status, .. } => wrap(status),
        other => other,
    })?;
    Ok(DVector::from_iterator(set.len(), set.iter().map(|&j| est.beta[j])))
}

/// Fits the constrained Dantzig selector at one `λ₁`, starting from `init`.
///
/// Returns the last iterate with `converged = false` when the iteration cap
/// is reached or the iterates revisit an earlier state, since the update is a
/// deterministic map and would cycle from then on.
pub fn cds_fit_single(
    problem: &RegressionProblem,
    lambda1: f64,
    config: &CdsConfig,
    init: &SparseEstimate,
) -> Result<SparseEstimate> {
    problem.require_scaled()?;
    let p = problem.p();
    if init.p() != p {
        return Err(Error::DimensionMismatch {
            what: "initial estimate length",
            expected: p,
            got: init.p(),
        });
    }
    if !(lambda1 >= config.lambda0()) {
        return Err(Error::InvalidArgument(format!(
            "lambda1 = {lambda1} is below lambda0 = {}",
            config.lambda0()
        )));
    }
    let (lambda0, lambda) = (config.lambda0(), config.lambda());
    let mut state = ActiveSetState::from_beta(&init.beta, 0);
    let mut history: Vec<(Vec<usize>, DVector<f64>)> = Vec::new();

    let (state, corr, converged) = loop {
        let beta = state.to_beta(p);
        let corr = problem.residual_correlations(&beta);
        let violators = scan_correlations(&corr, &state.active, lambda1 + config.feas_tol());
        if violators.is_empty() {
            break (state, corr, true);
        }
        let revisited = history
            .iter()
            .any(|(a, b)| *a == state.active && *b == state.beta_active);
        if state.iteration >= config.max_active_iters() || revisited {
            state.violators_last = violators;
            break (state, corr, false);
        }

        // Enlarged set: λ₀ on the current support, λ₁ on the violators.
        let mut set: Vec<(usize, f64)> = state.active.iter().map(|&j| (j, lambda0)).collect();
        set.extend(violators.iter().map(|&j| (j, lambda1)));
        set.sort_unstable_by_key(|&(j, _)| j);
        let idx: Vec<usize> = set.iter().map(|&(j, _)| j).collect();
        let bounds: Vec<f64> = set.iter().map(|&(_, b)| b).collect();
        let mut sub = restricted(problem, lambda1, &idx, &bounds, config)?;
        snap_zeros(&mut sub, ZERO_SNAP);
        for v in sub.iter_mut() {
            if v.abs() < lambda {
                *v = 0.0;
            }
        }
        let kept: Vec<usize> = idx.iter().zip(sub.iter()).filter(|(_, &v)| v != 0.0).map(|(&j, _)| j).collect();

        // Refit the surviving support with the uniform bound λ₀. Entries the
        // refit pulls below λ are dropped and the rest refit, so every
        // iterate stays in B_λ; the support shrinks each round.
        let mut kept = kept;
        let mut next = DVector::zeros(p);
        while !kept.is_empty() {
            let mut refit = restricted(problem, lambda1, &kept, &vec![lambda0; kept.len()], config)?;
            snap_zeros(&mut refit, ZERO_SNAP);
            if refit.iter().all(|v| *v == 0.0 || v.abs() >= lambda) {
                for (a, &j) in kept.iter().enumerate() {
                    next[j] = refit[a];
                }
                break;
            }
            kept = kept.iter().zip(refit.iter()).filter(|(_, v)| v.abs() >= lambda).map(|(&j, _)| j).collect();
        }
        let iteration = state.iteration + 1;
        history.push((state.active, state.beta_active));
        state = ActiveSetState::from_beta(&next, iteration);
        state.violators_last = violators;
    };

    let beta = state.to_beta(p);
    let mut est = SparseEstimate::from_beta(beta);
    est.iterations = state.iteration;
    est.converged = converged;
    est.feasibility_residual = cds_feasibility_residual(&corr, &est.beta, lambda0, lambda1);
    Ok(est)
}

/// Constrained Dantzig selector path over the configured `λ₁` grid.
///
/// The head is the zero solution at `λ_max = ‖n⁻¹Xᵀy‖_∞`; grid values at or
/// above `λ_max` are skipped. Each fit starts from the previous estimate and
/// is recorded with its convergence flag. The path stops at the first fit
/// outside `B_λ`, which is not recorded.
pub fn cds_path(problem: &RegressionProblem, config: &CdsConfig) -> Result<SolutionPath> {
    cds_path_until(problem, config, &mut |_| false)
}

/// [`cds_path`] that also stops, with [`StopReason::Halted`], after the first
/// recorded entry for which `halt` returns true.
pub fn cds_path_until(
    problem: &RegressionProblem,
    config: &CdsConfig,
    halt: &mut dyn FnMut(&SparseEstimate) -> bool,
) -> Result<SolutionPath> {
    problem.require_scaled()?;
    let lmax = problem.lambda_max();
    let mut path = SolutionPath::new();
    let mut prev = SparseEstimate::zeros(problem.p());
    path.push(lmax, prev.clone())?;
    for (position, &lambda1) in config.lambda1_grid().iter().enumerate() {
        if lambda1 >= lmax {
            continue;
        }
        let est = cds_fit_single(problem, lambda1, config, &prev).map_err(|e| Error::PathFit {
            position,
            lambda1,
            source: Box::new(e),
        })?;
        if !est.in_b_lambda(config.lambda()) {
            path.stop(StopReason::LeftBLambda);
            return Ok(path);
        }
        path.push(lambda1, est.clone())?;
        if halt(&est) {
            path.stop(StopReason::Halted);
            return Ok(path);
        }
        prev = est;
    }
    path.stop(StopReason::GridExhausted);
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::DesignMatrix;
    use nalgebra::DMatrix;

    fn orthogonal_problem(beta0: &[f64]) -> RegressionProblem {
        let n = beta0.len();
        let x = DesignMatrix::new(DMatrix::identity(n, n) * (n as f64).sqrt())
            .unwrap()
            .rescale_columns()
            .unwrap();
        let b = DVector::from_row_slice(beta0);
        let y = x.predict(&b);
        RegressionProblem::new(x, y, None).unwrap()
    }

    fn config(lambda0: f64, lambda: f64) -> CdsConfig {
        CdsConfig::builder().lambda0(lambda0).lambda(lambda).build().unwrap()
    }

    #[test]
    fn zero_at_lambda_max_without_iterations() {
        let prob = orthogonal_problem(&[1.0, 0.0, -0.5, 0.0]);
        let est = cds_fit_single(&prob, prob.lambda_max(), &config(0.01, 0.2), &SparseEstimate::zeros(4)).unwrap();
        assert!(est.support.is_empty());
        assert!(est.converged);
        assert_eq!(est.iterations, 0);
    }

    #[test]
    fn orthogonal_strong_signal_recovered() {
        let prob = orthogonal_problem(&[1.0, 0.0, 0.0, 0.0]);
        let est = cds_fit_single(&prob, 0.5, &config(0.01, 0.2), &SparseEstimate::zeros(4)).unwrap();
        assert!(est.converged);
        assert_eq!(est.support, vec![0]);
        // G = I: the λ₀ refit gives exactly 1 − λ₀
        assert!((est.beta[0] - 1.0).abs() <= 0.01 + 1e-12);
        assert!((est.beta[0] - 0.99).abs() < 1e-12);
    }

    #[test]
    fn threshold_keeps_entries_equal_to_lambda() {
        // G = I, step (c) gives c_j − λ₁ = 0.2 exactly on coordinate 0
        let prob = orthogonal_problem(&[0.7, 0.0]);
        let est = cds_fit_single(&prob, 0.5, &config(0.0, 0.2), &SparseEstimate::zeros(2)).unwrap();
        assert_eq!(est.support, vec![0]);
    }

    #[test]
    fn thresholding_everything_is_not_convergence() {
        // a signal weaker than λ keeps being thresholded away
        let prob = orthogonal_problem(&[0.3, 0.0]);
        let est = cds_fit_single(&prob, 0.2, &config(0.01, 0.5), &SparseEstimate::zeros(2)).unwrap();
        assert!(!est.converged);
        assert!(est.support.is_empty());
        assert!(est.iterations <= 2);
    }

    #[test]
    fn scan_on_zero_estimate() {
        let prob = orthogonal_problem(&[1.0, -0.5, 0.2, 0.0]);
        let zero = DVector::zeros(4);
        assert!(violation_scan(&prob, &zero, &[], prob.lambda_max(), 1e-8).is_empty());
        let v = violation_scan(&prob, &zero, &[], 0.9 * prob.lambda_max(), 1e-8);
        assert_eq!(v, vec![0]);
        assert!(violation_scan(&prob, &zero, &[0], 0.9 * prob.lambda_max(), 1e-8).is_empty());
    }

    #[test]
    fn path_head_is_zero_and_grid_decreases() {
        let prob = orthogonal_problem(&[1.0, -0.6, 0.0, 0.0]);
        let lmax = prob.lambda_max();
        let grid: Vec<f64> = (0..10).map(|i| lmax * 0.8f64.powi(i)).collect();
        let cfg = CdsConfig::builder().lambda0(0.01).lambda(0.2).lambda1_grid(grid).build().unwrap();
        let path = cds_path(&prob, &cfg).unwrap();
        assert_eq!(path.entries()[0].lambda1, lmax);
        assert!(path.entries()[0].estimate.support.is_empty());
        assert!(path.lambdas().windows(2).all(|w| w[1] < w[0]));
        for e in path.entries() {
            assert!(e.estimate.in_b_lambda(0.2));
        }
        for e in path.entries().iter().filter(|e| e.estimate.converged) {
            assert!(e.estimate.feasibility_residual <= cfg.feas_tol());
        }
    }
}
