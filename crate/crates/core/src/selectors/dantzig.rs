use std::collections::BTreeMap;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::lp::{
    default_max_iters, restricted_dantzig_lp, solve_lp, solve_lp_warm, split_to_beta, BasisStatus, LpStatus,
    DEFAULT_LP_TOL,
};
use crate::types::{snap_zeros, RegressionProblem, SolutionPath, SparseEstimate, ZERO_SNAP};

/// Most indices added to the working set per round, per violation kind.
const ADD_PER_ROUND: usize = 16;
const DUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DantzigOptions {
    pub lp_tol: f64,
    pub feas_tol: f64,
}

impl Default for DantzigOptions {
    fn default() -> Self {
        Self {
            lp_tol: DEFAULT_LP_TOL,
            feas_tol: 1e-8,
        }
    }
}

/// Per-index basis statuses `[u_j, v_j, row_j]` of a restricted Dantzig LP.
pub(crate) type WarmBasis = BTreeMap<usize, [BasisStatus; 3]>;

/// Working set of a generation run with its final basis.
#[derive(Debug, Clone, Default)]
pub(crate) struct WorkingSet {
    pub indices: Vec<usize>,
    pub basis: WarmBasis,
}

pub(crate) struct RestrictedSolve {
    pub beta: DVector<f64>,
    pub duals: DVector<f64>,
    pub basis: WarmBasis,
}

/// Solves the Dantzig LP on the index set `set`, with rows and variables both
/// restricted to `set` and row bounds `bounds` (aligned with `set`).
///
/// Indices missing from `warm` start with `u_j, v_j` at zero and the row
/// logical basic, which completes a previous basis on a subset.
pub(crate) fn solve_restricted(
    problem: &RegressionProblem,
    set: &[usize],
    bounds: &[f64],
    lp_tol: f64,
    warm: Option<&WarmBasis>,
) -> std::result::Result<RestrictedSolve, LpStatus> {
    let k = set.len();
    let gram = problem.design().gram_block(set, set);
    let xty = DVector::from_iterator(k, set.iter().map(|&j| problem.xty()[j]));
    let b = DVector::from_row_slice(bounds);
    let lp = restricted_dantzig_lp(&gram, &xty, &b).map_err(|_| LpStatus::Infeasible)?;
    let max_iters = default_max_iters(&lp);
    let sol = match warm.filter(|w| !w.is_empty()) {
        Some(w) => {
            let mut start = vec![BasisStatus::AtLower; 3 * k];
            for (a, &j) in set.iter().enumerate() {
                let st = w
                    .get(&j)
                    .copied()
                    .unwrap_or([BasisStatus::AtLower, BasisStatus::AtLower, BasisStatus::Basic]);
                start[a] = st[0];
                start[k + a] = st[1];
                start[2 * k + a] = st[2];
            }
            solve_lp_warm(&lp, lp_tol, max_iters, &start)
        }
        None => solve_lp(&lp, lp_tol, max_iters),
    };
    if sol.status != LpStatus::Optimal {
        return Err(sol.status);
    }
    let basis = set
        .iter()
        .enumerate()
        .map(|(a, &j)| (j, [sol.basis[a], sol.basis[k + a], sol.basis[2 * k + a]]))
        .collect();
    Ok(RestrictedSolve {
        beta: split_to_beta(&sol.z),
        duals: sol.duals,
        basis,
    })
}

/// Largest positive excess of `|v_j|` over `limit_j`, by magnitude, outside `set`.
fn top_violators(
    values: &DVector<f64>,
    limit: impl Fn(usize) -> f64,
    in_set: &[bool],
    allowed: Option<&[bool]>,
    take: usize,
) -> Vec<usize> {
    let mut v: Vec<(usize, f64)> = values
        .iter()
        .enumerate()
        .filter(|(j, _)| !in_set[*j] && allowed.map_or(true, |a| a[*j]))
        .filter_map(|(j, &c)| {
            let excess = c.abs() - limit(j);
            (excess > 0.0).then_some((j, excess))
        })
        .collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    v.truncate(take);
    v.into_iter().map(|(j, _)| j).collect()
}

/// Exact Dantzig solve with per-coordinate bounds `b`, by row and column
/// generation around restricted LPs.
///
/// The working set `W` indexes both the LP rows and the LP variables. After
/// each restricted solve, rows outside `W` whose constraint is violated and
/// variables outside `W` with a negative reduced cost (`|G_{W,k}ᵀ y| > 1`) are
/// added. When neither exists, the restricted primal solution padded with
/// zeros and the restricted duals padded with zeros are feasible for the full
/// primal and dual, so the solution is optimal for the full problem.
///
/// With `allowed`, rows and variables are limited to the marked indices; the
/// residual then only counts those rows.
pub(crate) fn dantzig_working_set(
    problem: &RegressionProblem,
    bounds: &DVector<f64>,
    allowed: Option<&[bool]>,
    init: &WorkingSet,
    opts: &DantzigOptions,
) -> Result<(SparseEstimate, WorkingSet)> {
    let p = problem.p();
    let mut in_set = vec![false; p];
    let mut working: Vec<usize> = Vec::new();
    let mut basis = init.basis.clone();
    for &j in &init.indices {
        if j < p && !in_set[j] {
            in_set[j] = true;
            working.push(j);
        }
    }
    working.sort_unstable();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut beta = DVector::zeros(p);
        let mut dual_corr = None;
        if !working.is_empty() {
            let b: Vec<f64> = working.iter().map(|&j| bounds[j]).collect();
            let solve = solve_restricted(problem, &working, &b, opts.lp_tol, Some(&basis)).map_err(|status| Error::Lp {
                status,
                context: format!("restricted Dantzig LP on {} indices", working.len()),
            })?;
            basis = solve.basis;
            for (a, &j) in working.iter().enumerate() {
                beta[j] = solve.beta[a];
            }
            // G_{·,W} y through X_W y.
            let mut h = DVector::zeros(problem.n());
            for (a, &j) in working.iter().enumerate() {
                if solve.duals[a] != 0.0 {
                    h.axpy(solve.duals[a], &problem.design().values().column(j), 1.0);
                }
            }
            dual_corr = Some(problem.design().correlations(&h));
        }
        let corr = problem.residual_correlations(&beta);
        let mut add = top_violators(&corr, |j| bounds[j] + opts.feas_tol, &in_set, allowed, ADD_PER_ROUND);
        if let Some(g) = &dual_corr {
            for j in top_violators(g, |_| 1.0 + DUAL_TOL, &in_set, allowed, ADD_PER_ROUND) {
                if !add.contains(&j) {
                    add.push(j);
                }
            }
        }
        if add.is_empty() {
            snap_zeros(&mut beta, ZERO_SNAP);
            let residual = corr
                .iter()
                .enumerate()
                .filter(|(j, _)| allowed.map_or(true, |a| a[*j]))
                .map(|(j, c)| (c.abs() - bounds[j]).max(0.0))
                .fold(0.0, f64::max);
            let mut est = SparseEstimate::from_beta(beta);
            est.iterations = rounds;
            est.feasibility_residual = residual;
            return Ok((
                est,
                WorkingSet {
                    indices: working,
                    basis,
                },
            ));
        }
        for j in add {
            if !in_set[j] {
                in_set[j] = true;
                working.push(j);
            }
        }
        working.sort_unstable();
    }
}

/// Dantzig selector: `min ‖β‖₁` subject to `‖n⁻¹Xᵀ(y − Xβ)‖_∞ ≤ λ₁`.
pub fn dantzig_selector(problem: &RegressionProblem, lambda1: f64) -> Result<SparseEstimate> {
    dantzig_selector_with(problem, lambda1, &DantzigOptions::default())
}

pub fn dantzig_selector_with(
    problem: &RegressionProblem,
    lambda1: f64,
    opts: &DantzigOptions,
) -> Result<SparseEstimate> {
    problem.require_scaled()?;
    check_lambda(lambda1)?;
    let bounds = DVector::from_element(problem.p(), lambda1);
    dantzig_working_set(problem, &bounds, None, &WorkingSet::default(), opts).map(|(est, _)| est)
}

/// Dantzig selector with entries below `tau` in magnitude set to zero.
pub fn thresholded_dantzig(problem: &RegressionProblem, lambda1: f64, tau: f64) -> Result<SparseEstimate> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("threshold must be >= 0, got {tau}")));
    }
    let est = dantzig_selector(problem, lambda1)?;
    Ok(threshold_estimate(&est, tau))
}

/// Zeroes entries with `|β_j| < tau`; no refit.
pub fn threshold_estimate(est: &SparseEstimate, tau: f64) -> SparseEstimate {
    let mut out = est.clone();
    for b in out.beta.iter_mut() {
        if b.abs() < tau {
            *b = 0.0;
        }
    }
    out.refresh();
    out
}

/// Dantzig selector along a decreasing grid, reusing each working set as the
/// next starting set. The head entry is the zero solution at `λ_max`; grid
/// values at or above `λ_max` are skipped since zero solves them too.
pub fn dantzig_path(problem: &RegressionProblem, grid: &[f64], opts: &DantzigOptions) -> Result<SolutionPath> {
    problem.require_scaled()?;
    let lmax = problem.lambda_max();
    let mut path = SolutionPath::new();
    path.push(lmax, SparseEstimate::zeros(problem.p()))?;
    let mut working = WorkingSet::default();
    for (position, &lambda1) in grid.iter().enumerate().filter(|(_, &g)| g < lmax) {
        check_lambda(lambda1)?;
        let bounds = DVector::from_element(problem.p(), lambda1);
        let (est, w) = dantzig_working_set(problem, &bounds, None, &working, opts).map_err(|e| Error::PathFit {
            position,
            lambda1,
            source: Box::new(e),
        })?;
        working = w;
        path.push(lambda1, est)?;
    }
    Ok(path)
}

fn check_lambda(lambda1: f64) -> Result<()> {
    if lambda1 >= 0.0 && lambda1.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("lambda1 must be finite and >= 0, got {lambda1}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::DesignMatrix;
    use nalgebra::DMatrix;

    fn orthogonal(n: usize, y: &[f64]) -> RegressionProblem {
        let x = DesignMatrix::new(DMatrix::identity(n, n) * (n as f64).sqrt())
            .unwrap()
            .rescale_columns()
            .unwrap();
        RegressionProblem::new(x, DVector::from_row_slice(y), None).unwrap()
    }

    #[test]
    fn zero_at_lambda_max() {
        let prob = orthogonal(3, &[1.0, -2.0, 0.5]);
        let est = dantzig_selector(&prob, prob.lambda_max()).unwrap();
        assert!(est.support.is_empty());
    }

    #[test]
    fn interpolates_at_zero_lambda() {
        let prob = orthogonal(3, &[1.0, -2.0, 0.5]);
        let est = dantzig_selector(&prob, 0.0).unwrap();
        let expect = prob.design().values().tr_mul(prob.response()) / 3.0;
        assert!((est.beta - expect).amax() < 1e-12);
    }

    #[test]
    fn orthogonal_case_soft_thresholds() {
        // with G = I the constraint is |c_j - β_j| <= λ₁
        let prob = orthogonal(4, &[2.0, -1.0, 0.2, 0.0]);
        let lambda1 = 0.3;
        let est = dantzig_selector(&prob, lambda1).unwrap();
        for j in 0..4 {
            let c = prob.xty()[j];
            let soft = c.signum() * (c.abs() - lambda1).max(0.0);
            assert!((est.beta[j] - soft).abs() < 1e-12);
        }
    }

    #[test]
    fn threshold_rule() {
        let est = SparseEstimate::from_beta(DVector::from_vec(vec![0.5, -0.03, 0.2]));
        let t = threshold_estimate(&est, 0.1);
        assert_eq!(t.beta.as_slice(), &[0.5, 0.0, 0.2]);
        assert_eq!(t.support, vec![0, 2]);
        assert_eq!(threshold_estimate(&est, 0.0), est);
        assert!(threshold_estimate(&est, 0.6).support.is_empty());
    }

    #[test]
    fn rejects_unscaled_design() {
        let x = DesignMatrix::from_row_slice(2, 1, &[1.0, 2.0]).unwrap();
        let prob = RegressionProblem::new(x, DVector::from_vec(vec![1.0, 1.0]), None).unwrap();
        assert!(dantzig_selector(&prob, 0.1).is_err());
    }
}
