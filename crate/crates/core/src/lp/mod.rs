//! Dense linear programming for Dantzig-type problems.
//!
//! Problems have the form
//!
//! ```text
//! minimize cᵀz  subject to  l ≤ A z ≤ u,  z ≥ 0
//! ```
//!
//! with two-sided (range) rows handled natively by a bounded-variable revised
//! simplex method.

mod dantzig;
mod simplex;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dantzig::{dantzig_lp_reformulation, restricted_dantzig_lp, split_to_beta};

/// Default absolute feasibility and optimality tolerance.
pub const DEFAULT_LP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: DVector<f64>,
    constraint_matrix: DMatrix<f64>,
    lower_bounds: DVector<f64>,
    upper_bounds: DVector<f64>,
}

impl LpProblem {
    pub fn new(
        objective: DVector<f64>,
        constraint_matrix: DMatrix<f64>,
        lower_bounds: DVector<f64>,
        upper_bounds: DVector<f64>,
    ) -> Result<Self> {
        let (k, m) = constraint_matrix.shape();
        if objective.len() != m {
            return Err(Error::DimensionMismatch {
                what: "LP objective length",
                expected: m,
                got: objective.len(),
            });
        }
        if lower_bounds.len() != k || upper_bounds.len() != k {
            return Err(Error::DimensionMismatch {
                what: "LP row bounds length",
                expected: k,
                got: lower_bounds.len().min(upper_bounds.len()),
            });
        }
        let finite = |v: &f64| v.is_finite();
        if !objective.iter().all(finite)
            || !constraint_matrix.iter().all(finite)
            || !lower_bounds.iter().all(finite)
            || !upper_bounds.iter().all(finite)
        {
            return Err(Error::NonFinite("linear program data"));
        }
        if let Some(i) = (0..k).find(|&i| lower_bounds[i] > upper_bounds[i]) {
            return Err(Error::InvalidArgument(format!(
                "row {i} has lower bound {} above upper bound {}",
                lower_bounds[i], upper_bounds[i]
            )));
        }
        Ok(Self {
            objective,
            constraint_matrix,
            lower_bounds,
            upper_bounds,
        })
    }

    pub fn objective(&self) -> &DVector<f64> {
        &self.objective
    }

    pub fn constraint_matrix(&self) -> &DMatrix<f64> {
        &self.constraint_matrix
    }

    pub fn lower_bounds(&self) -> &DVector<f64> {
        &self.lower_bounds
    }

    pub fn upper_bounds(&self) -> &DVector<f64> {
        &self.upper_bounds
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.lower_bounds.len()
    }

    /// Largest bound or sign violation of `z`.
    pub fn max_violation(&self, z: &DVector<f64>) -> f64 {
        let act = &self.constraint_matrix * z;
        let rows = (0..self.num_rows())
            .map(|i| {
                (self.lower_bounds[i] - act[i])
                    .max(act[i] - self.upper_bounds[i])
                    .max(0.0)
            })
            .fold(0.0, f64::max);
        let signs = z.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max);
        rows.max(signs)
    }
}

/// Position of a variable relative to the basis. Structural variables come
/// first, then one logical variable per row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisStatus {
    Basic,
    AtLower,
    AtUpper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub z: DVector<f64>,
    pub objective_value: f64,
    pub status: LpStatus,
    pub iterations: usize,
    /// Row multipliers `y` with reduced costs `c − Aᵀy`; positive at active
    /// lower bounds, negative at active upper bounds.
    pub duals: DVector<f64>,
    /// `cᵀz` minus the dual objective; meaningful only when optimal.
    pub optimality_gap: f64,
    /// `max_j (Aᵀy − c)_j⁺`; zero up to tolerance at a certified optimum.
    pub dual_infeasibility: f64,
    /// Final basis, reusable as a warm start.
    pub basis: Vec<BasisStatus>,
}

/// Default iteration cap, `50 (m + k)`.
pub fn default_max_iters(problem: &LpProblem) -> usize {
    50 * (problem.num_vars() + problem.num_rows()).max(1)
}

/// Solves `problem` with the bounded-variable revised simplex method.
///
/// Infeasibility, unboundedness and the iteration cap are reported through
/// [`LpSolution::status`]; the iterate at termination is always returned.
pub fn solve_lp(problem: &LpProblem, tol: f64, max_iters: usize) -> LpSolution {
    simplex::Simplex::new(problem, tol).run(max_iters)
}

/// [`solve_lp`] from a starting basis. A basis of the wrong shape or a
/// singular one falls back to the all-logical start.
pub fn solve_lp_warm(problem: &LpProblem, tol: f64, max_iters: usize, warm: &[BasisStatus]) -> LpSolution {
    match simplex::Simplex::with_basis(problem, tol, warm) {
        Some(s) => s.run(max_iters),
        None => solve_lp(problem, tol, max_iters),
    }
}
