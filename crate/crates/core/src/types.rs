//! Shared numerical data model: designs, problems, estimates and configurations.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries whose magnitude falls below this are stored as exact zeros.
pub const ZERO_SNAP: f64 = 1e-8;

/// Relative tolerance of the `‖x_j‖₂ = √n` column convention.
pub const SCALE_TOL: f64 = 1e-8;

/// Dense `n × p` design matrix.
///
/// Tracks the affine transform (optional centering, then per-column scaling)
/// that maps the columns it was built from onto the stored values, so that
/// held-out rows can be mapped into the same coordinate system.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    values: DMatrix<f64>,
    column_scaled: bool,
    scale: DVector<f64>,
    center: Option<DVector<f64>>,
}

impl DesignMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::InvalidArgument(format!(
                "design must be at least 1x1, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design matrix"));
        }
        let p = values.ncols();
        Ok(Self {
            values,
            column_scaled: false,
            scale: DVector::from_element(p, 1.0),
            center: None,
        })
    }

    /// Builds a design from row-major data.
    pub fn from_row_slice(n: usize, p: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * p {
            return Err(Error::DimensionMismatch {
                what: "row-major design data",
                expected: n * p,
                got: data.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(n, p, data))
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn is_column_scaled(&self) -> bool {
        self.column_scaled
    }

    /// Multiplicative factors applied to the source columns (after centering).
    pub fn scale_factors(&self) -> &DVector<f64> {
        &self.scale
    }

    pub fn centers(&self) -> Option<&DVector<f64>> {
        self.center.as_ref()
    }

    /// Rescales every column to Euclidean norm `√n`.
    ///
    /// Scale factors compose with any earlier transform, so a rescaled design
    /// still maps source coefficients back to original units.
    pub fn rescale_columns(&self) -> Result<Self> {
        let n = self.n();
        let target = (n as f64).sqrt();
        let mut values = self.values.clone();
        let mut scale = self.scale.clone();
        for (j, mut col) in values.column_iter_mut().enumerate() {
            let norm = col.norm();
            if norm == 0.0 {
                return Err(Error::ZeroNormColumn(j));
            }
            let factor = target / norm;
            col *= factor;
            scale[j] *= factor;
        }
        Ok(Self {
            values,
            column_scaled: true,
            scale,
            center: self.center.clone(),
        })
    }

    /// Optionally centers each column to mean zero, then rescales to norm `√n`.
    pub fn standardize_columns(&self, center: bool) -> Result<Self> {
        if !center {
            return self.rescale_columns();
        }
        if self.center.is_some() || self.scale.iter().any(|&s| s != 1.0) {
            return Err(Error::InvalidArgument(
                "centering must be applied to an untransformed design".into(),
            ));
        }
        let n = self.n() as f64;
        let means = DVector::from_iterator(self.p(), self.values.column_iter().map(|c| c.sum() / n));
        let mut values = self.values.clone();
        for (j, mut col) in values.column_iter_mut().enumerate() {
            col.add_scalar_mut(-means[j]);
        }
        let centered = Self {
            values,
            column_scaled: false,
            scale: self.scale.clone(),
            center: Some(means),
        };
        centered.rescale_columns()
    }

    /// Maps rows drawn from the same source as this design into its coordinates.
    pub fn transform_rows(&self, raw: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if raw.ncols() != self.p() {
            return Err(Error::ScaleMismatch(format!(
                "rows have {} columns, design has {}",
                raw.ncols(),
                self.p()
            )));
        }
        let mut out = raw.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            if let Some(c) = &self.center {
                col.add_scalar_mut(-c[j]);
            }
            col *= self.scale[j];
        }
        Ok(out)
    }

    /// Copies the given rows into a fresh, untransformed design.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n()) {
            return Err(Error::InvalidArgument(format!("row index {bad} out of range")));
        }
        Self::new(self.values.select_rows(rows))
    }

    /// `n⁻¹ Xᵀ r`.
    pub fn correlations(&self, r: &DVector<f64>) -> DVector<f64> {
        let n = self.n() as f64;
        let mut out = self.values.tr_mul(r);
        out /= n;
        out
    }

    /// `n⁻¹ x_jᵀ r`.
    pub fn column_correlation(&self, j: usize, r: &DVector<f64>) -> f64 {
        self.values.column(j).dot(r) / self.n() as f64
    }

    /// Block `n⁻¹ X_rowsᵀ X_cols` of the Gram matrix.
    pub fn gram_block(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        let n = self.n() as f64;
        let mut g = DMatrix::zeros(rows.len(), cols.len());
        for (b, &c) in cols.iter().enumerate() {
            let xc = self.values.column(c);
            for (a, &r) in rows.iter().enumerate() {
                g[(a, b)] = self.values.column(r).dot(&xc) / n;
            }
        }
        g
    }

    /// `X β`, touching only the nonzero coordinates.
    pub fn predict(&self, beta: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n());
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                out.axpy(b, &self.values.column(j), 1.0);
            }
        }
        out
    }
}

/// Ground-truth coefficients of a simulated problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueModel {
    beta0: DVector<f64>,
    support: Vec<usize>,
    sigma: f64,
}

impl TrueModel {
    pub fn new(beta0: DVector<f64>, sigma: f64) -> Result<Self> {
        if beta0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("true coefficients"));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("noise sd must be >= 0, got {sigma}")));
        }
        let support = support_of(&beta0);
        Ok(Self {
            beta0,
            support,
            sigma,
        })
    }

    pub fn beta0(&self) -> &DVector<f64> {
        &self.beta0
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn s(&self) -> usize {
        self.support.len()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Design, response and (for simulations) the true model.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionProblem {
    design: DesignMatrix,
    response: DVector<f64>,
    truth: Option<TrueModel>,
    xty: DVector<f64>,
}

impl RegressionProblem {
    pub fn new(design: DesignMatrix, response: DVector<f64>, truth: Option<TrueModel>) -> Result<Self> {
        if response.len() != design.n() {
            return Err(Error::DimensionMismatch {
                what: "response length",
                expected: design.n(),
                got: response.len(),
            });
        }
        if response.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response"));
        }
        if let Some(t) = &truth {
            if t.beta0.len() != design.p() {
                return Err(Error::DimensionMismatch {
                    what: "true coefficient length",
                    expected: design.p(),
                    got: t.beta0.len(),
                });
            }
            if t.s() > design.n().min(design.p()) {
                return Err(Error::InvalidArgument(format!(
                    "true model size {} exceeds min(n, p)",
                    t.s()
                )));
            }
        }
        let xty = design.correlations(&response);
        Ok(Self {
            design,
            response,
            truth,
            xty,
        })
    }

    pub fn design(&self) -> &DesignMatrix {
        &self.design
    }

    pub fn response(&self) -> &DVector<f64> {
        &self.response
    }

    pub fn truth(&self) -> Option<&TrueModel> {
        self.truth.as_ref()
    }

    pub fn n(&self) -> usize {
        self.design.n()
    }

    pub fn p(&self) -> usize {
        self.design.p()
    }

    /// `n⁻¹ Xᵀ y`.
    pub fn xty(&self) -> &DVector<f64> {
        &self.xty
    }

    /// `‖n⁻¹ Xᵀ y‖_∞`, the smallest `λ₁` at which zero is the Dantzig solution.
    pub fn lambda_max(&self) -> f64 {
        self.xty.amax()
    }

    /// `y − X β`.
    pub fn residual(&self, beta: &DVector<f64>) -> DVector<f64> {
        &self.response - self.design.predict(beta)
    }

    /// `n⁻¹ Xᵀ (y − X β)`.
    pub fn residual_correlations(&self, beta: &DVector<f64>) -> DVector<f64> {
        self.design.correlations(&self.residual(beta))
    }

    pub(crate) fn require_scaled(&self) -> Result<()> {
        if self.design.is_column_scaled() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(
                "design columns must be rescaled to norm sqrt(n) first".into(),
            ))
        }
    }
}

/// Centers and scales `y` to mean 0 and population variance 1.
pub fn standardize_response(y: &DVector<f64>) -> Result<(DVector<f64>, f64, f64)> {
    if y.len() < 2 {
        return Err(Error::InvalidArgument("need at least two responses".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("response"));
    }
    let n = y.len() as f64;
    let mean = y.sum() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd == 0.0 || sd <= 1e-300 {
        return Err(Error::ConstantVector);
    }
    Ok((y.map(|v| (v - mean) / sd), mean, sd))
}

/// Sorted indices of the nonzero entries.
pub fn support_of(beta: &DVector<f64>) -> Vec<usize> {
    beta.iter()
        .enumerate()
        .filter(|(_, &b)| b != 0.0)
        .map(|(j, _)| j)
        .collect()
}

/// Regularization triple and solver controls for the constrained Dantzig selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdsConfig {
    lambda0: f64,
    lambda: f64,
    lambda1_grid: Vec<f64>,
    cv_folds: usize,
    max_active_iters: usize,
    feas_tol: f64,
    lp_tol: f64,
}

impl CdsConfig {
    pub fn builder() -> CdsConfigBuilder {
        CdsConfigBuilder::default()
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lambda1_grid(&self) -> &[f64] {
        &self.lambda1_grid
    }

    pub fn cv_folds(&self) -> usize {
        self.cv_folds
    }

    pub fn max_active_iters(&self) -> usize {
        self.max_active_iters
    }

    pub fn feas_tol(&self) -> f64 {
        self.feas_tol
    }

    pub fn lp_tol(&self) -> f64 {
        self.lp_tol
    }

    /// Same controls on a different `λ₁` grid.
    pub fn with_grid(&self, grid: Vec<f64>) -> Result<Self> {
        let mut b = CdsConfigBuilder::from(self.clone());
        b.lambda1_grid = grid;
        b.build()
    }
}

#[derive(Debug, Clone)]
pub struct CdsConfigBuilder {
    lambda0: f64,
    lambda: f64,
    lambda1_grid: Vec<f64>,
    cv_folds: usize,
    max_active_iters: usize,
    feas_tol: f64,
    lp_tol: f64,
}

impl Default for CdsConfigBuilder {
    fn default() -> Self {
        Self {
            lambda0: 0.01,
            lambda: 0.2,
            lambda1_grid: Vec::new(),
            cv_folds: 5,
            max_active_iters: 100,
            feas_tol: 1e-8,
            lp_tol: 1e-9,
        }
    }
}

impl From<CdsConfig> for CdsConfigBuilder {
    fn from(c: CdsConfig) -> Self {
        Self {
            lambda0: c.lambda0,
            lambda: c.lambda,
            lambda1_grid: c.lambda1_grid,
            cv_folds: c.cv_folds,
            max_active_iters: c.max_active_iters,
            feas_tol: c.feas_tol,
            lp_tol: c.lp_tol,
        }
    }
}

impl CdsConfigBuilder {
    pub fn lambda0(mut self, v: f64) -> Self {
        self.lambda0 = v;
        self
    }

    pub fn lambda(mut self, v: f64) -> Self {
        self.lambda = v;
        self
    }

    pub fn lambda1_grid(mut self, grid: Vec<f64>) -> Self {
        self.lambda1_grid = grid;
        self
    }

    pub fn cv_folds(mut self, k: usize) -> Self {
        self.cv_folds = k;
        self
    }

    pub fn max_active_iters(mut self, k: usize) -> Self {
        self.max_active_iters = k;
        self
    }

    pub fn feas_tol(mut self, v: f64) -> Self {
        self.feas_tol = v;
        self
    }

    pub fn lp_tol(mut self, v: f64) -> Self {
        self.lp_tol = v;
        self
    }

    pub fn build(self) -> Result<CdsConfig> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.lambda0 >= 0.0 && self.lambda0.is_finite()) {
            return bad(format!("lambda0 must be finite and >= 0, got {}", self.lambda0));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be finite and >= 0, got {}", self.lambda));
        }
        if self.lambda1_grid.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
            return bad("lambda1 grid entries must be finite and positive".into());
        }
        if self.lambda1_grid.windows(2).any(|w| w[1] >= w[0]) {
            return bad("lambda1 grid must be strictly decreasing".into());
        }
        if let Some(&min) = self.lambda1_grid.last() {
            if self.lambda0 > min {
                return bad(format!(
                    "lambda0 = {} exceeds the smallest lambda1 = {min}",
                    self.lambda0
                ));
            }
        }
        if self.cv_folds < 2 {
            return bad(format!("cv_folds must be >= 2, got {}", self.cv_folds));
        }
        if self.max_active_iters < 1 {
            return bad("max_active_iters must be >= 1".into());
        }
        if !(self.feas_tol > 0.0) || !(self.lp_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        Ok(CdsConfig {
            lambda0: self.lambda0,
            lambda: self.lambda,
            lambda1_grid: self.lambda1_grid,
            cv_folds: self.cv_folds,
            max_active_iters: self.max_active_iters,
            feas_tol: self.feas_tol,
            lp_tol: self.lp_tol,
        })
    }
}

/// A sparse coefficient vector with fit diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseEstimate {
    pub beta: DVector<f64>,
    pub support: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    /// Largest violation of the fitted constraints, `max_j (|n⁻¹x_jᵀr| − b_j)⁺`.
    pub feasibility_residual: f64,
    pub l1_norm: f64,
}

impl SparseEstimate {
    pub fn zeros(p: usize) -> Self {
        Self::from_beta(DVector::zeros(p))
    }

    /// Wraps `beta`, snapping entries below [`ZERO_SNAP`] to exact zeros.
    pub fn from_beta(mut beta: DVector<f64>) -> Self {
        snap_zeros(&mut beta, ZERO_SNAP);
        let support = support_of(&beta);
        let l1_norm = beta.lp_norm(1);
        Self {
            beta,
            support,
            iterations: 0,
            converged: true,
            feasibility_residual: 0.0,
            l1_norm,
        }
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    /// Whether every nonzero has magnitude at least `lambda`.
    pub fn in_b_lambda(&self, lambda: f64) -> bool {
        self.support.iter().all(|&j| self.beta[j].abs() >= lambda)
    }

    pub(crate) fn refresh(&mut self) {
        self.support = support_of(&self.beta);
        self.l1_norm = self.beta.lp_norm(1);
    }
}

pub(crate) fn snap_zeros(beta: &mut DVector<f64>, tol: f64) {
    for b in beta.iter_mut() {
        if b.abs() < tol {
            *b = 0.0;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    GridExhausted,
    LeftBLambda,
    /// A caller-supplied predicate ended the path.
    Halted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEntry {
    pub lambda1: f64,
    pub estimate: SparseEstimate,
}

/// Estimates along a strictly decreasing tuning grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionPath {
    entries: Vec<PathEntry>,
    pub stopped_early: bool,
    pub stop_reason: StopReason,
}

impl Default for SolutionPath {
    fn default() -> Self {
        Self::new()
    }
}

impl SolutionPath {
    pub fn new() -> Self {
        Self {
            entries: Vec::new(),
            stopped_early: false,
            stop_reason: StopReason::GridExhausted,
        }
    }

    /// Appends an entry; `lambda1` must be strictly below the previous one.
    pub fn push(&mut self, lambda1: f64, estimate: SparseEstimate) -> Result<()> {
        if let Some(last) = self.entries.last() {
            if !(lambda1 < last.lambda1) {
                return Err(Error::InvalidArgument(format!(
                    "path grid must be strictly decreasing: {lambda1} after {}",
                    last.lambda1
                )));
            }
        }
        self.entries.push(PathEntry { lambda1, estimate });
        Ok(())
    }

    pub fn stop(&mut self, reason: StopReason) {
        self.stopped_early = reason != StopReason::GridExhausted;
        self.stop_reason = reason;
    }

    pub fn entries(&self) -> &[PathEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.lambda1).collect()
    }

    /// Estimate in force at tuning value `lambda1`.
    ///
    /// Returns the entry with the largest grid value `≤ lambda1`; values above the
    /// head map to the head. The flag is true when `lambda1` lies past the last
    /// recorded entry of an early-stopped path and the estimate is inherited.
    pub fn estimate_at(&self, lambda1: f64) -> Option<(&SparseEstimate, bool)> {
        let first = self.entries.first()?;
        if lambda1 >= first.lambda1 {
            return Some((&first.estimate, false));
        }
        let tol = 1e-12 * lambda1.abs().max(1.0);
        match self.entries.iter().position(|e| e.lambda1 <= lambda1 + tol) {
            Some(i) => Some((&self.entries[i].estimate, false)),
            None => {
                let last = self.entries.last()?;
                Some((&last.estimate, self.stopped_early))
            }
        }
    }
}
