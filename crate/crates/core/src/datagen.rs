//! Seeded Gaussian designs for the simulation studies.
//!
//! Rows are drawn i.i.d. from `N(0, Σ)` through exact factorizations:
//!
//! * equicorrelated `Γ_r` (unit diagonal, off-diagonal `r`) via the one-factor
//!   form `x_j = √r·z + √(1−r)·w_j`;
//! * AR(1) `Σ_{ij} = ρ^{|i−j|}` via `x_1 = w_1`, `x_j = ρ·x_{j−1} + √(1−ρ²)·w_j`.
//!
//! Each row consumes its normals in column order (the shared factor first for
//! the equicorrelated design); the noise vector is drawn after the design.
//! Columns are rescaled to norm `√n` before the response `y = Xβ₀ + σε` is
//! formed, so `β₀` lives in the scaled coordinates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::types::{DesignMatrix, RegressionProblem, TrueModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignKind {
    Equicorrelated,
    Ar1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimDesign {
    pub kind: DesignKind,
    pub n: usize,
    pub p: usize,
    pub correlation: f64,
    pub truth: TrueModel,
    pub noiseless: bool,
    pub seed: u64,
}

impl SimDesign {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.correlation) {
            return Err(Error::InvalidArgument(format!(
                "correlation must lie in [0, 1), got {}",
                self.correlation
            )));
        }
        if self.n == 0 || self.p == 0 {
            return Err(Error::InvalidArgument("n and p must be positive".into()));
        }
        if self.truth.beta0().len() != self.p {
            return Err(Error::DimensionMismatch {
                what: "true coefficient length",
                expected: self.p,
                got: self.truth.beta0().len(),
            });
        }
        Ok(())
    }

    /// Same design with a different seed, e.g. `seed + replication`.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    fn sample_row(&self, rng: &mut SimRng, row: &mut [f64]) {
        let r = self.correlation;
        match self.kind {
            DesignKind::Equicorrelated => {
                let z = r.sqrt() * rng.normal();
                let s = (1.0 - r).sqrt();
                for v in row.iter_mut() {
                    *v = z + s * rng.normal();
                }
            }
            DesignKind::Ar1 => {
                let s = (1.0 - r * r).sqrt();
                let mut prev = rng.normal();
                row[0] = prev;
                for v in row.iter_mut().skip(1) {
                    prev = r * prev + s * rng.normal();
                    *v = prev;
                }
            }
        }
    }

    fn noise_sd(&self) -> f64 {
        if self.noiseless {
            0.0
        } else {
            self.truth.sigma()
        }
    }
}

/// Example 1 coefficients: `(1, −0.5, 0.7, −1.2, −0.9, 0.3, 0.55)` then zeros.
pub fn example1_beta0(p: usize) -> DVector<f64> {
    let head = [1.0, -0.5, 0.7, -1.2, -0.9, 0.3, 0.55];
    DVector::from_fn(p, |j, _| head.get(j).copied().unwrap_or(0.0))
}

/// Example 2 coefficients: `(β_strong, β_weak)` repeated three times then zeros,
/// with `β_strong = (0.6, 0, 0, −0.6, 0, 0)` and `β_weak = (0.05, 0, 0, −0.05, 0, 0)`.
pub fn example2_beta0(p: usize) -> DVector<f64> {
    let v = [0.6, 0.0, 0.0, -0.6, 0.0, 0.0, 0.05, 0.0, 0.0, -0.05, 0.0, 0.0];
    DVector::from_fn(p, |j, _| if j < 36 { v[j % 12] } else { 0.0 })
}

/// Raw (unscaled) design rows.
fn raw_design(design: &SimDesign, rng: &mut SimRng, rows: usize) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(rows, design.p);
    let mut row = vec![0.0; design.p];
    for i in 0..rows {
        design.sample_row(rng, &mut row);
        for (j, &v) in row.iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    x
}

fn generate_problem(design: &SimDesign) -> Result<RegressionProblem> {
    design.validate()?;
    let mut rng = SimRng::seed_from_u64(design.seed);
    let raw = raw_design(design, &mut rng, design.n);
    let x = DesignMatrix::new(raw)?.rescale_columns()?;
    let mut y = x.predict(design.truth.beta0());
    let sd = design.noise_sd();
    if sd > 0.0 {
        for v in y.iter_mut() {
            *v += sd * rng.normal();
        }
    }
    RegressionProblem::new(x, y, Some(design.truth.clone()))
}

fn require_kind(design: &SimDesign, kind: DesignKind) -> Result<()> {
    if design.kind == kind {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "design kind is {:?}, expected {:?}",
            design.kind, kind
        )))
    }
}

pub fn generate_equicorrelated(design: &SimDesign) -> Result<RegressionProblem> {
    require_kind(design, DesignKind::Equicorrelated)?;
    generate_problem(design)
}

pub fn generate_ar1(design: &SimDesign) -> Result<RegressionProblem> {
    require_kind(design, DesignKind::Ar1)?;
    generate_problem(design)
}

pub fn generate(design: &SimDesign) -> Result<RegressionProblem> {
    generate_problem(design)
}

/// Seed of the independent test sample paired with a training seed.
pub fn test_sample_seed(train_seed: u64) -> u64 {
    train_seed ^ 0x9E37_79B9_7F4A_7C15
}

/// Monte-Carlo prediction errors `E(Y − xᵀβ̂)²` for several estimates on one
/// fresh sample of `size` rows.
///
/// Test rows are mapped with the training scale factors `scale`, since the
/// estimates and `β₀` are expressed in the training design's coordinates.
pub fn prediction_errors(
    design: &SimDesign,
    scale: &DVector<f64>,
    size: usize,
    seed: u64,
    estimates: &[&DVector<f64>],
) -> Result<Vec<f64>> {
    design.validate()?;
    if scale.len() != design.p {
        return Err(Error::ScaleMismatch(format!(
            "{} scale factors for {} columns",
            scale.len(),
            design.p
        )));
    }
    if size == 0 {
        return Err(Error::InvalidArgument("test sample size must be positive".into()));
    }
    let sparse = |beta: &DVector<f64>| -> Vec<(usize, f64)> {
        beta.iter()
            .enumerate()
            .filter(|(_, &b)| b != 0.0)
            .map(|(j, &b)| (j, b * scale[j]))
            .collect()
    };
    let truth = sparse(design.truth.beta0());
    let mut fits = Vec::with_capacity(estimates.len());
    for est in estimates {
        if est.len() != design.p {
            return Err(Error::DimensionMismatch {
                what: "estimate length",
                expected: design.p,
                got: est.len(),
            });
        }
        fits.push(sparse(est));
    }
    let sd = design.noise_sd();
    let mut rng = SimRng::seed_from_u64(seed);
    let mut row = vec![0.0; design.p];
    let mut sums = vec![0.0; estimates.len()];
    for _ in 0..size {
        design.sample_row(&mut rng, &mut row);
        let mean: f64 = truth.iter().map(|&(j, b)| row[j] * b).sum();
        let y = mean + sd * rng.normal();
        for (sum, fit) in sums.iter_mut().zip(&fits) {
            let pred: f64 = fit.iter().map(|&(j, b)| row[j] * b).sum();
            *sum += (y - pred).powi(2);
        }
    }
    Ok(sums.into_iter().map(|s| s / size as f64).collect())
}

/// Prediction error of a single estimate on the design's paired test sample.
pub fn make_test_sample(design: &SimDesign, scale: &DVector<f64>, size: usize, beta_hat: &DVector<f64>) -> Result<f64> {
    prediction_errors(design, scale, size, test_sample_seed(design.seed), &[beta_hat]).map(|v| v[0])
}
