//! JSON experiment configurations.
//!
//! Every config carries an explicit `seed`; defaults only cover settings that
//! do not affect random number streams. Unknown fields are rejected.

use std::path::Path;

use cds_core::baselines::PenaltyConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{ExpError, Result};
use crate::methods::Method;

fn default_p() -> usize {
    1000
}
fn default_n() -> usize {
    100
}
fn default_correlation() -> f64 {
    0.5
}
fn default_sigma() -> f64 {
    0.4
}
fn default_folds() -> usize {
    5
}
fn default_test_size() -> usize {
    10_000
}
fn default_lambda0() -> f64 {
    0.01
}
fn default_lambda() -> f64 {
    0.2
}
fn default_grid_length() -> usize {
    cds_core::tuning::DEFAULT_GRID_LENGTH
}
fn default_floor_ratio() -> f64 {
    cds_core::tuning::DEFAULT_FLOOR_RATIO
}
fn default_strong_threshold() -> f64 {
    cds_core::metrics::DEFAULT_STRONG_THRESHOLD
}
fn default_sim1_lambda0_grid() -> Vec<f64> {
    vec![0.001, 0.005, 0.01, 0.05, 0.1]
}
fn default_sim1_lambda_grid() -> Vec<f64> {
    vec![0.05, 0.1, 0.15, 0.2]
}
fn default_sim2_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn default_sim1_methods() -> Vec<Method> {
    vec![Method::Ds, Method::Tds, Method::Lasso, Method::Enet, Method::ALasso, Method::Cds]
}
fn default_split_methods() -> Vec<Method> {
    vec![Method::Ds, Method::Tds, Method::Lasso, Method::Enet, Method::ALasso, Method::Cds]
}

/// Settings shared by every tuned fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningSettings {
    #[serde(default = "default_lambda0")]
    pub lambda0: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// Threshold of the thresholded Dantzig selector; defaults to `lambda`.
    #[serde(default)]
    pub tds_threshold: Option<f64>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_grid_length")]
    pub grid_length: usize,
    #[serde(default = "default_floor_ratio")]
    pub floor_ratio: f64,
    #[serde(default)]
    pub penalty: PenaltyConfig,
}

impl Default for TuningSettings {
    fn default() -> Self {
        Self {
            lambda0: default_lambda0(),
            lambda: default_lambda(),
            tds_threshold: None,
            folds: default_folds(),
            grid_length: default_grid_length(),
            floor_ratio: default_floor_ratio(),
            penalty: PenaltyConfig::default(),
        }
    }
}

impl TuningSettings {
    pub fn tds_threshold(&self) -> f64 {
        self.tds_threshold.unwrap_or(self.lambda)
    }

    pub fn validate(&self) -> Result<()> {
        positive("lambda0", self.lambda0)?;
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(field("lambda", "must be a finite nonnegative number"));
        }
        if !(self.tds_threshold() >= 0.0 && self.tds_threshold().is_finite()) {
            return Err(field("tds_threshold", "must be a finite nonnegative number"));
        }
        if self.folds < 2 {
            return Err(field("folds", "must be at least 2"));
        }
        if self.grid_length < 2 {
            return Err(field("grid_length", "must be at least 2"));
        }
        if !(self.floor_ratio > 0.0 && self.floor_ratio < 1.0) {
            return Err(field("floor_ratio", "must lie in (0, 1)"));
        }
        self.penalty.validate().map_err(|e| field("penalty", &e.to_string()))
    }
}

/// Exact-recovery curves on noiseless equicorrelated designs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sim1Config {
    pub seed: u64,
    #[serde(default = "default_p")]
    pub p: usize,
    pub n_values: Vec<usize>,
    pub correlations: Vec<f64>,
    pub replications: usize,
    #[serde(default = "default_sim1_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_sim1_lambda0_grid")]
    pub lambda0_grid: Vec<f64>,
    #[serde(default = "default_sim1_lambda_grid")]
    pub lambda_grid: Vec<f64>,
    #[serde(default = "default_grid_length")]
    pub grid_length: usize,
    #[serde(default = "default_floor_ratio")]
    pub floor_ratio: f64,
    #[serde(default)]
    pub penalty: PenaltyConfig,
}

/// Performance measures on the noisy AR(1) design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sim2Config {
    pub seed: u64,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_correlation")]
    pub correlation: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    pub replications: usize,
    #[serde(default = "default_sim2_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    #[serde(default = "default_strong_threshold")]
    pub strong_threshold: f64,
    #[serde(default)]
    pub tuning: TuningSettings,
}

/// Prediction error of the constrained Dantzig selector over a `(λ₀, λ)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustConfig {
    pub seed: u64,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_correlation")]
    pub correlation: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    pub replications: usize,
    pub lambda0_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    #[serde(default)]
    pub tuning: TuningSettings,
}

/// Repeated random train/test splits of a user dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitEvalConfig {
    pub seed: u64,
    pub response: String,
    pub train_size: usize,
    pub splits: usize,
    #[serde(default = "default_split_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub tuning: TuningSettings,
}

/// Single-dataset fitting for `fit`, `path` and `cv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub seed: u64,
    pub response: String,
    /// Fixed `λ₁` for `fit`; absent means cross-validation picks it.
    #[serde(default)]
    pub lambda1: Option<f64>,
    #[serde(default)]
    pub tuning: TuningSettings,
}

fn field(name: &str, msg: &str) -> ExpError {
    ExpError::Config(format!("field `{name}`: {msg}"))
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(field(name, "must be a finite positive number"))
    }
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        Err(field(name, "must not be empty"))
    } else {
        Ok(())
    }
}

fn correlation(name: &str, r: f64) -> Result<()> {
    if (0.0..1.0).contains(&r) {
        Ok(())
    } else {
        Err(field(name, "correlations must lie in [0, 1)"))
    }
}

fn grid(name: &str, g: &[f64]) -> Result<()> {
    nonempty(name, g)?;
    if g.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
        return Err(field(name, "values must be finite and nonnegative"));
    }
    Ok(())
}

impl Sim1Config {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(field("replications", "must be at least 1"));
        }
        nonempty("n_values", &self.n_values)?;
        if self.n_values.iter().any(|&n| n < 2) {
            return Err(field("n_values", "sample sizes must be at least 2"));
        }
        nonempty("correlations", &self.correlations)?;
        for &r in &self.correlations {
            correlation("correlations", r)?;
        }
        nonempty("methods", &self.methods)?;
        if self.methods.contains(&Method::Oracle) {
            return Err(field("methods", "Oracle recovers by construction and is not a recovery method"));
        }
        if self.p < 7 {
            return Err(field("p", "must be at least the 7 true coefficients"));
        }
        grid("lambda0_grid", &self.lambda0_grid)?;
        if self.lambda0_grid.contains(&0.0) {
            return Err(field("lambda0_grid", "values must be positive"));
        }
        grid("lambda_grid", &self.lambda_grid)?;
        if self.grid_length < 2 {
            return Err(field("grid_length", "must be at least 2"));
        }
        if !(self.floor_ratio > 0.0 && self.floor_ratio < 1.0) {
            return Err(field("floor_ratio", "must lie in (0, 1)"));
        }
        self.penalty.validate().map_err(|e| field("penalty", &e.to_string()))
    }
}

fn check_ar1(p: usize, n: usize, r: f64, sigma: f64, replications: usize, test_size: usize) -> Result<()> {
    if replications < 2 {
        return Err(field("replications", "must be at least 2 for standard errors"));
    }
    if p < 36 {
        return Err(field("p", "must cover the 36 leading coefficients"));
    }
    if n < 2 {
        return Err(field("n", "must be at least 2"));
    }
    correlation("correlation", r)?;
    positive("sigma", sigma)?;
    if test_size == 0 {
        return Err(field("test_size", "must be at least 1"));
    }
    Ok(())
}

impl Sim2Config {
    pub fn validate(&self) -> Result<()> {
        check_ar1(self.p, self.n, self.correlation, self.sigma, self.replications, self.test_size)?;
        nonempty("methods", &self.methods)?;
        positive("strong_threshold", self.strong_threshold)?;
        if self.tuning.folds > self.n {
            return Err(field("tuning.folds", "must not exceed n"));
        }
        self.tuning.validate()
    }
}

impl RobustConfig {
    pub fn validate(&self) -> Result<()> {
        check_ar1(self.p, self.n, self.correlation, self.sigma, self.replications, self.test_size)?;
        grid("lambda0_grid", &self.lambda0_grid)?;
        if self.lambda0_grid.contains(&0.0) {
            return Err(field("lambda0_grid", "values must be positive"));
        }
        grid("lambda_grid", &self.lambda_grid)?;
        if self.tuning.folds > self.n {
            return Err(field("tuning.folds", "must not exceed n"));
        }
        self.tuning.validate()
    }
}

impl SplitEvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.splits == 0 {
            return Err(field("splits", "must be at least 1"));
        }
        if self.train_size < self.tuning.folds {
            return Err(field("train_size", "must be at least the number of folds"));
        }
        nonempty("methods", &self.methods)?;
        if self.methods.contains(&Method::Oracle) {
            return Err(field("methods", "Oracle needs a known true model"));
        }
        self.tuning.validate()
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(l1) = self.lambda1 {
            positive("lambda1", l1)?;
            if l1 < self.tuning.lambda0 {
                return Err(field("lambda1", "must be at least lambda0"));
            }
        }
        self.tuning.validate()
    }
}

/// Parses a config from JSON text; syntax and schema errors carry line and column.
pub fn parse_config<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| ExpError::Config(e.to_string()))
}

pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| ExpError::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        ExpError::Config(msg) => ExpError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
