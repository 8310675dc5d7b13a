//! Repeated random train/test splits of a user dataset.
//!
//! Each split centers and rescales the training covariates, centers the
//! training response, and maps the test rows with the training transform.

use cds_core::rng::SimRng;
use cds_core::types::{DesignMatrix, RegressionProblem};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::config::SplitEvalConfig;
use crate::data::Dataset;
use crate::error::{ExpError, Result};
use crate::methods::{tuned_fit, Method};
use crate::output::{replication_seed, run_indexed};

/// Per-method summary; the test compares the constrained Dantzig selector
/// against the method, paired by split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRow {
    pub method: String,
    pub splits: usize,
    pub pe_mean: f64,
    pub pe_se: f64,
    pub median_model_size: f64,
    pub t_statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub zero_variance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitDetail {
    pub split: usize,
    pub seed: u64,
    pub method: String,
    pub pe: f64,
    pub model_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedT {
    pub t: Option<f64>,
    pub p_value: f64,
    /// The paired differences were all equal.
    pub zero_variance: bool,
}

/// Two-sided paired t-test of `a − b`.
///
/// Constant differences give `p = 1` when they are zero and `p = 0` otherwise.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedT> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(ExpError::Data(format!("paired test needs two equal samples of size >= 2, got {} and {}", a.len(), b.len())));
    }
    let m = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / m;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    if var == 0.0 {
        return Ok(PairedT {
            t: None,
            p_value: if mean == 0.0 { 1.0 } else { 0.0 },
            zero_variance: true,
        });
    }
    let t = mean / (var / m).sqrt();
    let dist = StudentsT::new(0.0, 1.0, m - 1.0).map_err(|e| ExpError::Numerical(e.to_string()))?;
    Ok(PairedT {
        t: Some(t),
        p_value: (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0),
        zero_variance: false,
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

/// Test prediction errors and model sizes of every method on one split.
fn one_split(ds: &Dataset, cfg: &SplitEvalConfig, seed: u64) -> Result<Vec<(f64, usize)>> {
    let mut order: Vec<usize> = (0..ds.n()).collect();
    SimRng::seed_from_u64(seed).shuffle(&mut order);
    let (train, test) = order.split_at(cfg.train_size);
    let x_train = DesignMatrix::new(ds.x.select_rows(train))?.standardize_columns(true)?;
    let y_train = DVector::from_iterator(train.len(), train.iter().map(|&i| ds.y[i]));
    let y_mean = y_train.mean();
    let x_test = x_train.transform_rows(&ds.x.select_rows(test))?;
    let y_test = DVector::from_iterator(test.len(), test.iter().map(|&i| ds.y[i] - y_mean));
    let problem = RegressionProblem::new(x_train, y_train.add_scalar(-y_mean), None)?;
    cfg.methods
        .iter()
        .map(|&m| {
            let fit = tuned_fit(m, &problem, &cfg.tuning, seed)?;
            let resid = &y_test - &x_test * &fit.estimate.beta;
            Ok((resid.norm_squared() / test.len() as f64, fit.estimate.support.len()))
        })
        .collect()
}

pub fn run_split_eval(ds: &Dataset, cfg: &SplitEvalConfig, workers: usize) -> Result<(Vec<SplitRow>, Vec<SplitDetail>)> {
    cfg.validate()?;
    if cfg.train_size >= ds.n() {
        return Err(ExpError::Data(format!(
            "train_size {} leaves no test rows out of {}",
            cfg.train_size,
            ds.n()
        )));
    }
    let per_split = run_indexed(cfg.splits, workers, |s| one_split(ds, cfg, replication_seed(cfg.seed, s)))?;
    let details = per_split
        .iter()
        .enumerate()
        .flat_map(|(s, res)| {
            cfg.methods.iter().zip(res).map(move |(m, &(pe, size))| SplitDetail {
                split: s,
                seed: replication_seed(cfg.seed, s),
                method: m.name().to_string(),
                pe,
                model_size: size,
            })
        })
        .collect();
    let column = |k: usize| -> Vec<f64> { per_split.iter().map(|r| r[k].0).collect() };
    let cds = cfg.methods.iter().position(|&m| m == Method::Cds).map(column);
    let mut rows = Vec::new();
    for (k, m) in cfg.methods.iter().enumerate() {
        let pes = column(k);
        let splits = pes.len() as f64;
        let mean = pes.iter().sum::<f64>() / splits;
        let se = if pes.len() > 1 {
            (pes.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (splits - 1.0) / splits).sqrt()
        } else {
            f64::NAN
        };
        let mut sizes: Vec<f64> = per_split.iter().map(|r| r[k].1 as f64).collect();
        let test = match &cds {
            Some(c) if pes.len() > 1 => Some(paired_t_test(c, &pes)?),
            _ => None,
        };
        rows.push(SplitRow {
            method: m.name().to_string(),
            splits: pes.len(),
            pe_mean: mean,
            pe_se: se,
            median_model_size: median(&mut sizes),
            t_statistic: test.and_then(|t| t.t),
            p_value: test.map(|t| t.p_value),
            zero_variance: test.is_some_and(|t| t.zero_variance),
        });
    }
    Ok((rows, details))
}
