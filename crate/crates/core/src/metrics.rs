//! Performance measures for simulated fits and their aggregation.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{support_of, SolutionPath, TrueModel};

/// Magnitude separating strong from weak true signals.
pub const DEFAULT_STRONG_THRESHOLD: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationLosses {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionCounts {
    pub fp: usize,
    pub fn_strong: usize,
    pub fn_weak: usize,
}

fn same_len(a: &DVector<f64>, b: &DVector<f64>) -> Result<()> {
    if a.len() == b.len() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what: "coefficient vectors",
            expected: b.len(),
            got: a.len(),
        })
    }
}

pub fn estimation_losses(beta_hat: &DVector<f64>, beta0: &DVector<f64>) -> Result<EstimationLosses> {
    same_len(beta_hat, beta0)?;
    let d = beta_hat - beta0;
    Ok(EstimationLosses {
        l1: d.lp_norm(1),
        l2: d.norm(),
        linf: d.amax(),
    })
}

/// False positives, and false negatives split by `|β₀_j| ≥ strong_threshold`.
pub fn fp_fn_counts(beta_hat: &DVector<f64>, truth: &TrueModel, strong_threshold: f64) -> Result<SelectionCounts> {
    let beta0 = truth.beta0();
    same_len(beta_hat, beta0)?;
    let mut c = SelectionCounts {
        fp: 0,
        fn_strong: 0,
        fn_weak: 0,
    };
    for (b, t) in beta_hat.iter().zip(beta0.iter()) {
        match (*b != 0.0, *t != 0.0) {
            (true, false) => c.fp += 1,
            (false, true) if t.abs() >= strong_threshold => c.fn_strong += 1,
            (false, true) => c.fn_weak += 1,
            _ => {}
        }
    }
    Ok(c)
}

/// Whether some path entry has exactly the true support.
pub fn exact_recovery(path: &SolutionPath, truth: &TrueModel) -> bool {
    path.entries().iter().any(|e| e.estimate.support == truth.support())
}

/// Same as [`exact_recovery`] for a single coefficient vector.
pub fn same_support(beta_hat: &DVector<f64>, truth: &TrueModel) -> bool {
    support_of(beta_hat) == truth.support()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

/// Sample mean and standard error `sd/√R` (sd with `R − 1`) of one measure.
pub fn mean_se(values: &[f64]) -> Result<MeanSe> {
    let r = values.len();
    if r < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 replications, got {r}")));
    }
    let mean = values.iter().sum::<f64>() / r as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1) as f64;
    Ok(MeanSe {
        mean,
        se: (var / r as f64).sqrt(),
    })
}

/// Column-wise [`mean_se`] of per-replication measure rows.
pub fn aggregate_replications(rows: &[Vec<f64>]) -> Result<Vec<MeanSe>> {
    if rows.len() < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 replications, got {}", rows.len())));
    }
    let k = rows[0].len();
    if let Some(bad) = rows.iter().find(|r| r.len() != k) {
        return Err(Error::DimensionMismatch {
            what: "measures per replication",
            expected: k,
            got: bad.len(),
        });
    }
    (0..k)
        .map(|j| mean_se(&rows.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .collect()
}
