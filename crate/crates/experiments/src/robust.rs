//! Sensitivity of the constrained Dantzig selector to `(λ₀, λ)`, with `λ₁`
//! chosen by cross-validation in every cell. All cells share the same
//! replicated data sets.

use cds_core::datagen::{generate, prediction_errors, test_sample_seed};
use cds_core::metrics::mean_se;
use serde::{Deserialize, Serialize};

use crate::config::{RobustConfig, TuningSettings};
use crate::error::Result;
use crate::methods::{tuned_fit, Method};
use crate::output::{replication_seed, run_indexed};
use crate::sim2::ar1_design;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustRow {
    pub lambda0: f64,
    pub lambda: f64,
    pub pe_mean: f64,
    pub pe_se: f64,
    pub replications: usize,
    pub seed: u64,
}

fn cells(cfg: &RobustConfig) -> Vec<(f64, f64)> {
    cfg.lambda0_grid
        .iter()
        .flat_map(|&l0| cfg.lambda_grid.iter().map(move |&l| (l0, l)))
        .collect()
}

/// Prediction error mean and SE per cell, `λ₀`-major in configured order.
pub fn run_robustness(cfg: &RobustConfig, workers: usize) -> Result<Vec<RobustRow>> {
    cfg.validate()?;
    let cells = cells(cfg);
    let per_rep = run_indexed(cfg.replications, workers, |rep| {
        let seed = replication_seed(cfg.seed, rep);
        let design = ar1_design(cfg.p, cfg.n, cfg.correlation, cfg.sigma, seed)?;
        let problem = generate(&design)?;
        let betas = cells
            .iter()
            .map(|&(lambda0, lambda)| {
                let t = TuningSettings {
                    lambda0,
                    lambda,
                    ..cfg.tuning.clone()
                };
                Ok(tuned_fit(Method::Cds, &problem, &t, seed)?.estimate.beta)
            })
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<_> = betas.iter().collect();
        Ok(prediction_errors(
            &design,
            problem.design().scale_factors(),
            cfg.test_size,
            test_sample_seed(seed),
            &refs,
        )?)
    })?;
    cells
        .iter()
        .enumerate()
        .map(|(c, &(lambda0, lambda))| {
            let pes: Vec<f64> = per_rep.iter().map(|r| r[c]).collect();
            let m = mean_se(&pes)?;
            Ok(RobustRow {
                lambda0,
                lambda,
                pe_mean: m.mean,
                pe_se: m.se,
                replications: cfg.replications,
                seed: cfg.seed,
            })
        })
        .collect()
}

/// Wide layout: one row per `λ₀`, one `mean (se)` column per `λ`.
pub fn robust_table(rows: &[RobustRow], cfg: &RobustConfig) -> Vec<Vec<String>> {
    let mut out = vec![std::iter::once("lambda0".to_string())
        .chain(cfg.lambda_grid.iter().map(|l| format!("lambda={l}")))
        .collect()];
    for &l0 in &cfg.lambda0_grid {
        let mut rec = vec![l0.to_string()];
        for &l in &cfg.lambda_grid {
            let cell = rows.iter().find(|r| r.lambda0 == l0 && r.lambda == l);
            rec.push(cell.map_or_else(String::new, |r| format!("{:.4} ({:.4})", r.pe_mean, r.pe_se)));
        }
        out.push(rec);
    }
    out
}
