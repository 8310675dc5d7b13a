//! Exact-recovery probabilities on noiseless equicorrelated designs.
//!
//! A replication counts as a success for a method when any estimate on its
//! solution path has exactly the true support. For the constrained Dantzig
//! selector the paths of every `(λ₀, λ)` pair in the configured grids are
//! searched; for the thresholded Dantzig selector every `λ` in the grid is
//! tried as the threshold.

use cds_core::datagen::{example1_beta0, generate, DesignKind, SimDesign};
use cds_core::selectors::{cds_path_until, dantzig_path, threshold_estimate, DantzigOptions};
use cds_core::types::{RegressionProblem, TrueModel};
use serde::{Deserialize, Serialize};

use crate::config::{Sim1Config, TuningSettings};
use crate::error::Result;
use crate::methods::{cds_config, full_path, selector_grid, Method};
use crate::output::{replication_seed, run_indexed};

/// One row of the recovery table. Column order is part of the output schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryRow {
    pub method: String,
    pub n: usize,
    pub r: f64,
    pub recovery_probability: f64,
    pub replications: usize,
    pub seed: u64,
}

fn tuning_of(cfg: &Sim1Config) -> TuningSettings {
    TuningSettings {
        grid_length: cfg.grid_length,
        floor_ratio: cfg.floor_ratio,
        penalty: cfg.penalty.clone(),
        ..TuningSettings::default()
    }
}

pub fn design(cfg: &Sim1Config, n: usize, r: f64, seed: u64) -> Result<SimDesign> {
    Ok(SimDesign {
        kind: DesignKind::Equicorrelated,
        n,
        p: cfg.p,
        correlation: r,
        truth: TrueModel::new(example1_beta0(cfg.p), 0.0)?,
        noiseless: true,
        seed,
    })
}

/// Whether `method` recovers the true support somewhere on its path(s).
pub fn recovers(method: Method, problem: &RegressionProblem, cfg: &Sim1Config, seed: u64) -> Result<bool> {
    let truth = problem.truth().expect("simulated problems carry their truth").support().to_vec();
    let tuning = tuning_of(cfg);
    match method {
        Method::Cds => {
            let grid = selector_grid(problem, &tuning, 0.0)?;
            for &lambda0 in &cfg.lambda0_grid {
                let g: Vec<f64> = grid.iter().copied().filter(|&v| v >= lambda0).collect();
                if g.is_empty() {
                    continue;
                }
                for &lambda in &cfg.lambda_grid {
                    let t = TuningSettings {
                        lambda0,
                        lambda,
                        ..tuning.clone()
                    };
                    let path = cds_path_until(problem, &cds_config(&t, g.clone())?, &mut |e| e.support == truth)?;
                    if path.entries().iter().any(|e| e.estimate.support == truth) {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
        Method::Tds => {
            let grid = selector_grid(problem, &tuning, 0.0)?;
            let path = dantzig_path(problem, &grid, &DantzigOptions::default())?;
            Ok(cfg.lambda_grid.iter().any(|&tau| {
                path.entries()
                    .iter()
                    .any(|e| threshold_estimate(&e.estimate, tau).support == truth)
            }))
        }
        _ => {
            let path = full_path(method, problem, &tuning, seed)?;
            Ok(path.entries().iter().any(|e| e.estimate.support == truth))
        }
    }
}

/// Recovery probability per `(method, n, r)`, rows ordered by `n`, then `r`,
/// then the configured method order.
pub fn run_example1(cfg: &Sim1Config, workers: usize) -> Result<Vec<RecoveryRow>> {
    cfg.validate()?;
    let reps = cfg.replications;
    let mut rows = Vec::new();
    let mut cell = 0usize;
    for &n in &cfg.n_values {
        for &r in &cfg.correlations {
            let base = cell * reps;
            let outcomes = run_indexed(reps, workers, |rep| {
                let seed = replication_seed(cfg.seed, base + rep);
                let problem = generate(&design(cfg, n, r, seed)?)?;
                cfg.methods
                    .iter()
                    .map(|&m| recovers(m, &problem, cfg, seed))
                    .collect::<Result<Vec<bool>>>()
            })?;
            for (k, m) in cfg.methods.iter().enumerate() {
                let hits = outcomes.iter().filter(|o| o[k]).count();
                rows.push(RecoveryRow {
                    method: m.name().to_string(),
                    n,
                    r,
                    recovery_probability: hits as f64 / reps as f64,
                    replications: reps,
                    seed: cfg.seed,
                });
            }
            cell += 1;
        }
    }
    Ok(rows)
}
