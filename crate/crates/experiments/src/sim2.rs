//! Prediction and selection measures on the noisy AR(1) design.

use cds_core::datagen::{example2_beta0, generate, prediction_errors, test_sample_seed, DesignKind, SimDesign};
use cds_core::diagnostics::false_sign_count;
use cds_core::metrics::{aggregate_replications, estimation_losses, fp_fn_counts};
use cds_core::types::TrueModel;
use serde::{Deserialize, Serialize};

use crate::config::Sim2Config;
use crate::error::Result;
use crate::methods::{tuned_fit, Method, TunedFit};
use crate::output::{replication_seed, run_indexed};

/// Measures of one method on one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRow {
    pub method: String,
    pub replication: usize,
    pub seed: u64,
    pub tuning_value: Option<f64>,
    pub pe: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub fp: usize,
    pub fn_strong: usize,
    pub fn_weak: usize,
    pub false_signs: usize,
    pub model_size: usize,
}

/// Mean and standard error of each measure for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub p: usize,
    pub replications: usize,
    pub seed: u64,
    pub pe_mean: f64,
    pub pe_se: f64,
    pub l1_mean: f64,
    pub l1_se: f64,
    pub l2_mean: f64,
    pub l2_se: f64,
    pub linf_mean: f64,
    pub linf_se: f64,
    pub fp_mean: f64,
    pub fp_se: f64,
    pub fn_strong_mean: f64,
    pub fn_strong_se: f64,
    pub fn_weak_mean: f64,
    pub fn_weak_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sim2Output {
    pub replications: Vec<ReplicationRow>,
    pub summary: Vec<SummaryRow>,
    /// `(method, replication)` pairs where the oracle had the larger prediction error.
    pub oracle_dominance_violations: Vec<(String, usize)>,
}

pub fn ar1_design(p: usize, n: usize, r: f64, sigma: f64, seed: u64) -> Result<SimDesign> {
    Ok(SimDesign {
        kind: DesignKind::Ar1,
        n,
        p,
        correlation: r,
        truth: TrueModel::new(example2_beta0(p), sigma)?,
        noiseless: false,
        seed,
    })
}

fn measure(
    fits: &[TunedFit],
    design: &SimDesign,
    scale: &nalgebra::DVector<f64>,
    cfg: &Sim2Config,
    replication: usize,
) -> Result<Vec<ReplicationRow>> {
    let refs: Vec<_> = fits.iter().map(|f| &f.estimate.beta).collect();
    let pes = prediction_errors(design, scale, cfg.test_size, test_sample_seed(design.seed), &refs)?;
    let truth = &design.truth;
    fits.iter()
        .zip(pes)
        .map(|(f, pe)| {
            let beta = &f.estimate.beta;
            let loss = estimation_losses(beta, truth.beta0())?;
            let counts = fp_fn_counts(beta, truth, cfg.strong_threshold)?;
            Ok(ReplicationRow {
                method: f.method.name().to_string(),
                replication,
                seed: design.seed,
                tuning_value: f.tuning_value,
                pe,
                l1: loss.l1,
                l2: loss.l2,
                linf: loss.linf,
                fp: counts.fp,
                fn_strong: counts.fn_strong,
                fn_weak: counts.fn_weak,
                false_signs: false_sign_count(beta, truth.beta0())?,
                model_size: f.estimate.support.len(),
            })
        })
        .collect()
}

pub fn run_example2(cfg: &Sim2Config, workers: usize) -> Result<Sim2Output> {
    cfg.validate()?;
    let per_rep = run_indexed(cfg.replications, workers, |rep| {
        let seed = replication_seed(cfg.seed, rep);
        let design = ar1_design(cfg.p, cfg.n, cfg.correlation, cfg.sigma, seed)?;
        let problem = generate(&design)?;
        let fits = cfg
            .methods
            .iter()
            .map(|&m| tuned_fit(m, &problem, &cfg.tuning, seed))
            .collect::<Result<Vec<_>>>()?;
        measure(&fits, &design, problem.design().scale_factors(), cfg, rep)
    })?;

    let mut violations = Vec::new();
    if let Some(o) = cfg.methods.iter().position(|&m| m == Method::Oracle) {
        for (rep, rows) in per_rep.iter().enumerate() {
            for row in rows.iter().filter(|r| r.pe < rows[o].pe) {
                violations.push((row.method.clone(), rep));
            }
        }
    }

    let summary = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let table: Vec<Vec<f64>> = per_rep
                .iter()
                .map(|rows| {
                    let r = &rows[k];
                    vec![r.pe, r.l1, r.l2, r.linf, r.fp as f64, r.fn_strong as f64, r.fn_weak as f64]
                })
                .collect();
            let a = aggregate_replications(&table)?;
            Ok(SummaryRow {
                method: m.name().to_string(),
                p: cfg.p,
                replications: cfg.replications,
                seed: cfg.seed,
                pe_mean: a[0].mean,
                pe_se: a[0].se,
                l1_mean: a[1].mean,
                l1_se: a[1].se,
                l2_mean: a[2].mean,
                l2_se: a[2].se,
                linf_mean: a[3].mean,
                linf_se: a[3].se,
                fp_mean: a[4].mean,
                fp_se: a[4].se,
                fn_strong_mean: a[5].mean,
                fn_strong_se: a[5].se,
                fn_weak_mean: a[6].mean,
                fn_weak_se: a[6].se,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Sim2Output {
        replications: per_rep.into_iter().flatten().collect(),
        summary,
        oracle_dominance_violations: violations,
    })
}
