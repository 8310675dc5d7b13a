use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cds_core::diagnostics::DEFAULT_ENUMERATION_BUDGET;
use cds_experiments::config::{load_config, FitConfig, RobustConfig, Sim1Config, Sim2Config, SplitEvalConfig};
use cds_experiments::data::{read_dataset, read_matrix};
use cds_experiments::error::{ExpError, Result};
use cds_experiments::output::{sha256_hex, write_csv, write_json, write_records, Manifest};
use cds_experiments::{diag, fitting, robust, sim1, sim2, split_eval};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "cds", version, about = "Constrained Dantzig selector fits and simulation experiments")]
struct Cli {
    /// Directory receiving CSV tables, JSON reports and the run manifest.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    /// Worker threads for replications.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Replaces the seed stored in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DataArgs {
    /// JSON fit config.
    #[arg(long)]
    config: PathBuf,
    /// Headed numeric CSV holding covariates and the response.
    #[arg(long)]
    data: PathBuf,
}

#[derive(Args)]
struct ConfigArg {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Fit at a fixed or cross-validated lambda1.
    Fit(DataArgs),
    /// Solution path over the default lambda1 grid.
    Path(DataArgs),
    /// Cross-validation curve over lambda1.
    Cv(DataArgs),
    /// Exact-recovery probabilities on noiseless designs.
    Sim1(ConfigArg),
    /// Prediction and selection measures of all methods.
    Sim2(ConfigArg),
    /// Prediction error over a (lambda0, lambda) grid.
    Robust(ConfigArg),
    /// Repeated train/test splits of a dataset with paired t-tests.
    SplitEval {
        /// Headed numeric CSV.
        dataset: PathBuf,
        /// JSON split-evaluation config.
        #[arg(long)]
        config: PathBuf,
    },
    /// Restricted isometry and orthogonality constants of a design.
    Diag {
        /// Numeric CSV, optional header row.
        matrix: PathBuf,
        /// Sparsity level; θ uses blocks of sizes up to s and 2s.
        #[arg(long)]
        s: usize,
        /// Largest number of enumerated subsets before giving up.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
        budget: u128,
    },
}

fn file_hash(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| ExpError::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

fn finish(out: &Path, mut manifest: Manifest, written: Vec<PathBuf>) -> Result<()> {
    manifest.outputs = written
        .iter()
        .map(|p| p.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()))
        .collect();
    let m = manifest.write(out)?;
    for p in written.iter().chain(std::iter::once(&m)) {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn with_seed<T>(mut cfg: T, seed: Option<u64>, slot: impl Fn(&mut T) -> &mut u64) -> T {
    if let Some(s) = seed {
        *slot(&mut cfg) = s;
    }
    cfg
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.out.as_path();
    match cli.command {
        Command::Fit(a) => {
            let cfg = with_seed(load_config::<FitConfig>(&a.config)?, cli.seed, |c| &mut c.seed);
            let ds = read_dataset(&a.data, &cfg.response)?;
            let (rows, summary) = fitting::run_fit(&ds, &cfg)?;
            let manifest = Manifest::new("fit", Some(cfg.seed), &json!({"config": cfg, "data_sha256": file_hash(&a.data)?}))?;
            let written = vec![write_csv(out, "coefficients.csv", &rows)?, write_json(out, "fit.json", &summary)?];
            finish(out, manifest, written)
        }
        Command::Path(a) => {
            let cfg = with_seed(load_config::<FitConfig>(&a.config)?, cli.seed, |c| &mut c.seed);
            let ds = read_dataset(&a.data, &cfg.response)?;
            let (rows, summary, info) = fitting::run_path(&ds, &cfg)?;
            let manifest = Manifest::new("path", Some(cfg.seed), &json!({"config": cfg, "data_sha256": file_hash(&a.data)?}))?;
            let written = vec![
                write_csv(out, "path.csv", &rows)?,
                write_csv(out, "path_summary.csv", &summary)?,
                write_json(out, "path.json", &info)?,
            ];
            finish(out, manifest, written)
        }
        Command::Cv(a) => {
            let cfg = with_seed(load_config::<FitConfig>(&a.config)?, cli.seed, |c| &mut c.seed);
            let ds = read_dataset(&a.data, &cfg.response)?;
            let (rows, cv) = fitting::run_cv(&ds, &cfg)?;
            let manifest = Manifest::new("cv", Some(cfg.seed), &json!({"config": cfg, "data_sha256": file_hash(&a.data)?}))?;
            let report = json!({"chosen_lambda1": cv.chosen_lambda1, "status": cv.status, "folds": cfg.tuning.folds});
            let written = vec![write_csv(out, "cv.csv", &rows)?, write_json(out, "cv.json", &report)?];
            finish(out, manifest, written)
        }
        Command::Sim1(a) => {
            let cfg = with_seed(load_config::<Sim1Config>(&a.config)?, cli.seed, |c| &mut c.seed);
            let rows = sim1::run_example1(&cfg, cli.workers)?;
            let manifest = Manifest::new("sim1", Some(cfg.seed), &cfg)?;
            finish(out, manifest, vec![write_csv(out, "sim1_recovery.csv", &rows)?])
        }
        Command::Sim2(a) => {
            let cfg = with_seed(load_config::<Sim2Config>(&a.config)?, cli.seed, |c| &mut c.seed);
            let res = sim2::run_example2(&cfg, cli.workers)?;
            for (method, rep) in &res.oracle_dominance_violations {
                eprintln!("note: {method} beat the oracle on prediction error in replication {rep}");
            }
            let manifest = Manifest::new("sim2", Some(cfg.seed), &cfg)?;
            let written = vec![
                write_csv(out, "sim2_summary.csv", &res.summary)?,
                write_csv(out, "sim2_replications.csv", &res.replications)?,
            ];
            finish(out, manifest, written)
        }
        Command::Robust(a) => {
            let cfg = with_seed(load_config::<RobustConfig>(&a.config)?, cli.seed, |c| &mut c.seed);
            let rows = robust::run_robustness(&cfg, cli.workers)?;
            let manifest = Manifest::new("robust", Some(cfg.seed), &cfg)?;
            let written = vec![
                write_csv(out, "robust.csv", &rows)?,
                write_records(out, "robust_table.csv", &robust::robust_table(&rows, &cfg))?,
            ];
            finish(out, manifest, written)
        }
        Command::SplitEval { dataset, config } => {
            let cfg = with_seed(load_config::<SplitEvalConfig>(&config)?, cli.seed, |c| &mut c.seed);
            let ds = read_dataset(&dataset, &cfg.response)?;
            let (rows, details) = split_eval::run_split_eval(&ds, &cfg, cli.workers)?;
            let manifest =
                Manifest::new("split-eval", Some(cfg.seed), &json!({"config": cfg, "data_sha256": file_hash(&dataset)?}))?;
            let written = vec![
                write_csv(out, "split_eval.csv", &rows)?,
                write_csv(out, "split_eval_splits.csv", &details)?,
            ];
            finish(out, manifest, written)
        }
        Command::Diag { matrix, s, budget } => {
            let x = read_matrix(&matrix)?;
            let report = diag::run_diag(x, s, budget)?;
            let text = serde_json::to_string_pretty(&report).map_err(|e| ExpError::Data(e.to_string()))?;
            println!("{text}");
            let manifest = Manifest::new(
                "diag",
                None,
                &json!({"s": s, "budget": budget.to_string(), "matrix_sha256": file_hash(&matrix)?}),
            )?;
            finish(out, manifest, vec![write_json(out, "diag.json", &report)?])
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
