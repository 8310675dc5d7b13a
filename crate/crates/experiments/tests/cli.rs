use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cds(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cds"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn diag_identity_design_satisfies_uup() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<String> = (0..5)
        .map(|i| (0..5).map(|j| if i == j { "1" } else { "0" }).collect::<Vec<_>>().join(","))
        .collect();
    write(dir.path(), "x.csv", &format!("a,b,c,d,e\n{}\n", rows.join("\n")));
    let r = report(&cds(dir.path(), &["diag", "x.csv", "--s", "2", "--out", "d"]));
    // columns rescaled to norm √5 leave rounding of order 1e-16
    assert!(r["delta_s"].as_f64().unwrap().abs() < 1e-12);
    assert!(r["theta_s_2s"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(r["uup_holds"], true);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("d/diag.json")).unwrap()).unwrap();
    assert_eq!(saved, r);
    assert!(dir.path().join("d/manifest.json").exists());
}

#[test]
fn diag_duplicated_column_fails_uup() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "x.csv", "1,1,0\n2,2,1\n-1,-1,3\n0.5,0.5,-2\n");
    let r = report(&cds(dir.path(), &["diag", "x.csv", "--s", "2"]));
    assert!(r["delta_s"].as_f64().unwrap() >= 1.0 - 1e-12);
    assert_eq!(r["uup_holds"], false);
}

#[test]
fn diag_budget_exceeded_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<String> = (0..4)
        .map(|i| (0..30).map(|j| ((i * 31 + j * 7) % 11).to_string()).collect::<Vec<_>>().join(","))
        .collect();
    write(dir.path(), "x.csv", &rows.join("\n"));
    let out = cds(dir.path(), &["diag", "x.csv", "--s", "3", "--budget", "100"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn config_errors_exit_with_two_and_point_at_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.json", "{\n  \"seed\": 1,\n  \"replicatons\": 3\n}\n");
    let out = cds(dir.path(), &["sim2", "--config", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("replicatons") && msg.contains("line 3"), "{msg}");

    write(dir.path(), "neg.json", r#"{"seed": 1, "replications": 3, "sigma": -1}"#);
    let out = cds(dir.path(), &["sim2", "--config", "neg.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma"));
}

#[test]
fn missing_data_file_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "fit.json", r#"{"seed": 1, "response": "y"}"#);
    let out = cds(dir.path(), &["fit", "--config", "fit.json", "--data", "nope.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn single_replication_recovery_is_zero_or_one() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "s1.json",
        r#"{"seed": 3, "p": 100, "n_values": [40], "correlations": [0.0], "replications": 1, "methods": ["DS", "CDS"]}"#,
    );
    let out = cds(dir.path(), &["sim1", "--config", "s1.json", "--out", "o"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("o/sim1_recovery.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "method,n,r,recovery_probability,replications,seed");
    for line in lines {
        let prob: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(prob == 0.0 || prob == 1.0);
    }
}

#[test]
fn seed_override_lands_in_manifest() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "s1.json",
        r#"{"seed": 3, "p": 60, "n_values": [30], "correlations": [0.0], "replications": 1, "methods": ["DS"]}"#,
    );
    let out = cds(dir.path(), &["sim1", "--config", "s1.json", "--seed", "99", "--out", "o"]);
    assert!(out.status.success());
    let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 99);
    assert_eq!(m["config"]["seed"], 99);
    assert_eq!(m["command"], "sim1");
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn fit_path_and_cv_on_a_noiseless_line() {
    // y = 2 + 3 x₁ with four inert covariates
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("x1,x2,x3,x4,x5,y\n");
    for i in 0..40 {
        let v: Vec<f64> = (0..5).map(|j| (((i * 7 + j * 13) % 17) as f64 - 8.0) / 4.0 + 0.1 * j as f64 * (i % 3) as f64).collect();
        let y = 2.0 + 3.0 * v[0];
        text += &format!("{},{},{},{},{},{}\n", v[0], v[1], v[2], v[3], v[4], y);
    }
    write(dir.path(), "d.csv", &text);
    write(dir.path(), "fit.json", r#"{"seed": 5, "response": "y"}"#);

    let out = cds(dir.path(), &["fit", "--config", "fit.json", "--data", "d.csv", "--out", "f"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let coefs = std::fs::read_to_string(dir.path().join("f/coefficients.csv")).unwrap();
    let mut lines = coefs.lines();
    assert_eq!(lines.next().unwrap(), "term,coefficient,coefficient_original");
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows[0][0], "(intercept)");
    let x1: f64 = rows[1][2].parse().unwrap();
    let icpt: f64 = rows[0][2].parse().unwrap();
    assert!((x1 - 3.0).abs() < 0.1, "slope {x1}");
    assert!((icpt - 2.0).abs() < 0.2, "intercept {icpt}");
    for r in &rows[2..] {
        assert_eq!(r[1].parse::<f64>().unwrap(), 0.0, "{r:?}");
    }

    let out = cds(dir.path(), &["path", "--config", "fit.json", "--data", "d.csv", "--out", "p"]);
    assert!(out.status.success());
    let summary = std::fs::read_to_string(dir.path().join("p/path_summary.csv")).unwrap();
    assert!(summary.starts_with("lambda1,support_size,l1_norm,converged,iterations,feasibility_residual\n"));

    let out = cds(dir.path(), &["cv", "--config", "fit.json", "--data", "d.csv", "--out", "c"]);
    assert!(out.status.success());
    let cv = std::fs::read_to_string(dir.path().join("c/cv.csv")).unwrap();
    assert_eq!(cv.lines().next().unwrap(), "lambda1,mean_mse,se,inherited_folds,chosen");
    assert_eq!(cv.lines().filter(|l| l.ends_with(",true")).count(), 1);
}
