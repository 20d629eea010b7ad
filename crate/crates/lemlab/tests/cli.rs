//! End-to-end CLI checks through the compiled binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn lemlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lemlab"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lemlab-cli-{name}"));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn lemlab");
    assert!(
        out.status.success(),
        "command failed: {}\n{}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn sample_is_deterministic() {
    let args = ["sample", "--family", "circle", "--n", "5", "--r", "1", "--seed", "1"];
    let a = run_ok(lemlab().args(args));
    let b = run_ok(lemlab().args(args));
    assert_eq!(a.stdout, b.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["n"], 5);
    assert_eq!(doc["family"], "circle");
    assert_eq!(doc["seed"], serde_json::json!([1, 0]));
}

#[test]
fn count_handmade_pair() {
    let dir = workdir("count");
    let input = dir.join("pair.json");
    std::fs::write(&input, r#"{"n": 2, "roots": [[0.5, 0.0], [-0.5, 0.0]]}"#).unwrap();
    let out = run_ok(lemlab().args(["count"]).arg(&input));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["count"], 1);
    assert_eq!(report["method"], "exact");
    assert_eq!(report["degenerate"], false);
}

#[test]
fn sample_critical_count_render_pipeline() {
    let dir = workdir("pipeline");
    let roots = dir.join("roots.json");
    run_ok(lemlab().args([
        "sample", "--family", "disk", "--n", "12", "--r", "1", "--seed", "7",
    ]).arg("--out").arg(&roots));

    let solved = dir.join("solved.json");
    run_ok(lemlab().args(["critical"]).arg(&roots).arg("--out").arg(&solved));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&solved).unwrap()).unwrap();
    assert_eq!(doc["critical_points"].as_array().unwrap().len(), 11);
    assert_eq!(doc["residuals"].as_array().unwrap().len(), 11);

    let out = run_ok(lemlab().args(["count"]).arg(&solved).args(["--method", "both"]));
    let both: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let exact = both["exact"]["count"].as_u64().unwrap();
    let grid = both["grid"]["count"].as_u64().unwrap();
    assert_eq!(exact, grid);

    let svg = dir.join("out.svg");
    run_ok(lemlab().args(["render"]).arg(&roots).args(["--resolution", "128", "--roots", "--circle"]).arg("--out").arg(&svg));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert!(text.contains("<path"));
    // Deterministic bytes.
    let svg2 = dir.join("out2.svg");
    run_ok(lemlab().args(["render"]).arg(&roots).args(["--resolution", "128", "--roots", "--circle"]).arg("--out").arg(&svg2));
    assert_eq!(std::fs::read(&svg).unwrap(), std::fs::read(&svg2).unwrap());
}

#[test]
fn certify_reports_tallies() {
    let dir = workdir("certify");
    let roots = dir.join("roots.json");
    run_ok(lemlab().args([
        "sample", "--family", "disk", "--n", "40", "--r", "1", "--seed", "3",
    ]).arg("--out").arg(&roots));
    let out = run_ok(lemlab().args(["certify"]).arg(&roots));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["n"], 40);
    assert!(report["isolated"]["count"].is_u64());
    assert!(report["good_roots"]["fraction"].is_f64() || report["good_roots"]["fraction"].is_u64());
}

#[test]
fn experiment_writes_json_and_csv() {
    let dir = workdir("experiment");
    let config = dir.join("config.json");
    let json_out = dir.join("result.json");
    let csv_out = dir.join("result.csv");
    std::fs::write(
        &config,
        serde_json::json!({
            "family": "circle",
            "r": 1.0,
            "degrees": [8, 12, 16],
            "trials_per_degree": 8,
            "master_seed": 5,
            "outputs": {"json": json_out, "csv": csv_out},
        })
        .to_string(),
    )
    .unwrap();
    run_ok(lemlab().args(["experiment", "--config"]).arg(&config).arg("--quiet"));
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_out).unwrap()).unwrap();
    assert_eq!(result["schema_version"], "lemlab-result/1");
    assert_eq!(result["per_degree"].as_array().unwrap().len(), 3);
    let csv = std::fs::read_to_string(&csv_out).unwrap();
    assert_eq!(csv.lines().count(), 4, "header plus one row per degree");
    assert!(csv.lines().next().unwrap().starts_with("family,r,n,trials,mean_count"));
}

#[test]
fn analyze_emits_potentials() {
    let out = run_ok(lemlab().args([
        "analyze", "--family", "disk", "--r", "1", "--z", "0.3,0.4", "--p", "1",
    ]));
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let row = &rows[0];
    let expect = (0.09 + 0.16 - 1.0) / 2.0;
    assert!((row["potential"].as_f64().unwrap() - expect).abs() < 1e-12);
    assert!((row["cauchy"][0].as_f64().unwrap() - 0.3).abs() < 1e-12);
    assert!((row["cauchy"][1].as_f64().unwrap() + 0.4).abs() < 1e-12);
    assert!(row["abs_log_moments"]["1"].is_f64());
}

#[test]
fn sweep_tags_rows_with_predictions() {
    let out = run_ok(lemlab().args([
        "sweep", "--family", "circle", "--r-values", "0.9,1.1", "--n", "16", "--trials", "5",
        "--seed", "9", "--quiet",
    ]));
    let sweep: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = sweep["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["prediction"], "one_component");
    assert_eq!(rows[1]["prediction"], "full_n");
    assert!(rows[0]["mean_count"].as_f64().unwrap() >= 1.0);
}

#[test]
fn usage_errors_exit_one() {
    let out = lemlab().args(["count"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = lemlab().args(["definitely-not-a-subcommand"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_documents_exit_one() {
    let dir = workdir("invalid");
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"n": 3, "roots": [[0.0, 0.0]]}"#).unwrap();
    let out = lemlab().args(["count"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error"), "stderr: {stderr}");
}
