//! End-to-end checks of the command surface: flag handling, config
//! merging, exit codes, and the shape of every artifact the commands
//! write.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rmcvar"))
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

/// 36 consecutive months of a two-asset panel in the canonical layout.
fn tiny_panel(dir: &Path) -> PathBuf {
    let mut text = String::from("period,A,B\n");
    for k in 0..36 {
        let year = 2001 + k / 12;
        let month = 1 + k % 12;
        let a = 0.01 + 0.001 * (k % 5) as f64;
        let b = -0.002 + 0.001 * (k % 7) as f64;
        text.push_str(&format!("{year}{month:02},{a},{b}\n"));
    }
    let path = dir.join("tiny.csv");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn equal_weight_backtest_writes_expected_artifacts() {
    let work = tempfile::tempdir().unwrap();
    let data = tiny_panel(work.path());
    let out = work.path().join("run");
    let output = bin()
        .args(["backtest", "--data"])
        .arg(&data)
        .args(["--strategy", "equal-weight", "--window", "12", "--split", "200112", "--out-dir"])
        .arg(&out)
        .output()
        .unwrap();
    assert_exit(&output, 0);

    let weights = std::fs::read_to_string(out.join("weights.csv")).unwrap();
    let mut lines = weights.lines();
    assert_eq!(lines.next(), Some("period,A,B"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 25, "24 traded months plus the final recommendation");
    assert!(rows[0].starts_with("200201,"));
    for row in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[1].parse::<f64>().unwrap(), 0.5);
        assert_eq!(fields[2].parse::<f64>().unwrap(), 0.5);
    }

    let returns = std::fs::read_to_string(out.join("returns.csv")).unwrap();
    assert_eq!(returns.lines().next(), Some("period,return"));
    assert_eq!(returns.lines().count(), 25, "24 traded months plus the header");

    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["strategy"], "equal-weight");
    assert_eq!(metrics["periods_per_year"], 12);
    assert!(metrics["metrics"]["ar"].is_f64());

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "backtest");
    assert_eq!(manifest["config"]["split"], "200112");
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 3);
}

#[test]
fn manifest_digest_matches_input_bytes() {
    use sha2::Digest;
    let work = tempfile::tempdir().unwrap();
    let data = tiny_panel(work.path());
    let out = work.path().join("run");
    let output = bin()
        .args(["backtest", "--data"])
        .arg(&data)
        .args(["--strategy", "equal-weight", "--window", "12", "--split", "200112", "--out-dir"])
        .arg(&out)
        .output()
        .unwrap();
    assert_exit(&output, 0);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let expected = format!("{:x}", sha2::Sha256::digest(std::fs::read(&data).unwrap()));
    assert_eq!(manifest["data"]["sha256"], expected.as_str());
}

#[test]
fn flags_override_config_file_values() {
    let work = tempfile::tempdir().unwrap();
    let data = tiny_panel(work.path());
    let config = work.path().join("run.toml");
    std::fs::write(
        &config,
        format!(
            "data = {:?}\nstrategy = \"min-cvar\"\nbetas = [0.8]\nwindow = 12\nsplit = \"200112\"\n",
            data
        ),
    )
    .unwrap();
    let out = work.path().join("run");
    let output = bin()
        .args(["backtest", "--config"])
        .arg(&config)
        .args(["--betas", "0.9", "--out-dir"])
        .arg(&out)
        .output()
        .unwrap();
    assert_exit(&output, 0);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["betas"][0], 0.9);
    assert_eq!(manifest["config"]["strategy"], "min-cvar");
    assert_eq!(manifest["config"]["window"], 12);
}

#[test]
fn missing_strategy_is_a_usage_error() {
    let work = tempfile::tempdir().unwrap();
    let data = tiny_panel(work.path());
    let out = work.path().join("run");
    let output = bin()
        .args(["backtest", "--data"])
        .arg(&data)
        .args(["--split", "200112", "--out-dir"])
        .arg(&out)
        .output()
        .unwrap();
    assert_exit(&output, 2);
    let stderr = String::from_utf8_lossy(&output.stderr);
    let json_line = stderr.lines().find(|l| l.starts_with('{')).unwrap();
    let err: serde_json::Value = serde_json::from_str(json_line).unwrap();
    assert_eq!(err["error"]["kind"], "usage");
    assert_eq!(err["error"]["exit_code"], 2);
}

#[test]
fn unreadable_data_is_a_data_error() {
    let work = tempfile::tempdir().unwrap();
    let out = work.path().join("run");
    let output = bin()
        .args(["backtest", "--data", "/does/not/exist.csv"])
        .args(["--strategy", "equal-weight", "--split", "200112", "--out-dir"])
        .arg(&out)
        .output()
        .unwrap();
    assert_exit(&output, 3);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("\"kind\":\"data\""), "stderr: {stderr}");
}

#[test]
fn lambda_is_rejected_outside_the_regularized_strategy() {
    let work = tempfile::tempdir().unwrap();
    let data = tiny_panel(work.path());
    let out = work.path().join("run");
    let output = bin()
        .args(["backtest", "--data"])
        .arg(&data)
        .args([
            "--strategy",
            "equal-weight",
            "--lambda",
            "0.05",
            "--split",
            "200112",
            "--out-dir",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert_exit(&output, 2);
}

#[test]
fn single_level_diff_study_warns_and_succeeds() {
    let work = tempfile::tempdir().unwrap();
    let data = tiny_panel(work.path());
    let out = work.path().join("study");
    let output = bin()
        .args(["diff-study", "--data"])
        .arg(&data)
        .args(["--betas", "0.9", "--window", "12", "--split", "200112", "--out-dir"])
        .arg(&out)
        .output()
        .unwrap();
    assert_exit(&output, 0);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("warning"), "stderr: {stderr}");
    let diff = std::fs::read_to_string(out.join("diff.csv")).unwrap();
    assert_eq!(diff, "pair,diff\n");
}

#[test]
fn diff_study_emits_one_row_per_adjacent_pair() {
    let work = tempfile::tempdir().unwrap();
    let data = tiny_panel(work.path());
    let out = work.path().join("study");
    let output = bin()
        .args(["diff-study", "--data"])
        .arg(&data)
        .args([
            "--betas",
            "0.8,0.85,0.9",
            "--window",
            "12",
            "--split",
            "200112",
            "--out-dir",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert_exit(&output, 0);
    let diff = std::fs::read_to_string(out.join("diff.csv")).unwrap();
    let lines: Vec<&str> = diff.lines().collect();
    assert_eq!(lines[0], "pair,diff");
    assert!(lines[1].starts_with("0.8/0.85,"));
    assert!(lines[2].starts_with("0.85/0.9,"));
    assert!(lines[3].starts_with("average,"));
    assert_eq!(lines.len(), 4);
}

#[test]
fn ingest_writes_a_canonical_panel() {
    let work = tempfile::tempdir().unwrap();
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic_ff25.csv");
    let out = work.path().join("ingest");
    let output = bin()
        .args(["ingest", "--data"])
        .arg(&data)
        .args(["--start", "199001", "--end", "199112", "--out-dir"])
        .arg(&out)
        .output()
        .unwrap();
    assert_exit(&output, 0);
    let canonical = std::fs::read_to_string(out.join("canonical.csv")).unwrap();
    let mut lines = canonical.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("period,"));
    assert_eq!(header.split(',').count(), 26);
    assert_eq!(lines.clone().count(), 24);
    assert!(lines.next().unwrap().starts_with("199001,"));
}

#[test]
fn report_compares_runs_and_formats_percentages() {
    let work = tempfile::tempdir().unwrap();
    let data = tiny_panel(work.path());
    for (dir, strategy) in [("ew", "equal-weight"), ("cvar", "min-cvar")] {
        let output = bin()
            .args(["backtest", "--data"])
            .arg(&data)
            .args([
                "--strategy",
                strategy,
                "--betas",
                "0.9",
                "--window",
                "12",
                "--split",
                "200112",
                "--out-dir",
            ])
            .arg(work.path().join(dir))
            .output()
            .unwrap();
        assert_exit(&output, 0);
    }
    let out = work.path().join("report");
    let output = bin()
        .arg("report")
        .arg(work.path().join("ew"))
        .arg(work.path().join("cvar"))
        .arg("--out-dir")
        .arg(&out)
        .output()
        .unwrap();
    assert_exit(&output, 0);

    let comparison = std::fs::read_to_string(out.join("comparison.csv")).unwrap();
    let lines: Vec<&str> = comparison.lines().collect();
    assert_eq!(lines[0], "strategy,ar,risk,rr,maxdd,to");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("equal-weight,"));
    assert!(lines[2].starts_with("min-cvar@0.9,"));
    let ar = lines[1].split(',').nth(1).unwrap();
    assert!(ar.ends_with('%') && ar.contains('.'), "percent field: {ar}");

    let cumulative = std::fs::read_to_string(out.join("cumulative.csv")).unwrap();
    assert_eq!(cumulative.lines().next(), Some("period,equal-weight,min-cvar@0.9"));
    assert_eq!(cumulative.lines().count(), 25);
}

#[test]
fn report_rejects_runs_over_different_periods() {
    let work = tempfile::tempdir().unwrap();
    let data = tiny_panel(work.path());
    for (dir, split) in [("a", "200112"), ("b", "200206")] {
        let output = bin()
            .args(["backtest", "--data"])
            .arg(&data)
            .args(["--strategy", "equal-weight", "--window", "12", "--split", split, "--out-dir"])
            .arg(work.path().join(dir))
            .output()
            .unwrap();
        assert_exit(&output, 0);
    }
    let output = bin()
        .arg("report")
        .arg(work.path().join("a"))
        .arg(work.path().join("b"))
        .arg("--out-dir")
        .arg(work.path().join("report"))
        .output()
        .unwrap();
    assert_exit(&output, 3);
}

#[test]
fn sweep_reports_the_selected_grid_point() {
    let work = tempfile::tempdir().unwrap();
    let data = tiny_panel(work.path());
    let out = work.path().join("sweep");
    let output = bin()
        .args(["sweep", "--data"])
        .arg(&data)
        .args([
            "--betas",
            "0.85,0.9",
            "--windows",
            "12",
            "--lambdas",
            "0.001,0.05",
            "--split",
            "200312",
            "--jobs",
            "2",
            "--out-dir",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert_exit(&output, 0);
    let sweep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    let entries = sweep["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    let best = sweep["best_index"].as_u64().unwrap() as usize;
    assert_eq!(sweep["selected"]["lambda"], entries[best]["lambda"]);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("selected window=12"), "stdout: {stdout}");
}
