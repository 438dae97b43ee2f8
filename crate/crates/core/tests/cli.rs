//! Integration tests for the `dsmn` binary: output schema, exit codes,
//! config-file precedence, and byte-level reproducibility of numeric
//! columns.

use std::process::{Command, Output};

fn dsmn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsmn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("UTF-8 output")
}

/// The CSV body (everything after the `#` header lines).
fn csv_body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn reruns_byte_reproduce_numeric_columns() {
    let args = [
        "trinomial-curves",
        "--counts", "2,1,1",
        "--assertions", "leq,ratio",
        "--methods", "ddsm,ddsm-mc",
        "--grid-points", "9",
        "--r0-points", "5",
        "--n-draws", "20000",
        "--seed", "41",
    ];
    let first = dsmn(&args);
    let second = dsmn(&args);
    assert!(first.status.success());
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn thread_count_does_not_change_results() {
    let base = [
        "trinomial-curves",
        "--counts", "2,1,1",
        "--assertions", "leq",
        "--methods", "ddsm-mc",
        "--grid-points", "5",
        "--n-draws", "40000",
        "--seed", "42",
    ];
    let mut one = base.to_vec();
    one.extend(["--threads", "1"]);
    let mut four = base.to_vec();
    four.extend(["--threads", "4"]);
    let a = dsmn(&one);
    let b = dsmn(&four);
    assert!(a.status.success() && b.status.success());
    assert_eq!(csv_body(&stdout(&a)), csv_body(&stdout(&b)));
}

#[test]
fn single_observation_leq_matches_diagonal() {
    let out = dsmn(&[
        "trinomial-curves",
        "--counts", "1,0,0",
        "--assertions", "leq",
        "--methods", "ddsm",
        "--grid-points", "9",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut data_rows = 0;
    for line in csv_body(&text).lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let x: f64 = cols[2].parse().unwrap();
        let p: f64 = cols[3].parse().unwrap();
        let p_plus_r: f64 = cols[4].parse().unwrap();
        assert!(p.abs() < 1e-9);
        assert!((p_plus_r - x).abs() < 1e-9, "p+r {p_plus_r} vs theta0 {x}");
        data_rows += 1;
    }
    assert_eq!(data_rows, 9);
}

#[test]
fn output_embeds_version_config_and_seed() {
    let out = dsmn(&["independence", "--synthetic", "50", "--n-draws", "500", "--seed", "7"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# version: "));
    assert!(text.contains("\"seed\":7"));
    assert!(text.contains("\"subcommand\":\"independence\""));
}

#[test]
fn json_mirrors_csv_rows() {
    let args = [
        "linkage-report",
        "--proposals", "20000",
        "--n-accepted", "500",
        "--grid-points", "5",
        "--seed", "9",
    ];
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let csv_out = dsmn(&args);
    let json_out = dsmn(&json_args);
    assert!(csv_out.status.success() && json_out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&json_out)).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    let csv_rows = csv_body(&stdout(&csv_out)).lines().count() - 1; // minus header
    assert_eq!(rows.len(), csv_rows);
    assert!(doc["metadata"]["acceptance"]["rate"].as_f64().unwrap() > 0.0);
    // same seed, same numbers through either format
    assert_eq!(
        rows[1]["lower_cdf"].as_f64(),
        csv_body(&stdout(&csv_out))
            .lines()
            .nth(2)
            .and_then(|l| l.split(',').nth(2))
            .and_then(|v| v.parse().ok())
    );
}

#[test]
fn usage_errors_exit_one() {
    let out = dsmn(&["independence"]); // neither --input nor --synthetic
    assert_eq!(out.status.code(), Some(1));
    let out = dsmn(&["no-such-subcommand"]);
    assert_eq!(out.status.code(), Some(1));
    let out = dsmn(&["trinomial-curves", "--cell", "9"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn resource_refusal_exits_one_as_usage() {
    // simplex benchmark beyond granularity 3 is a usage refusal
    let out = dsmn(&["benchmark", "--methods", "simplex", "--granularities", "4", "--n", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("granularity"));
}

#[test]
fn config_file_fills_defaults_and_flags_override() {
    let dir = std::env::temp_dir().join("dsmn-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("config.json");
    std::fs::write(&config, r#"{"seed": 123, "n_draws": 500}"#).unwrap();
    let cfg = config.to_str().unwrap();

    let from_file = dsmn(&["independence", "--synthetic", "50", "--config", cfg]);
    assert!(from_file.status.success());
    let text = stdout(&from_file);
    assert!(text.contains("\"seed\":123"), "config seed applies: {text}");
    assert!(text.contains("\"n_draws_resolved\":500"));

    let overridden = dsmn(&[
        "independence", "--synthetic", "50", "--config", cfg, "--seed", "9",
    ]);
    assert!(stdout(&overridden).contains("\"seed\":9"), "flag beats file");

    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"unknown_key": 1}"#).unwrap();
    let rejected = dsmn(&["independence", "--synthetic", "5", "--config", bad.to_str().unwrap()]);
    assert_eq!(rejected.status.code(), Some(1));
}

#[test]
fn independence_reads_csv_input() {
    let dir = std::env::temp_dir().join("dsmn-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let pairs = dir.join("pairs.csv");
    let mut text = String::from("x,y\n");
    for i in 0..40 {
        let v = (i as f64 + 0.5) / 40.0;
        text.push_str(&format!("{v},{v}\n"));
    }
    std::fs::write(&pairs, text).unwrap();
    let out = dsmn(&[
        "independence",
        "--input", pairs.to_str().unwrap(),
        "--n-draws", "2000",
        "--format", "json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["rows"][0]["n"].as_u64(), Some(40));
}

#[test]
fn validate_single_suite_green() {
    let out = dsmn(&["validate", "--suites", "lp,rip", "--seed", "17"]);
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.lines().any(|l| l.starts_with("PASS [Lp]")));
    assert!(!stderr.contains("FAIL"));
}
