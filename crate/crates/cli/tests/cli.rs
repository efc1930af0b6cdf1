//! End-to-end tests of the `polsim` binary: output layout, determinism,
//! config round trips, and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut command = Command::new(env!("CARGO_BIN_EXE_polsim"));
    command.env_remove("POLSIM_THREADS");
    command
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn stdout_of(output: &Output) -> String {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).expect("utf-8 output")
}

fn parse_csv(text: &str, expected_header: &str) -> Vec<Vec<f64>> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(expected_header));
    lines
        .map(|line| {
            line.split(',')
                .map(|cell| cell.parse::<f64>().expect("numeric cell"))
                .collect()
        })
        .collect()
}

#[test]
fn single_dist_emits_exact_zero_row() {
    let output = run(&["single-dist", "--resolution", "0.6", "--grid=-1:1:0.5"]);
    let text = stdout_of(&output);
    let zero_row = text
        .lines()
        .find(|l| l.starts_with("0.0000000000000000e0,"))
        .expect("row at s1m = 0");
    assert!(
        zero_row.ends_with(",0.0000000000000000e0"),
        "flipped-sign density should vanish exactly at 0: {zero_row}"
    );
    let rows = parse_csv(&text, "s1m,p_plus,p_minus");
    assert_eq!(rows.len(), 5);
}

#[test]
fn single_dist_mass_sums_to_one() {
    let output = run(&["single-dist", "--resolution", "0.6", "--grid=-5:5:0.01"]);
    let rows = parse_csv(&stdout_of(&output), "s1m,p_plus,p_minus");
    let mass: f64 = rows.iter().map(|r| (r[1] + r[2]) * 0.01).sum();
    assert!((mass - 1.0).abs() < 1e-3, "total mass {mass}");
}

#[test]
fn pair_dist_supports_all_channel_tokens() {
    for channel in ["++", "+-", "-+", "--"] {
        let output = run(&[
            "pair-dist",
            "--resolution",
            "0.6",
            "--grid=-1:1:0.5",
            &format!("--channel={channel}"),
        ]);
        let rows = parse_csv(&stdout_of(&output), "s1ma,s1mb,density");
        assert_eq!(rows.len(), 25, "channel {channel}");
        assert!(rows.iter().all(|r| r[2] >= 0.0));
    }
}

#[test]
fn pair_dist_peaks_on_the_diagonal_at_coarse_resolution() {
    let output = run(&["pair-dist", "--resolution", "2", "--grid=-4:4:0.05", "--channel=+-"]);
    let rows = parse_csv(&stdout_of(&output), "s1ma,s1mb,density");
    let best = rows
        .iter()
        .max_by(|a, b| a[2].partial_cmp(&b[2]).unwrap())
        .unwrap();
    assert!((best[0] - 1.4).abs() <= 0.05, "argmax a {}", best[0]);
    assert!((best[1] - 1.4).abs() <= 0.05, "argmax b {}", best[1]);
}

#[test]
fn quasi_table_rows_match_closed_weights() {
    let output = run(&["quasi-table"]);
    let rows = parse_csv(&stdout_of(&output), "s1a,s2a,s1b,s2b,probability,K");
    assert_eq!(rows.len(), 36);
    let total: f64 = rows.iter().map(|r| r[4]).sum();
    assert!((total - 1.0).abs() < 1e-12, "probabilities sum to {total}");
    let negative_center = rows
        .iter()
        .find(|r| r[0] == 0.0 && r[1] == 1.0 && r[2] == 0.0 && r[3] == -1.0)
        .expect("center row present");
    assert!(
        (negative_center[4] + std::f64::consts::SQRT_2 / 8.0).abs() < 1e-12,
        "center row probability {}",
        negative_center[4]
    );
    for r in &rows {
        let k = r[0] * r[2] + r[1] * r[2] - r[0] * r[3] + r[1] * r[3];
        assert_eq!(r[5], k, "row {r:?}");
    }
}

#[test]
fn k_sweep_modes_agree_and_cross_two_near_threshold() {
    let closed = run(&["k-sweep", "--from", "0.5", "--to", "2.5", "--points", "5"]);
    let quad = run(&[
        "k-sweep", "--from", "0.5", "--to", "2.5", "--points", "5", "--mode", "quadrature",
    ]);
    let closed_rows = parse_csv(&stdout_of(&closed), "delta_s,k_expectation");
    let quad_rows = parse_csv(&stdout_of(&quad), "delta_s,k_expectation");
    assert_eq!(closed_rows.len(), 5);
    for (c, q) in closed_rows.iter().zip(&quad_rows) {
        assert_eq!(c[0], q[0]);
        assert!((c[1] - q[1]).abs() < 1e-8, "δs={}: {} vs {}", c[0], c[1], q[1]);
    }
    assert!(closed_rows.windows(2).all(|w| w[1][1] > w[0][1]), "not monotone");

    let at_threshold =
        run(&["k-sweep", "--from", "1.143", "--to", "1.143", "--points", "1"]);
    let row = &parse_csv(&stdout_of(&at_threshold), "delta_s,k_expectation")[0];
    assert!((row[1] - 2.0).abs() < 1e-3, "value at 1.143: {}", row[1]);
}

#[test]
fn threshold_reports_json_value() {
    let output = run(&["threshold"]);
    let value: serde_json::Value = serde_json::from_str(stdout_of(&output).trim()).unwrap();
    let root = value["delta_s_star"].as_f64().expect("numeric threshold");
    assert!((root - 1.1425).abs() <= 0.0005, "threshold {root}");
}

#[test]
fn sample_is_byte_identical_across_reruns() {
    let args = ["sample", "--mode", "pair", "--resolution", "2", "--samples", "500", "--seed", "7"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success() && second.status.success());
    assert_eq!(first.stdout, second.stdout, "record CSV differs between reruns");
    assert_eq!(first.stderr, second.stderr, "summary differs between reruns");
    let summary: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&first.stderr).trim()).unwrap();
    assert!(summary["k_estimate"].is_f64());
    assert!(summary["std_error"].is_f64());
}

#[test]
fn sample_with_output_routes_records_to_file_and_summary_to_stdout() {
    let path = tmp("records.csv");
    let output = run(&[
        "sample",
        "--mode",
        "single",
        "--resolution",
        "0.6",
        "--samples",
        "200",
        "--seed",
        "3",
        "--output",
        path.to_str().unwrap(),
    ]);
    let summary: serde_json::Value = serde_json::from_str(stdout_of(&output).trim()).unwrap();
    assert!(summary["c_estimate"].is_f64());
    let csv = std::fs::read_to_string(&path).expect("records file written");
    assert!(csv.starts_with("s1ma,s1mb,sigma_a,sigma_b\n"));
    assert_eq!(csv.lines().count(), 201);
    let record = csv.lines().nth(1).unwrap();
    let cells: Vec<&str> = record.split(',').collect();
    assert_eq!(cells.len(), 4);
    assert!(cells[1].is_empty() && cells[3].is_empty(), "single records leave pair cells empty");
}

#[test]
fn emit_config_replays_byte_for_byte() {
    let config_path = tmp("job.json");
    let emitted = run(&[
        "single-dist",
        "--resolution",
        "0.6",
        "--grid=-2:2:0.25",
        "--format",
        "json",
        "--emit-config",
    ]);
    std::fs::write(&config_path, stdout_of(&emitted)).unwrap();

    let direct = run(&["single-dist", "--resolution", "0.6", "--grid=-2:2:0.25", "--format", "json"]);
    let replayed = run(&["--config", config_path.to_str().unwrap()]);
    assert_eq!(direct.stdout, replayed.stdout, "config replay differs from direct run");

    let value: serde_json::Value = serde_json::from_str(stdout_of(&direct).trim()).unwrap();
    assert_eq!(value["columns"], serde_json::json!(["s1m", "p_plus", "p_minus"]));
    assert_eq!(value["rows"].as_array().unwrap().len(), 17);
}

#[test]
fn thread_count_does_not_change_output() {
    let base = ["sample", "--mode", "pair", "--resolution", "1.0", "--samples", "2000", "--seed", "5"];
    let one = bin().args(base).args(["--threads", "1"]).output().unwrap();
    let two = bin().args(base).env("POLSIM_THREADS", "2").output().unwrap();
    assert!(one.status.success() && two.status.success());
    assert_eq!(one.stdout, two.stdout, "records depend on thread count");
    assert_eq!(one.stderr, two.stderr, "summary depends on thread count");
}

#[test]
fn usage_errors_exit_with_code_two() {
    let cases: &[&[&str]] = &[
        &["single-dist", "--resolution", "0.6", "--grid=bad"],
        &["single-dist", "--resolution", "0.6", "--grid=2:1:0.5"],
        &["single-dist", "--resolution", "-1", "--grid=-1:1:0.5"],
        &["pair-dist", "--resolution", "0.6", "--grid=-1:1:0.5", "--channel=+x"],
        &["sample", "--mode", "pair", "--resolution", "2", "--samples", "0", "--seed", "1"],
        &["k-sweep", "--from", "2", "--to", "1", "--points", "3"],
        &["--config", "/nonexistent/job.json"],
        &[],
    ];
    for args in cases {
        let output = run(args);
        assert_eq!(
            output.status.code(),
            Some(2),
            "args {args:?}: status {:?}, stderr: {}",
            output.status,
            String::from_utf8_lossy(&output.stderr)
        );
    }
}

#[test]
fn invalid_thread_environment_is_a_usage_error() {
    let output = bin()
        .args(["threshold"])
        .env("POLSIM_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}
