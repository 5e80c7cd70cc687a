use std::fs;
use std::process::{Command, Output};

use phyqoe::cascade::{read_sweep_csv, EvaluationReport};

fn phyqoe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phyqoe"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn evaluate_preset_emits_json_report() {
    let o = phyqoe(&["evaluate", "--preset", "buffered_video"]);
    assert_eq!(o.status.code(), Some(0));
    let r: EvaluationReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r.scenario, "buffered_video");
    assert!((1.0..=5.0).contains(&r.mos.value));
}

#[test]
fn presets_round_trip_through_scenario_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("game.toml");
    let o = phyqoe(&["presets", "mobile_game", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));

    let from_file = phyqoe(&["evaluate", "--scenario", path.to_str().unwrap()]);
    let from_preset = phyqoe(&["evaluate", "--preset", "mobile_game"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, from_preset.stdout);
}

#[test]
fn sweep_writes_csv_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = phyqoe(&[
        "sweep",
        "--preset",
        "voice_call",
        "--sinr-min",
        "5",
        "--sinr-max",
        "15",
        "--step",
        "2.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let rows = read_sweep_csv(&fs::read_to_string(&out).unwrap()).unwrap();
    let grid: Vec<f64> = rows.iter().map(|r| r.sinr_db).collect();
    assert_eq!(grid, [5.0, 7.5, 10.0, 12.5, 15.0]);
}

#[test]
fn validate_flags_verbatim_divergence_but_passes() {
    let o = phyqoe(&[
        "validate",
        "--lambda",
        "70",
        "--mu",
        "100",
        "--k",
        "10",
        "--bler",
        "0.1",
        "--n-max",
        "4",
        "--arrivals",
        "100000",
        "--trials",
        "100000",
        "--seed",
        "11",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("DIVERGES"));
    assert!(text.contains("expected analytic/oracle divergence"));
    assert!(text.trim_end().ends_with("overall: PASS"));
}

#[test]
fn validate_json_uses_scenario_operating_point() {
    let o = phyqoe(&[
        "validate",
        "--preset",
        "video_call",
        "--arrivals",
        "50000",
        "--trials",
        "20000",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["input"]["queue"]["lambda"], 250.0);
    assert_eq!(v["input"]["queue"]["k_max"], 16);
    assert_eq!(v["passed"], true);
}

#[test]
fn failed_validation_exits_with_one() {
    // 300 arrivals at rho = 1 leave the queue far from steady state
    let o = phyqoe(&[
        "validate",
        "--lambda",
        "100",
        "--mu",
        "100",
        "--k",
        "16",
        "--bler",
        "0.5",
        "--arrivals",
        "300",
        "--trials",
        "100",
        "--seed",
        "3",
        "--warmup",
        "0.0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("overall: FAIL"));
}

#[test]
fn input_errors_exit_with_two() {
    for args in [
        &["evaluate"][..],
        &["evaluate", "--preset", "fax"],
        &["evaluate", "--scenario", "/nonexistent/s.toml"],
        &["validate", "--mu", "1", "--k", "4", "--bler", "0.1"],
        &[
            "validate", "--lambda", "5", "--mu", "1", "--k", "4", "--bler", "0.1",
        ],
        &[
            "sweep",
            "--preset",
            "voice_call",
            "--sinr-min",
            "10",
            "--sinr-max",
            "5",
            "--step",
            "1",
        ],
    ] {
        let o = phyqoe(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    }
}

#[test]
fn validate_is_repeatable_at_full_length() {
    let args = [
        "validate",
        "--lambda",
        "0.5",
        "--mu",
        "1",
        "--k",
        "2",
        "--bler",
        "0.1",
        "--n-max",
        "4",
        "--harq-mode",
        "cumulative_product",
        "--seed",
        "2024",
    ];
    let a = phyqoe(&args);
    let b = phyqoe(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
}
