//! End-to-end checks of the command-line surface: config handling, exit
//! codes, output files, and the env-var thread cap.

use std::path::PathBuf;
use std::process::Command;

fn rgl() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rgl"))
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let path = tmp(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn simulate_writes_output_and_exits_zero() {
    let out = tmp("simulate_out.csv");
    let config = write_config(
        "simulate_ok.json",
        &format!(
            r#"{{
              "n": 2000,
              "checkpoints": [0.5, 1.2],
              "trials": 4,
              "master_seed": 7,
              "strategy": {{ "kind": {{ "type": "random_coloring" }}, "r": 2, "seed": 3 }},
              "metrics": ["largest_per_color", "susceptibility_per_color", "matching_counts"],
              "output": {{ "path": {:?}, "format": "csv" }}
            }}"#,
            out
        ),
    );
    let result = rgl().args(["simulate", "--config"]).arg(&config).output().unwrap();
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let stdout: serde_json::Value = serde_json::from_slice(&result.stdout).unwrap();
    assert_eq!(stdout["n"], 2000);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("trial,seed,t,color,largest_frac"));
    // 4 trials x 2 checkpoints x 2 colors + header
    assert_eq!(csv.lines().count(), 17);
}

#[test]
fn simulate_is_deterministic_across_thread_counts() {
    let config = write_config(
        "simulate_det.json",
        r#"{
          "n": 3000,
          "checkpoints": [0.9],
          "trials": 6,
          "master_seed": 11,
          "strategy": { "kind": { "type": "isolated_matching" }, "r": 2, "seed": 5 },
          "metrics": ["largest_per_color", "susceptibility_per_color"]
        }"#,
    );
    let run = |threads: &str| {
        let out = rgl()
            .args(["simulate", "--config"])
            .arg(&config)
            .env("RGL_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn simulate_failing_predicate_exits_one() {
    let config = write_config(
        "simulate_fail.json",
        r#"{
          "n": 2000,
          "checkpoints": [0.2],
          "trials": 4,
          "master_seed": 7,
          "strategy": { "kind": { "type": "random_coloring" }, "r": 2, "seed": 3 },
          "predicate": { "type": "all_colors_giant", "min_frac": 0.5 },
          "require_fraction": 0.9
        }"#,
    );
    let result = rgl().args(["simulate", "--config"]).arg(&config).output().unwrap();
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn config_errors_exit_two() {
    // unreadable path
    let result = rgl().args(["simulate", "--config", "/nonexistent.json"]).output().unwrap();
    assert_eq!(result.status.code(), Some(2));

    // invalid strategy parameters
    let config = write_config(
        "simulate_bad.json",
        r#"{
          "n": 100,
          "checkpoints": [0.5],
          "trials": 1,
          "master_seed": 1,
          "strategy": { "kind": { "type": "isolated_matching" }, "r": 3, "seed": 0 }
        }"#,
    );
    let result = rgl().args(["simulate", "--config"]).arg(&config).output().unwrap();
    assert_eq!(result.status.code(), Some(2));

    // composite plane order through the oracle path
    let result = rgl().args(["oracle", "plane", "--q", "4"]).output().unwrap();
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn threshold_brackets_and_reports() {
    let config = write_config(
        "threshold.json",
        r#"{
          "n": 2000,
          "checkpoints": [1.0],
          "trials": 8,
          "master_seed": 42,
          "strategy": { "kind": { "type": "random_coloring" }, "r": 1, "seed": 1 }
        }"#,
    );
    let result = rgl()
        .args(["threshold", "--config"])
        .arg(&config)
        .args(["--predicate", "giant", "--frac", "0.2", "--lo", "0.2", "--hi", "1.4", "--res", "0.2"])
        .output()
        .unwrap();
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let estimate: serde_json::Value = serde_json::from_slice(&result.stdout).unwrap();
    assert_eq!(estimate["increasing"], true);
    let (lo, hi) = (
        estimate["lo"].as_f64().unwrap(),
        estimate["hi"].as_f64().unwrap(),
    );
    assert!(lo >= 0.2 && hi <= 1.4 && hi - lo <= 0.2 + 1e-12);

    // an inconsistent bracket is a check failure, exit 1
    let result = rgl()
        .args(["threshold", "--config"])
        .arg(&config)
        .args(["--predicate", "giant", "--frac", "0.2", "--lo", "1.2", "--hi", "1.4", "--res", "0.2"])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn oracle_outputs_parse() {
    let result = rgl().args(["oracle", "x-blowup"]).output().unwrap();
    assert!(result.status.success());
    let value: serde_json::Value = serde_json::from_slice(&result.stdout).unwrap();
    let blow = value["blow_up_time"].as_f64().unwrap();
    assert!((1.055..=1.075).contains(&blow));

    let result = rgl().args(["oracle", "plane", "--q", "2"]).output().unwrap();
    assert!(result.status.success());
    let value: serde_json::Value = serde_json::from_slice(&result.stdout).unwrap();
    assert_eq!(value["order"], 7);
    assert_eq!(value["lines"].as_array().unwrap().len(), 7);

    let result = rgl().args(["oracle", "adaptive", "--optimize"]).output().unwrap();
    assert!(result.status.success());
    let value: serde_json::Value = serde_json::from_slice(&result.stdout).unwrap();
    let t = value["optimal_t"].as_f64().unwrap();
    assert!((t - 0.189).abs() < 2e-3);
    assert!(value["rounds"].as_f64().unwrap() <= 0.733);

    let result = rgl()
        .args(["oracle", "spectral", "--matrix", "1,1,0;1,1,0;0,0,0"])
        .output()
        .unwrap();
    assert!(result.status.success());
    let value: serde_json::Value = serde_json::from_slice(&result.stdout).unwrap();
    assert!((value["spectral_radius"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn verify_battery_is_green() {
    let result = rgl().arg("verify").output().unwrap();
    assert!(
        result.status.success(),
        "verify failed:\n{}",
        String::from_utf8_lossy(&result.stdout)
    );
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("count-paths"));
    assert!(!stdout.contains("FAIL"));
}
