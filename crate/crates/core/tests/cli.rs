use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn eotrack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eotrack"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

fn lines(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn run_on_simulated_straight_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = eotrack(&["run", "--out", &out_arg(dir.path()), "--set", "input=simulate:straight"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["plane.json", "detections.jsonl", "track.jsonl", "metrics.json", "gt.jsonl"] {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }
    let metrics: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("metrics.json")).unwrap()).unwrap();
    assert!(metrics["detection_rate"].is_number());
    assert_eq!(metrics["frames"], 44);

    let detections = lines(&dir.path().join("detections.jsonl"));
    let track = lines(&dir.path().join("track.jsonl"));
    assert_eq!(detections.len(), 44);
    assert_eq!(track.len(), 44);
    for (k, d) in detections.iter().enumerate() {
        assert_eq!(d["frame_index"], k);
    }
    let ts: Vec<f64> = track.iter().map(|r| r["t"].as_f64().unwrap()).collect();
    assert!(ts.windows(2).all(|w| w[1] > w[0]));
    // stdout carries the same metrics
    let printed: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(printed, metrics);
}

#[test]
fn non_positive_ransac_threshold_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    for value in ["0", "-0.02"] {
        let set = format!("ground.init.ransac.inlier_threshold={value}");
        let out = eotrack(&["run", "--out", &out_arg(dir.path()), "--set", &set]);
        assert_eq!(out.status.code(), Some(2));
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("ground.init.ransac.inlier_threshold"), "{err}");
    }
    assert!(!dir.path().join("track.jsonl").exists());
}

#[test]
fn config_file_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"detection": {"dbscan": {"eps": -1}}}"#).unwrap();
    let out = eotrack(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("detection.dbscan.eps"));

    std::fs::write(&cfg, "{not json").unwrap();
    assert_eq!(eotrack(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(eotrack(&["run", "--set", "no_equals_sign"]).status.code(), Some(2));
    assert_eq!(eotrack(&["run", "--set", "input=simulate:spiral"]).status.code(), Some(2));
    assert_eq!(eotrack(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = eotrack(&[
            "run",
            "--seed",
            "7",
            "--out",
            &out_arg(dir.path()),
            "--set",
            "scenario.duration=4",
        ]);
        assert!(out.status.success());
    }
    for name in ["track.jsonl", "detections.jsonl", "plane.json", "metrics.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs");
    }
}

#[test]
fn init_ground_uses_the_sensor_prior() {
    let dir = tempfile::tempdir().unwrap();
    for (sensor, expected) in [("lidar_like", [0.0, 0.0, 1.0, 1.0]), ("camera_like", [0.0, 1.0, 0.0, -0.5])] {
        let out = eotrack(&[
            "init-ground",
            "--out",
            &out_arg(dir.path()),
            "--set",
            &format!("sensor={sensor}"),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("plane.json")).unwrap()).unwrap();
        let prior: Vec<f64> = serde_json::from_value(report["prior"].clone()).unwrap();
        let plane: Vec<f64> = serde_json::from_value(report["plane"].clone()).unwrap();
        assert_eq!(prior, expected);
        for k in 0..4 {
            assert!((plane[k] - expected[k]).abs() < 0.02, "{sensor}: {plane:?}");
        }
    }
}

#[test]
fn init_ground_without_floor_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("frames");
    std::fs::create_dir(&frames).unwrap();
    let mut csv = String::from("x,y,z\n");
    for i in 0..50 {
        csv.push_str(&format!("{},{},5.0\n", i as f64 * 0.01, i as f64 * 0.02));
    }
    std::fs::write(frames.join("0_0.csv"), csv).unwrap();
    let out = eotrack(&[
        "init-ground",
        "--out",
        &out_arg(dir.path()),
        "--set",
        &format!("input={}", frames.display()),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ground initialization failed"));
}

#[test]
fn simulate_then_run_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    let run = dir.path().join("run");
    let common = ["--set", "scenario.duration=3", "--seed", "2"];
    let out = eotrack(&[&["simulate", "--out", &out_arg(&sim)], &common[..]].concat());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["frames"], 13);

    let input = format!("input={}", sim.join("frames").display());
    let truth = format!("truth={}", sim.join("truth.json").display());
    let out = eotrack(&["run", "--out", &out_arg(&run), "--set", &input, "--set", &truth, "--seed", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let from_run: Value = serde_json::from_str(&std::fs::read_to_string(run.join("metrics.json")).unwrap()).unwrap();

    let gt = sim.join("gt.jsonl");
    let out = eotrack(&["evaluate", "--out", &out_arg(&run), "--gt", gt.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let evaluated: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(evaluated["frames"], 13);
    assert_eq!(evaluated["detection_rate"], from_run["detection_rate"]);
    let (a, b) = (
        evaluated["tracking"]["centroid_rmse"].as_f64().unwrap(),
        from_run["tracking"]["centroid_rmse"].as_f64().unwrap(),
    );
    // the run scores in the estimated floor frame, evaluate in the true one
    assert!((a - b).abs() < 0.01, "{a} vs {b}");
}
