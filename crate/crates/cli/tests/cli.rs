use std::fs;
use std::process::{Command, Output};

fn vilab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vilab"))
        .args(args)
        .env_remove("VILAB_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn list_shows_registry() {
    let o = vilab(&["list", "--format", "csv"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("name,dimension,tags\n"));
    assert!(out.contains("neg-identity-1d,1,"));
    assert!(out.contains("rotation-ball,2,"));
}

#[test]
fn solve_writes_outputs_and_json_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = vilab(&[
        "solve",
        "--problem",
        "rotation-ball",
        "--solver",
        "are",
        "--x0",
        "0.5,-0.5",
        "--iters",
        "100",
        "--format",
        "json",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["iterations"], 100);
    assert!(v["final_gap"].as_f64().unwrap() < 1e-6);
    for f in ["trajectory.jsonl", "summary.json"] {
        assert!(!fs::read(dir.path().join(f)).unwrap().is_empty(), "{f}");
    }
}

#[test]
fn seed_from_environment_matches_flag() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_vilab"));
        c.args(["solve", "--problem", "indef-diag-ball", "--iters", "20", "--format", "json"]);
        c.env_remove("VILAB_SEED");
        if let Some(s) = env {
            c.env("VILAB_SEED", s);
        }
        if let Some(s) = flag {
            c.args(["--seed", s]);
        }
        stdout(&c.output().unwrap())
    };
    assert_eq!(run(Some("7"), None), run(None, Some("7")));
    assert_ne!(run(Some("7"), None), run(None, Some("8")));
}

#[test]
fn merit_csv() {
    let o = vilab(&["merit", "--problem", "neg-identity-1d", "--x0", "-0.3", "--format", "csv"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row: Vec<f64> = out.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    // F(x) = -x on [-1, 1]: G(-0.3) = 0.3 * (-0.3) + 0.3 = 0.21
    assert!((row[0] - 0.21).abs() < 1e-12);
}

#[test]
fn check_reports_requested_conditions_in_order() {
    let o = vilab(&[
        "check",
        "--problem",
        "indef-diag-ball",
        "--condition",
        "gp-star,monotone",
        "--samples",
        "400",
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["condition"], "GP_STAR");
    assert_eq!(reports[1]["condition"], "MONOTONE");
    assert_eq!(reports[1]["verdict"], "VIOLATED");
}

#[test]
fn rate_csv_written_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let o = vilab(&[
        "rate",
        "--problem",
        "rotation-ball",
        "--solver",
        "eg",
        "--step",
        "0.25",
        "--x0",
        "0.5,0.5",
        "--format",
        "csv",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let file = fs::read_to_string(dir.path().join("rates.csv")).unwrap();
    assert_eq!(file, stdout(&o));
    assert!(file.starts_with("metric,N,value\n"));
    assert_eq!(file.lines().count(), 1 + 2 * 12);
}

#[test]
fn suite_passes_on_registry_problem() {
    let o = vilab(&["suite", "--problem", "neg-identity-1d"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("neg-identity-1d"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(vilab(&["solve", "--problem", "no-such-problem"]).status.code(), Some(1));
    assert_eq!(vilab(&["--bogus"]).status.code(), Some(1));
    assert_eq!(vilab(&["solve", "--problem", "rotation-ball", "--solver", "newton"]).status.code(), Some(1));
    assert_eq!(vilab(&["--help"]).status.code(), Some(0));
}

#[test]
fn divergence_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("overflow.json");
    fs::write(
        &path,
        r#"{"name": "overflow", "set": {"variant": "box", "params": {"lower": [-10], "upper": [10]}},
            "operator": {"kind": "affine", "matrix": [[1e308]], "offset": [0]}}"#,
    )
    .unwrap();
    let o = vilab(&["solve", "--problem", path.to_str().unwrap(), "--step", "0.1", "--x0", "5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("diverged"));
}
