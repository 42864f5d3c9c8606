use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn racenav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_racenav"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SHORT_NOMINAL: &str = r#"{"duration_s": 3.0, "seed": 4}"#;

#[test]
fn run_nominal_writes_trace_and_summary() {
    let dir = TempDir::new().unwrap();
    let sc = write(dir.path(), "short.json", SHORT_NOMINAL);
    let out = dir.path().join("trace.csv");
    let o = racenav(&["run", sc.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1, "stdout carries only the summary");
    let v: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
    assert_eq!(v["scenario"], "short");
    assert_eq!(v["off_track"], false);
    assert_eq!(v["completed"], true);
    assert_eq!(v["seed"], 4);
    let trace = std::fs::read_to_string(out).unwrap();
    assert!(trace.starts_with("t,true_x,true_y,true_yaw,est_x,est_y,est_yaw,z1_x"));
    assert_eq!(trace.lines().count(), 301);
}

#[test]
fn seed_override_is_reported_and_reproducible() {
    let dir = TempDir::new().unwrap();
    let sc = write(dir.path(), "short.json", SHORT_NOMINAL);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = racenav(&["run", sc.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "99"]);
        (stdout(&o), std::fs::read(out).unwrap())
    };
    let (a, ta) = run("a.csv");
    let (b, tb) = run("b.csv");
    assert!(a.contains(r#""seed":99"#));
    assert_eq!(a, b);
    assert_eq!(ta, tb);
}

#[test]
fn ungated_fault_scenario_exits_two() {
    let dir = TempDir::new().unwrap();
    let sc = write(
        dir.path(),
        "ungated.json",
        r#"{
            "duration_s": 9.0,
            "fusion": {"gating": false},
            "faults": [
                {"source": 0, "t_start": 5.0, "t_end": 12.0, "mode": {"bias": [0.0, 20.0]}},
                {"source": 1, "t_start": 5.0, "t_end": 12.0, "mode": {"bias": [0.0, 20.0]}}
            ]
        }"#,
    );
    let out = dir.path().join("t.csv");
    let o = racenav(&["run", sc.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stdout(&o).contains(r#""off_track":true"#));
    assert!(out.exists());
}

#[test]
fn missing_file_exits_one() {
    let o = racenav(&["run", "/nonexistent/scenario.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).is_empty());
    assert!(stderr(&o).contains("scenario.json"));
}

#[test]
fn malformed_scenario_names_the_field() {
    let dir = TempDir::new().unwrap();
    let sc = write(dir.path(), "bad.json", r#"{"rates": {"gps_hz": "fast"}}"#);
    let o = racenav(&["run", sc.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("rates.gps_hz"), "{}", stderr(&o));
    let sc = write(dir.path(), "broken.json", "{\n  \"seed\": 1,\n  oops\n}");
    let o = racenav(&["validate", sc.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn validate_accepts_good_and_rejects_bad() {
    let dir = TempDir::new().unwrap();
    let good = write(dir.path(), "good.json", SHORT_NOMINAL);
    assert_eq!(racenav(&["validate", good.to_str().unwrap()]).status.code(), Some(0));

    let gate = write(dir.path(), "gate.json", r#"{"fusion": {"epsilon": 6.0, "delta": 5.0}}"#);
    let o = racenav(&["validate", gate.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("GateParams"), "{}", stderr(&o));

    let overlap = write(
        dir.path(),
        "overlap.json",
        r#"{"faults": [
            {"source": 0, "t_start": 1.0, "t_end": 3.0, "mode": "dropout"},
            {"source": 0, "t_start": 2.0, "t_end": 4.0, "mode": {"noise_inflation": 3.0}}
        ]}"#,
    );
    let o = racenav(&["validate", overlap.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("faults[1]"), "{}", stderr(&o));

    let unknown = write(dir.path(), "unknown.json", r#"{"trak": {}}"#);
    let o = racenav(&["validate", unknown.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("trak"));
}

#[test]
fn shipped_scenarios_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        let o = racenav(&["validate", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", p.display(), stderr(&o));
        n += 1;
    }
    assert!(n >= 5);
}

#[test]
fn scenarios_command_writes_loadable_files() {
    let dir = TempDir::new().unwrap();
    let o = racenav(&["scenarios", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let p = dir.path().join("pylons.json");
    assert_eq!(racenav(&["validate", p.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn acceptance_single_criterion() {
    let o = racenav(&["acceptance", "--only", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().starts_with("[PASS]  1"));
    assert_eq!(racenav(&["acceptance", "--only", "42"]).status.code(), Some(1));
}

#[test]
fn acceptance_full_table() {
    let o = racenav(&["acceptance"]);
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]") || l.starts_with("[FAIL]")).count(), 11);
    assert_eq!(o.status.code(), Some(0), "{text}");
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(racenav(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(racenav(&["--help"]).status.code(), Some(0));
}
