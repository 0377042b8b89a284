use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const TRIANGLE: &str = r#"{"type": "triangle", "A": [0.0, 0.0], "B": [1.0, 0.0], "C": [0.3, 0.6]}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torsionlab")).args(args).output().expect("binary runs")
}

fn written(out: &Output) -> Vec<PathBuf> {
    String::from_utf8(out.stdout.clone()).unwrap().lines().map(PathBuf::from).collect()
}

fn file(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn validate_writes_reports_and_succeeds() {
    let dir = TempDir::new().unwrap();
    let out = run(&["validate", "-o", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let paths = written(&out);
    assert_eq!(paths.len(), 2);
    let json = paths.iter().find(|p| p.extension().unwrap() == "json").unwrap();
    let name = json.file_name().unwrap().to_str().unwrap();
    assert!(name.starts_with("validate_") && name.len() == "validate_".len() + 16 + ".json".len(), "{name}");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert!(report["claims"].as_object().unwrap().values().all(|v| v == true));
    let csv = fs::read_to_string(paths.iter().find(|p| p.extension().unwrap() == "csv").unwrap()).unwrap();
    assert!(csv.starts_with("name,value,target,tolerance,pass\n"));
}

#[test]
fn verbose_lists_claims() {
    let dir = TempDir::new().unwrap();
    let out = run(&["validate", "-v", "-o", dir.path().to_str().unwrap()]);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.lines().any(|l| l == "PASS ellipse_laplacian"), "{err}");
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["suite", "--n", "many"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_configs_exit_1() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let malformed = file(dir.path(), "a.json", "{ not json");
    let unknown = file(dir.path(), "b.json", r#"{"experiment": "suite", "colour": 1}"#);
    let other = file(dir.path(), "c.json", r#"{"experiment": "suite"}"#);
    for (cmd, cfg) in [("suite", &malformed), ("suite", &unknown), ("validate", &other)] {
        let res = run(&[cmd, "--config", cfg, "-o", out]);
        assert_eq!(res.status.code(), Some(1), "{cmd} {cfg}");
        assert!(String::from_utf8_lossy(&res.stderr).starts_with("error:"));
    }
    let bad_spec = file(dir.path(), "d.json", r#"{"type": "triangle", "A": [0, 0], "B": [1, 0], "C": [2, 0]}"#);
    assert_eq!(run(&["solve", "--spec", &bad_spec, "-o", out]).status.code(), Some(1));
    assert_eq!(run(&["solve", "-o", out]).status.code(), Some(1));
}

#[test]
fn failed_claims_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = run(&["endpoints", "--h", "0.1", "-o", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("failed claims:"));
    assert!(written(&out).iter().all(|p| p.exists()));
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let spec = file(dir.path(), "tri.json", TRIANGLE);
    let read = |jobs: &str| {
        let sub = dir.path().join(format!("run{jobs}"));
        let out = run(&["--jobs", jobs, "failpoint", "--spec", &spec, "--h", "0.05", "-o", sub.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        written(&out).iter().map(|p| (p.file_name().unwrap().to_owned(), fs::read(p).unwrap())).collect::<Vec<_>>()
    };
    let one = read("1");
    assert_eq!(one.len(), 4);
    assert_eq!(one, read("4"));
}

#[test]
fn config_file_and_flags_resolve_to_the_same_run() {
    let dir = TempDir::new().unwrap();
    let spec = file(dir.path(), "tri.json", TRIANGLE);
    let cfg = file(dir.path(), "run.json", &format!(r#"{{"experiment": "solve", "h": 0.1, "domain": {TRIANGLE}}}"#));
    let a = run(&["solve", "--spec", &spec, "--h", "0.1", "-o", dir.path().join("a").to_str().unwrap()]);
    let b = run(&["solve", "--config", &cfg, "-o", dir.path().join("b").to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    let names = |o: &Output| written(o).iter().map(|p| p.file_name().unwrap().to_owned()).collect::<Vec<_>>();
    assert_eq!(names(&a), names(&b));
    // A flag overrides the file and changes the hash.
    let c = run(&["solve", "--config", &cfg, "--h", "0.2", "-o", dir.path().join("c").to_str().unwrap()]);
    assert_ne!(names(&a), names(&c));
}
