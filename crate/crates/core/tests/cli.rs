use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cfm_lab::report::{STEPS_HEADER, SWEEP_HEADER};

const BIN: &str = env!("CARGO_BIN_EXE_cfm-lab");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/configs"))
}

#[test]
fn missing_sigma_is_a_config_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "gamma = 0.997\nlambda = 50\n").unwrap();
    let out = dir.path().join("out");
    let res = run(&["simulate", "--config", path_str(&cfg), "--out", path_str(&out)]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("sigma"));
    assert!(!out.exists());
}

#[test]
fn invalid_value_and_unknown_key_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = path_str(dir.path());
    for set in ["gamma=1.5", "theta=0", "sigma=-0.1", "bogus=1"] {
        let res = run(&["simulate", "--set", "gamma=0.99", "--set", "sigma=0.4", "--set", "lambda=50", "--set", set, "--out", out]);
        assert_eq!(res.status.code(), Some(2), "{set}");
    }
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn missing_config_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(&["sweep", "--config", path_str(&dir.path().join("nope.cfg")), "--out", path_str(dir.path())]);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn simulate_writes_steps_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("high_fee_path.cfg");
    let res = run(&["simulate", "--config", path_str(&cfg), "--out", path_str(dir.path())]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(dir.path().join("steps.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], STEPS_HEADER);
    assert_eq!(lines.len(), 1001);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 11));
    let manifest = fs::read_to_string(dir.path().join("steps.manifest.txt")).unwrap();
    assert!(manifest.contains("# master_seed = 42"));
    assert!(manifest.contains("gamma = 0.96"));
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    let res = run(&["simulate", "--set", "gamma=0.98", "--set", "sigma=0.6", "--set", "lambda=75", "--seed", "9", "--out", path_str(&first)]);
    assert_eq!(res.status.code(), Some(0));
    let manifest = first.join("steps.manifest.txt");
    let res = run(&["simulate", "--config", path_str(&manifest), "--out", path_str(&second)]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(fs::read(first.join("steps.csv")).unwrap(), fs::read(second.join("steps.csv")).unwrap());
}

#[test]
fn full_grid_sweep_has_108_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("paper_grid.cfg");
    let res = run(&["sweep", "--config", path_str(&cfg), "--paths", "2", "--set", "n_steps=50", "--out", path_str(dir.path())]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], SWEEP_HEADER);
    assert_eq!(lines.len(), 109);
    let keys: Vec<(f64, f64, f64)> = lines[1..]
        .iter()
        .map(|l| {
            let f: Vec<f64> = l.split(',').take(3).map(|v| v.parse().unwrap()).collect();
            (f[2], f[1], f[0])
        })
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(keys, sorted);
    assert!(fs::read_to_string(dir.path().join("sweep.manifest.txt")).unwrap().contains("sigma = [0.2, 0.4, 0.6, 0.8]"));
}

#[test]
fn single_path_sweep_has_zero_std() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(&["sweep", "--set", "gamma=0.997", "--set", "sigma=0.4", "--set", "lambda=50", "--paths", "1", "--out", path_str(dir.path())]);
    assert_eq!(res.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row.len(), 6);
    assert_eq!(row[4], "0");
    assert_eq!(row[5], "1");
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn quick_verify_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(&["verify", "--quick", "--out", path_str(dir.path())]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stdout));
    let report = fs::read_to_string(dir.path().join("verify_report.txt")).unwrap();
    assert_eq!(report.lines().count(), 5);
    assert!(report.lines().all(|l| l.starts_with("[PASS]")));
}
