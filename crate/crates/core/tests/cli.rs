use std::path::Path;
use std::process::{Command, Output};

fn ccr(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccr"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn ccr")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const BELL: &str = r#"{"dims":[2,2],"vector":[[0.7071067811865476,0],[0,0],[0,0],[0.7071067811865476,0]]}"#;

#[test]
fn verify_pure_batch_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = ccr(
        dir.path(),
        &["verify", "--relation", "ccr-pure", "--dims", "2x2", "--trials", "1000", "--tol", "1e-10", "--seed", "1", "-o", "r.json"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("r.json"));
    assert_eq!(v["result"]["failures"], 0);
    assert_eq!(v["result"]["residuals"].as_array().unwrap().len(), 1000);
    assert_eq!(v["config"]["generator"]["dims"], serde_json::json!([2, 2]));
}

#[test]
fn tessier_on_qutrits_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = ccr(dir.path(), &["verify", "--relation", "ccr-tessier", "--dims", "3x3", "--seed", "1", "-o", "t.json"]);
    assert_eq!(code(&o), 1);
    assert!(!dir.path().join("t.json").exists());
}

#[test]
fn koashi_batch_reports_spreads() {
    let dir = tempfile::tempdir().unwrap();
    let o = ccr(
        dir.path(),
        &["verify", "--relation", "ccr-koashi", "--trials", "50", "--tol", "1e-3", "--seed", "2", "--format", "csv", "-o", "k.csv"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("k.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "trial,residual,optimizer_spread");
    assert_eq!(csv.lines().count(), 51);
    let meta = json(&dir.path().join("k.csv.json"));
    assert_eq!(meta["result"]["measurement"], "projective");
    assert_eq!(meta["seed"], 2);
}

#[test]
fn koashi_sweep_names_measurement_mode() {
    let dir = tempfile::tempdir().unwrap();
    let o = ccr(dir.path(), &["koashi", "--trials", "5", "--seed", "3", "--format", "csv", "-o", "s.csv"]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "trial,E_f_AB,J_AE,P_vn_A,C_re_A,residual,optimizer_spread,measurement,povm_residual"
    );
    assert!(lines.all(|l| l.contains(",projective,")));
}

#[test]
fn quantifiers_of_bell_state() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bell.json"), BELL).unwrap();
    let o = ccr(dir.path(), &["quantifiers", "bell.json", "--seed", "1", "--format", "csv", "-o", "q.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("q.csv")).unwrap();
    for row in ["S_vn,0", "I_{A:B},2", "S_{A|B},-1"] {
        assert!(csv.lines().any(|l| l == row), "missing {row} in\n{csv}");
    }
}

#[test]
fn quantifiers_of_diagonal_qubit() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("q.json"), r#"{"dims":[2],"matrix":[[0.75,0],[0,0],[0,0],[0.25,0]]}"#).unwrap();
    let o = ccr(dir.path(), &["quantifiers", "q.json", "--seed", "1"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let get = |n: &str| {
        v["result"].as_array().unwrap().iter().find(|x| x["name"] == n).unwrap()["value"].as_f64().unwrap()
    };
    assert_eq!(get("C_re"), 0.0);
    assert!((get("P_vn") - 0.188721875541).abs() < 1e-6);
}

#[test]
fn malformed_state_file_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\"dims\": [2],\n \"vector\": [[1, 0] [0, 0]]}").unwrap();
    let o = ccr(dir.path(), &["quantifiers", "bad.json", "--seed", "1", "-o", "out.json"]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");
    assert!(!dir.path().join("out.json").exists());
}

#[test]
fn decohere_plus_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let o = ccr(
        dir.path(),
        &["decohere", "--input", "plus", "--gamma", "1", "--tmax", "5", "--steps", "500", "--seed", "4", "-o", "t.csv"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "time,C_re,P_vn,S_vn,E_f_AE,J_AA,I_AA,ccr_residual");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 500);
    assert!(rows.iter().all(|r| r[7] <= 1e-10));
    let meta = json(&dir.path().join("t.csv.json"));
    assert!(meta["result"]["pointer_time"].as_f64().unwrap() > 0.0);
    assert_eq!(meta["seed"], 4);
}

#[test]
fn decohere_grid_and_zero_input() {
    let dir = tempfile::tempdir().unwrap();
    let o = ccr(dir.path(), &["decohere", "--steps", "2", "--seed", "1", "-o", "x.csv"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid"));
    assert!(!dir.path().join("x.csv").exists());

    let o = ccr(dir.path(), &["decohere", "--input", "zero", "--steps", "50", "--seed", "1", "-o", "z.csv"]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("z.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(5) == Some("0")));
}

#[test]
fn json_and_csv_carry_the_same_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["decohere", "--steps", "30", "--seed", "5"];
    let a = ccr(dir.path(), &[&base[..], &["-o", "t.csv"]].concat());
    let b = ccr(dir.path(), &[&base[..], &["--format", "json", "-o", "t.json"]].concat());
    assert_eq!((code(&a), code(&b)), (0, 0));
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let v = json(&dir.path().join("t.json"));
    let rows = v["result"]["trajectory"]["rows"].as_array().unwrap();
    for (line, row) in csv.lines().skip(1).zip(rows) {
        let cells: Vec<f64> = line.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
        let vals: Vec<f64> = row.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert_eq!(cells, vals);
    }
}

#[test]
fn verification_failure_exits_two_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = ccr(dir.path(), &["verify", "--relation", "ccr-koashi", "--trials", "3", "--tol", "1e-300", "--seed", "1", "-o", "f.json"]);
    assert_eq!(code(&o), 2);
    let v = json(&dir.path().join("f.json"));
    assert_eq!(v["passed"], false);
}
