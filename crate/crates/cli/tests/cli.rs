use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const PREGNANCY: &str = "\
prop swollen_belly leaf
prop morning_sickness leaf
prop male leaf
prop pregnant goal
P(pregnant | swollen_belly & morning_sickness) = 0.4
P(pregnant | male) = 0
";

fn uisbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uisbench"))
        .args(args)
        .env_remove("UISBENCH_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn maxent_writes_a_normalized_joint() {
    let dir = TempDir::new().unwrap();
    let rules = write(dir.path(), "r.rules", PREGNANCY);
    let o = uisbench(&["maxent", &rules]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = stdout(&o);
    let weights: Vec<f64> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(weights.len(), 16);
    assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn infeasible_rules_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let rules = write(dir.path(), "bad.rules", "prop A; prop B\nP(A) = 0.3\nP(A & B) = 0.5\n");
    let o = uisbench(&["maxent", &rules]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible"));
}

#[test]
fn evidence_on_a_derived_node_exits_with_one() {
    let dir = TempDir::new().unwrap();
    let rules = write(dir.path(), "r.rules", PREGNANCY);
    let ev = write(dir.path(), "e.ev", "pregnant = 1\n");
    let o = uisbench(&["compare", &rules, &ev]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn compare_single_engine_writes_pooled_csv() {
    let dir = TempDir::new().unwrap();
    let rules = write(dir.path(), "r.rules", PREGNANCY);
    let ev = write(dir.path(), "e.ev", "swollen_belly = 1\nmorning_sickness = 1\nmale = 1\n");
    let out = dir.path().join("pooled.csv");
    let o = uisbench(&["compare", &rules, &ev, "--engines", "ind", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out).unwrap();
    assert!(csv.starts_with("engine,class,metric,value\n"));
    assert!(csv.lines().skip(1).all(|l| l.starts_with("IND,")));
}

#[test]
fn sweep_preset_is_csv() {
    let o = uisbench(&["sweep", "--figure", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert!(csv.starts_with("x,engine,value\n"));
    assert_eq!(csv.lines().count(), 1 + 101 * 3);
    assert!(csv.contains("\n0.4,IND,0.64"));
}

#[test]
fn pathology_goes_to_out_dir() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_uisbench"))
        .args(["dst-pathology", "--betas", "0.1,1e-9", "--include-zero"])
        .env("UISBENCH_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let written: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(written.len(), 1);
    let csv = fs::read_to_string(&written[0]).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "beta,bel_t1,bel_t2");
    assert_eq!(rows[1], "1e-1,0,0");
    assert_eq!(rows[2], "1e-9,0,0");
    assert_eq!(rows[3], "0e0,0.8,0");
}
