use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rankabstain"))
}

fn run(args: &[&str], extra: &[&Path]) -> Output {
    bin().args(args).args(extra).output().unwrap()
}

fn synth_to(path: &Path, seed: &str) {
    let out = run(&["synth", "--generator", "pl-linear", "--n", "60", "--m", "4", "--seed", seed, "--out"], &[path]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn synth_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("c.csv"));
    synth_to(&a, "1");
    synth_to(&b, "1");
    synth_to(&c, "2");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
    let text = fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("f:x1,f:x2,ranking\n"), "{text}");
}

#[test]
fn ingest_reports_bad_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "f:x,ranking\n1.0,a>b>c\n2.0,a>b>b\n").unwrap();
    let out = run(&["ingest", "--validate"], &[&path]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");

    fs::write(&path, "f:x,ranking\n1.0,a>b>c\n2.5,c>a>b\n").unwrap();
    let out = run(&["ingest", "--validate"], &[&path]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("2 rows, 1 features, 3 labels"));
}

#[test]
fn ingest_rewrites_canonically() {
    let dir = tempfile::tempdir().unwrap();
    let (src, dst) = (dir.path().join("in.csv"), dir.path().join("out.csv"));
    synth_to(&src, "4");
    assert!(run(&["ingest", "--out"], &[&dst, &src]).status.success());
    assert_eq!(fs::read(&src).unwrap(), fs::read(&dst).unwrap());
}

#[test]
fn sweep_rejects_threshold_of_one() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    synth_to(&data, "5");
    let out = run(&["sweep", "--seed", "0", "--q-grid", "0.5:1.0:0.25", "--data"], &[&data]);
    assert!(!out.status.success());
}

#[test]
fn compare_writes_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    synth_to(&data, "6");
    let out = run(&["compare", "--seed", "0", "--folds", "3", "--q-grid", "0.5:0.9:0.2", "--data"], &[&data]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("method,fold,q,completeness,correctness,n_evaluated"));
    let rows: Vec<&str> = lines.collect();
    // Two methods, three folds plus the mean, three thresholds.
    assert_eq!(rows.len(), 2 * 4 * 3);
    assert!(rows.iter().any(|r| r.starts_with("probabilistic-pl,-1,0.5,")));
    assert!(rows.iter().any(|r| r.starts_with("baseline-ensemble,2,0.9,")));

    let out = run(&["compare", "--seed", "0", "--method", "baseline", "--data"], &[&data]);
    assert!(!out.status.success());
}

#[test]
fn sweep_json_and_train_test() {
    let dir = tempfile::tempdir().unwrap();
    let (train, test) = (dir.path().join("train.csv"), dir.path().join("test.csv"));
    synth_to(&train, "7");
    synth_to(&test, "8");
    let out = bin()
        .args(["sweep", "--seed", "0", "--method", "mallows", "--format", "json", "--data"])
        .arg(&train)
        .arg("--test")
        .arg(&test)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[0]["method"], "probabilistic-mallows");
    assert_eq!(rows[0]["fold"], -1);
    // Instances with no asserted pair are left out of the correctness mean.
    let evaluated = rows[0]["n_evaluated"].as_u64().unwrap();
    assert!(evaluated > 0 && evaluated <= 60, "{evaluated}");
}

#[test]
fn predict_prints_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    synth_to(&data, "9");
    let out = run(&["predict", "--method", "pl", "--seed", "0", "--x", "0.1,-0.3", "--q", "0.6", "--data"], &[&data]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("preferred,over\n"));
    assert!(text.contains("# effective_q=0.6\n"));

    let out = run(&["predict", "--method", "pl", "--seed", "0", "--x", "0.1", "--data"], &[&data]);
    assert!(!out.status.success(), "wrong feature count must fail");
}
