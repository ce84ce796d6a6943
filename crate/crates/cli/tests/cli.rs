use std::path::Path;
use std::process::{Command, Output};

fn tnlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tnlab")).args(args).current_dir(dir).output().expect("runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

/// CSV body without the `#` header lines.
fn rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn columns(o: &Output) -> Vec<String> {
    stdout(o).lines().find(|l| !l.starts_with('#')).expect("header").split(',').map(str::to_string).collect()
}

fn without_wall_time(s: &str) -> String {
    s.lines().filter(|l| !l.contains("wall_time_s")).collect::<Vec<_>>().join("\n")
}

#[test]
fn wielandt_scan_dim3_reaches_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    let o = tnlab(&["wielandt-scan", "--dim", "3"], dir.path());
    assert!(o.status.success());
    let cols = columns(&o);
    let idx = cols.iter().position(|c| c == "index").unwrap();
    let max = rows(&o).iter().filter_map(|r| r[idx].parse::<usize>().ok()).max();
    assert_eq!(max, Some(5));
    // every column needs a nonzero entry: 7^3 patterns
    assert_eq!(rows(&o).len(), 343);
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["primitivity", "--random", "4", "--d", "2", "--bond", "3", "--seed", "9"];
    let a = tnlab(&args, dir.path());
    let b = tnlab(&args, dir.path());
    let c = tnlab(&[&args[..], &["--threads", "1"]].concat(), dir.path());
    assert!(a.status.success());
    assert_eq!(without_wall_time(&stdout(&a)), without_wall_time(&stdout(&b)));
    // thread count is recorded nowhere in the body; rows must match
    assert_eq!(rows(&a), rows(&c));
}

#[test]
fn help_lists_every_column() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &[&str]); 5] = [
        (&["wielandt-scan", "--dim", "2"], &["wielandt-scan"]),
        (&["primitivity", "--random", "1"], &["primitivity"]),
        (&["injectivity", "--random", "1"], &["injectivity"]),
        (&["parent-gap", "--model", "aklt", "--sizes", "4"], &["parent-gap"]),
        (&["dl-check", "--model", "ising", "--L", "4", "--ell", "1"], &["dl-check"]),
    ];
    for (run, sub) in cases {
        let o = tnlab(run, dir.path());
        assert!(o.status.success(), "{run:?}");
        let help = stdout(&tnlab(&[sub[0], "--help"], dir.path()));
        for c in columns(&o) {
            assert!(help.contains(&format!("  {c} ")), "{} help misses column {c}", sub[0]);
        }
    }
}

#[test]
fn malformed_tensor_exits_2_with_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"format":"TNT","version":1,"dims":[2,2],"labels":["a","b"],"re":[1,0,0],"im":[0,0,0,0]}"#).unwrap();
    let o = tnlab(&["injectivity", "--mps", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.json") && err.contains("field `re`"), "{err}");
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(tnlab(&["parent-gap", "--model", "aklt", "--sizes", "9..4"], dir.path()).status.code(), Some(1));
    assert_eq!(tnlab(&["wielandt-scan"], dir.path()).status.code(), Some(1));
    assert_eq!(tnlab(&["--version"], dir.path()).status.code(), Some(0));
}

#[test]
fn aklt_parent_gap_series() {
    let dir = tempfile::tempdir().unwrap();
    let o = tnlab(&["parent-gap", "--model", "aklt", "--sizes", "4..8"], dir.path());
    assert!(o.status.success());
    let cols = columns(&o);
    let at = |n: &str| cols.iter().position(|c| c == n).unwrap();
    let rs = rows(&o);
    assert_eq!(rs.len(), 5);
    for r in &rs {
        assert_eq!(r[at("degeneracy")], "1");
        assert_eq!(r[at("status")], "ok");
        assert!(r[at("gap")].parse::<f64>().unwrap() > 0.1);
        assert!(r[at("E0")].parse::<f64>().unwrap().abs() < 1e-10);
    }
}

#[test]
fn model_files_feed_other_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(tnlab(&["model", "cluster-blocked", "--out", "a.json"], p).status.success());
    assert!(tnlab(&["model", "cluster-reps", "--out", "g.json"], p).status.success());
    let o = tnlab(&["spt-classify", "--mps", "a.json", "--reps", "g.json", "--format", "json"], p);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["body"]["trivial"], false);
    assert_eq!(v["body"]["status"], "ok");
    let beta = &v["body"]["beta"][0]["value"];
    assert!((beta["re"].as_f64().unwrap() + 1.0).abs() < 1e-8);

    assert!(tnlab(&["model", "random-state", "--d", "2", "--n", "5", "--out", "s.json"], p).status.success());
    let o = tnlab(&["mps", "from-state", "--state", "s.json", "--save", "m.json"], p);
    assert!(o.status.success());
    let o = tnlab(&["mps", "entropy", "--mps", "m.json", "--format", "json"], p);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for r in v["body"]["rows"].as_array().unwrap() {
        assert!(r["entropy"].as_f64().unwrap() <= r["bound"].as_f64().unwrap() + 1e-12);
    }
}

#[test]
fn boundary_fit_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(tnlab(&["model", "random-peps", "--d", "4", "--bond", "2", "--out", "a.json"], p).status.success());
    let o = tnlab(&["boundary-fit", "--peps", "a.json", "--L", "3", "--region", "1", "--format", "json"], p);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["body"]["status"], "indeterminate");
    assert_eq!(v["body"]["two_body_norms"].as_array().unwrap().len(), 6);
    assert_eq!(tnlab(&["boundary-fit", "--peps", "a.json"], p).status.code(), Some(1));
}
