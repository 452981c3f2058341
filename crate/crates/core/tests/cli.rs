use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cclab(args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cclab"));
    cmd.args(args).env_remove("CCLAB_SEED");
    if let Some(s) = seed_env {
        cmd.env("CCLAB_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn without_clock(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_clock");
    v
}

#[test]
fn dkw_defaults_pass_and_write_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dkw.json");
    let o = cclab(&["dkw", "--out", out.to_str().unwrap()], None);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = read_json(&out);
    assert_eq!(r["experiment"], "dkw");
    assert_eq!(r["pass"], true);
    for key in ["params", "rows", "margins", "version", "wall_clock"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn unknown_experiment_is_rejected() {
    let o = cclab(&["frobnicate"], None);
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown experiment"));
    assert!(o.stdout.is_empty());
}

#[test]
fn config_and_io_errors_have_distinct_codes() {
    let o = cclab(&["dkw", "--n", "10"], None);
    assert_eq!(o.status.code(), Some(3));
    let o = cclab(&["sandwich", "--k", "1,x"], None);
    assert_eq!(o.status.code(), Some(3));
    let o = cclab(&["dkw", "--bogus-flag"], None);
    assert_eq!(o.status.code(), Some(3));
    let o = cclab(&["reordering-oracle", "--n", "9"], None);
    assert_eq!(o.status.code(), Some(3));
    let o = cclab(
        &[
            "reordering-oracle",
            "--samples",
            "100",
            "--out",
            "/nonexistent-dir/x/r.json",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn same_seed_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec![
            "sandwich",
            "--k",
            "1,3",
            "--samples",
            "4000",
            "--threads",
            "1",
        ];
        args.extend_from_slice(extra);
        args.extend_from_slice(&["--out", out.to_str().unwrap()]);
        let o = cclab(&args, None);
        assert_eq!(o.status.code(), Some(0));
        without_clock(read_json(&out))
    };
    let a = run("a.json", &["--seed", "5"]);
    let b = run("b.json", &["--seed", "5"]);
    let c = run("c.json", &["--seed", "6"]);
    assert_eq!(a, b);
    assert_ne!(a["rows"], c["rows"]);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        let out = dir.path().join(format!("t{threads}.json"));
        let o = cclab(
            &[
                "dkw",
                "--n",
                "200",
                "--samples",
                "9000",
                "--threads",
                threads,
                "--out",
                out.to_str().unwrap(),
            ],
            None,
        );
        assert_eq!(o.status.code(), Some(0));
        without_clock(read_json(&out))
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn environment_seed_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str, env: Option<&str>| {
        let out = dir.path().join(name);
        let o = cclab(
            &[
                "reordering-oracle",
                "--samples",
                "200",
                "--seed",
                seed,
                "--out",
                out.to_str().unwrap(),
            ],
            env,
        );
        assert_eq!(o.status.code(), Some(0));
        without_clock(read_json(&out))
    };
    let flag = run("flag.json", "77", None);
    let env = run("env.json", "1", Some("77"));
    assert_eq!(flag, env);
    assert_eq!(env["params"]["seed"], 77);
    let o = cclab(&["dkw", "--samples", "100"], Some("not-a-number"));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn csv_output_flattens_rows() {
    let o = cclab(
        &[
            "sandwich",
            "--k",
            "1,2",
            "--samples",
            "2000",
            "--format",
            "csv",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.contains("lower.stderr"));
    assert!(header.contains("upper"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn help_exits_cleanly() {
    let o = cclab(&["--help"], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("--rho-grid"));
}
