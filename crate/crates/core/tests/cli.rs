use std::path::Path;
use std::process::{Command, Output};

fn smoothlab(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_smoothlab"));
    cmd.args(args).env_remove("SMOOTHLAB_OUT_DIR");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn smoothlab")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{
  "schema_version": 1,
  "experiment_id": "small",
  "learner": {"kind": "ftl"},
  "adversary": {"kind": "realizable_smooth"},
  "class": {"kind": "partition", "domain_size": 8, "d": 2},
  "horizon": 16,
  "sigma": 0.5,
  "loss": "binary_indicator",
  "seeds": [3, 1, 2]
}"#;

#[test]
fn run_writes_csv_and_transcripts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.json", SMALL);
    let out = dir.path().join("out");
    let o = smoothlab(&["run", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = std::fs::read_to_string(out.join("small.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0]
        .starts_with("experiment_id,learner,adversary,class,T,sigma,K,d,n,c_K,tie_policy,seed,"));
    assert_eq!(lines.len(), 5);
    let seeds: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(11).unwrap())
        .collect();
    assert_eq!(&seeds[..3], &["1", "2", "3"]);
    assert!(seeds[3].starts_with("aggregate"));
    let transcripts = std::fs::read_to_string(out.join("small.transcripts.jsonl")).unwrap();
    assert_eq!(transcripts.lines().count(), 3);
}

#[test]
fn out_dir_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.json", SMALL);
    let out = dir.path().join("env_out");
    let o = smoothlab(&["run", &cfg], &[("SMOOTHLAB_OUT_DIR", &out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("small.csv").exists());
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.json", SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    smoothlab(
        &["run", &cfg, "--out", a.to_str().unwrap(), "--jobs", "1"],
        &[],
    );
    smoothlab(
        &["run", &cfg, "--out", b.to_str().unwrap(), "--jobs", "3"],
        &[],
    );
    for f in ["small.csv", "small.transcripts.jsonl"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap()
        );
    }
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let unknown_key = SMALL.replace("\"horizon\": 16", "\"horizon\": 16, \"bogus\": 1");
    let bad_version = SMALL.replace("\"schema_version\": 1", "\"schema_version\": 99");
    let dup_seeds = SMALL.replace("[3, 1, 2]", "[1, 1]");
    for (i, body) in [unknown_key, bad_version, dup_seeds, "{".to_string()]
        .iter()
        .enumerate()
    {
        let cfg = write_config(dir.path(), &format!("bad{i}.json"), body);
        let o = smoothlab(&["run", &cfg, "--out", dir.path().to_str().unwrap()], &[]);
        assert_eq!(
            o.status.code(),
            Some(1),
            "case {i}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let missing = dir.path().join("missing.json");
    assert_eq!(
        smoothlab(&["run", missing.to_str().unwrap()], &[])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        smoothlab(&["verify", "--suite", "nope"], &[]).status.code(),
        Some(1)
    );
    assert_eq!(smoothlab(&["frobnicate"], &[]).status.code(), Some(1));
}

#[test]
fn capacity_abort_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL
        .replace(
            r#"{"kind": "ftl"}"#,
            r#"{"kind": "smoothed_playout", "max_hints_per_round": 10}"#,
        )
        .replace("\"binary_indicator\"", "\"absolute\"");
    let cfg = write_config(dir.path(), "cap.json", &body);
    let o = smoothlab(&["run", &cfg, "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn verify_suite_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = smoothlab(
        &[
            "verify",
            "--suite",
            "budget",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("verify_budget.json")).unwrap();
    let reports: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(reports
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["passed"] == true));
}

#[test]
fn fit_reads_sweep_output() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL
        .replace(r#"{"kind": "ftl"}"#, r#"{"kind": "poisson_ftpl"}"#)
        .replace(
            "\"seeds\"",
            "\"sweep\": {\"horizon\": [16, 32, 64]},\n  \"seeds\"",
        );
    let cfg = write_config(dir.path(), "sweep.json", &body);
    let o = smoothlab(&["sweep", &cfg, "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let f = smoothlab(
        &["fit", dir.path().join("small.csv").to_str().unwrap()],
        &[],
    );
    assert_eq!(
        f.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&f.stderr)
    );
    let line: serde_json::Value =
        serde_json::from_slice(f.stdout.split(|b| *b == b'\n').next().unwrap()).unwrap();
    assert_eq!(line["points"].as_array().unwrap().len(), 3);
    assert!(line["alpha"].as_f64().unwrap().is_finite());
}

#[test]
fn fit_without_enough_horizons_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.json", SMALL);
    smoothlab(&["run", &cfg, "--out", dir.path().to_str().unwrap()], &[]);
    let f = smoothlab(
        &["fit", dir.path().join("small.csv").to_str().unwrap()],
        &[],
    );
    assert_eq!(f.status.code(), Some(1));
}
