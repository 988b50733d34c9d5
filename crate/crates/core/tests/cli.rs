use std::path::Path;
use std::process::{Command, Output};

fn circlaw(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_circlaw"));
    cmd.args(args).env_remove("CIRCLAW_MAX_N");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn config_json(out: &Path, dims: &str, perturbation: &str) -> String {
    format!(
        r#"{{
  "name": "cli",
  "dims": {dims},
  "distribution": "complex-gaussian",
  "perturbation": {perturbation},
  "z_grid": {{"re_range": [-1.0, 1.0], "im_range": [-1.0, 1.0], "step": 1.0}},
  "replicates": 3,
  "master_seed": 42,
  "output_dir": {:?}
}}"#,
        out.to_str().unwrap()
    )
}

#[test]
fn verify_lemmas_reports_zero_violations() {
    let o = circlaw(&["verify-lemmas", "--trials", "1000", "--seed", "7"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(
        stdout(&o).contains("total               0 violations"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn missing_config_is_a_validation_error_naming_the_path() {
    let o = circlaw(&["run", "--config", "missing.json"], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.json"), "{}", stderr(&o));
}

#[test]
fn constant_case_prints_the_record() {
    let o = circlaw(
        &[
            "constant-case",
            "--n",
            "400",
            "--dist",
            "complex-gaussian",
            "--seed",
            "1",
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    for key in ["lambda1", "lambda2", "s1_central"] {
        assert!(out.contains(key), "{out}");
    }
}

#[test]
fn run_is_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        &config_json(&out, "[20, 40]", r#"{"kind": "all-ones"}"#),
    );
    let mut snapshots = Vec::new();
    for workers in ["1", "3"] {
        let o = circlaw(&["run", "--config", &cfg, "--workers", workers], &[]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let files: Vec<Vec<u8>> = ["report.json", "delta.csv", "disk.csv", "scaling.csv"]
            .iter()
            .map(|f| std::fs::read(out.join(f)).unwrap())
            .collect();
        snapshots.push(files);
    }
    assert_eq!(snapshots[0], snapshots[1]);
    let delta = String::from_utf8(snapshots[0][1].clone()).unwrap();
    // 2 dims × 3 replicates × 9 grid points
    assert_eq!(delta.lines().count(), 1 + 54);
    assert!(delta.starts_with(
        "n,replicate,z_re,z_im,delta,ks,rank_bound,ibp_bound,s_min_a,s_min_b,s_max_a,s_max_b,singular_flag\n"
    ));
}

#[test]
fn zero_perturbation_gives_zero_delta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        &config_json(&out, "[50]", r#"{"kind": "zero"}"#),
    );
    let o = circlaw(&["run", "--config", &cfg], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let delta = std::fs::read_to_string(out.join("delta.csv")).unwrap();
    for line in delta.lines().skip(1) {
        assert_eq!(line.split(',').nth(4), Some("0"), "{line}");
    }
}

#[test]
fn flag_overrides_apply_to_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &config_json(&dir.path().join("unused"), "[20]", r#"{"kind": "zero"}"#),
    );
    let out = dir.path().join("elsewhere");
    let o = circlaw(
        &[
            "run",
            "--config",
            &cfg,
            "--n",
            "12",
            "--dist",
            "rademacher",
            "--seed",
            "5",
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let disk = std::fs::read_to_string(out.join("disk.csv")).unwrap();
    assert!(disk.lines().skip(1).all(|l| l.starts_with("12,")), "{disk}");
    let report = std::fs::read_to_string(out.join("report.json")).unwrap();
    assert!(report.contains("\"rademacher\"") && report.contains("\"master_seed\": 5"));
}

#[test]
fn invalid_configs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    let cfg = write_config(
        dir.path(),
        &config_json(&out, "[200, 100]", r#"{"kind": "zero"}"#),
    );
    let o = circlaw(&["run", "--config", &cfg], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("strictly increasing"), "{}", stderr(&o));

    let cfg = write_config(
        dir.path(),
        &config_json(&out, "[10]", r#"{"kind": "all-ones", "rankk": 1}"#),
    );
    let o = circlaw(&["run", "--config", &cfg], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("rankk"), "{}", stderr(&o));

    let o = circlaw(&["sample", "--n", "4", "--dist", "cauchy"], &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dimension_cap_comes_from_the_environment() {
    let o = circlaw(&["spectrum", "--n", "50"], &[("CIRCLAW_MAX_N", "40")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("CIRCLAW_MAX_N"), "{}", stderr(&o));
    let o = circlaw(&["spectrum", "--n", "50"], &[("CIRCLAW_MAX_N", "60")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &config_json(&dir.path().join("out"), "[30]", r#"{"kind": "zero"}"#),
    );
    let o = circlaw(&["run", "--config", &cfg], &[("CIRCLAW_MAX_N", "20")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("out").join("report.json").exists());
}

#[test]
fn unwritable_output_fails_before_computing() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "not a directory").unwrap();
    let cfg = write_config(
        dir.path(),
        &config_json(&blocker.join("out"), "[10]", r#"{"kind": "zero"}"#),
    );
    let o = circlaw(&["run", "--config", &cfg], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("I/O error"), "{}", stderr(&o));
}

#[test]
fn single_matrix_subcommands_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let runs: [(&[&str], &str); 4] = [
        (&["sample", "--n", "5", "--out", out], "sample.csv"),
        (
            &[
                "spectrum",
                "--n",
                "20",
                "--perturbation",
                "all-ones:2",
                "--out",
                out,
            ],
            "eigenvalues.csv",
        ),
        (
            &["delta-scan", "--n", "20", "--step", "1.25", "--out", out],
            "delta.csv",
        ),
        (
            &[
                "circular-law",
                "--n",
                "30",
                "--dist",
                "complex-rademacher",
                "--out",
                out,
            ],
            "disk.csv",
        ),
    ];
    for (args, file) in runs {
        let o = circlaw(args, &[]);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        assert!(dir.path().join(file).exists(), "{file}");
    }
    let sample = std::fs::read_to_string(dir.path().join("sample.csv")).unwrap();
    assert_eq!(sample.lines().filter(|l| !l.starts_with('j')).count(), 25);
    let delta = std::fs::read_to_string(dir.path().join("delta.csv")).unwrap();
    assert_eq!(delta.lines().count(), 1 + 25);
}
