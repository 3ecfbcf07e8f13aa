use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use equiheat_cli::ExperimentReport;
use serde_json::Value;

fn run(kind: &str, config: &str, dir: &Path, env: &[(&str, &str)]) -> Output {
    let cfg = dir.join("config.toml");
    fs::write(&cfg, config).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_equiheat"));
    cmd.arg(kind)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"));
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn report(dir: &Path, kind: &str) -> Value {
    let text = fs::read_to_string(dir.join("out").join(format!("{kind}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn without_timestamp(dir: &Path, kind: &str) -> String {
    let mut v = report(dir, kind);
    v.as_object_mut().unwrap().remove("timestamp");
    serde_json::to_string(&v).unwrap()
}

#[test]
fn selberg_z2_passes() {
    let d = tempfile::tempdir().unwrap();
    let out = run("selberg", "lattice = \"z2\"\ngrid = [0.5]\n", d.path(), &[]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = report(d.path(), "selberg");
    let r = &v["outputs"][0];
    assert!((r["spectral"].as_f64().unwrap() - 5.68077).abs() < 1e-5);
    assert!(r["residual"].as_f64().unwrap() < 1e-8);
    assert!(r["normalization"]
        .as_str()
        .unwrap()
        .contains("normalized Haar"));
    let csv = fs::read_to_string(d.path().join("out/selberg.csv")).unwrap();
    assert!(csv.starts_with("t,spectral,geometric,residual\n"));
}

#[test]
fn trace_on_sphere_has_half_exponent() {
    let d = tempfile::tempdir().unwrap();
    let out = run(
        "trace",
        "model = \"s2\"\nsigma = 0\nbudget = 4096\n",
        d.path(),
        &[],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = report(d.path(), "trace");
    assert!((v["outputs"]["fit"]["exponent"].as_f64().unwrap() - 0.5).abs() < 0.02);
    let csv = fs::read_to_string(d.path().join("out/trace.csv")).unwrap();
    assert!(csv.starts_with("t,value,bound\n"));
    assert_eq!(csv.lines().count(), 14);
}

#[test]
fn oscillatory_csv_columns() {
    let d = tempfile::tempdir().unwrap();
    let out = run(
        "oscillatory",
        "model = \"t1\"\namplitude = \"random\"\nmu_grid = [0.1, 0.01, 0.001]\n",
        d.path(),
        &[],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(d.path().join("out/oscillatory.csv")).unwrap();
    assert!(csv.starts_with("mu,re,im,ratio,err\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn validation_errors_exit_two_and_name_the_key() {
    let d = tempfile::tempdir().unwrap();
    let out = run("trace", "model = \"s2\"\ngrid = []\n", d.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`grid`"));

    let out = run("trace", "model = \"s3\"\n", d.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`model`"));

    let out = run("selberg", "latice = \"z2\"\n", d.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("latice"));

    let out = run(
        "selberg",
        "lattice = \"z2\"\n",
        d.path(),
        &[("EQUIHEAT_THREADS", "zero")],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tolerance_failure_exits_one() {
    let d = tempfile::tempdir().unwrap();
    let out = run(
        "selberg",
        "lattice = \"z3\"\ngrid = [0.3]\ntolerance = 1e-300\n",
        d.path(),
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    assert_eq!(report(d.path(), "selberg")["passed"], Value::Bool(false));
}

#[test]
fn numeric_error_exits_three() {
    let d = tempfile::tempdir().unwrap();
    // A time far beyond the series budget.
    let out = run("selberg", "grid = [1e-9]\n", d.path(), &[]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn reports_are_reproducible_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = "charge = 2\ngrid = [0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125]\n";
    let oa = run("bundle-heat", cfg, a.path(), &[("EQUIHEAT_THREADS", "1")]);
    let ob = run("bundle-heat", cfg, b.path(), &[("EQUIHEAT_THREADS", "3")]);
    assert_eq!(oa.status.code(), ob.status.code());
    assert_eq!(
        without_timestamp(a.path(), "bundle-heat"),
        without_timestamp(b.path(), "bundle-heat")
    );
    let ca = fs::read(a.path().join("out/bundle-heat.csv")).unwrap();
    let cb = fs::read(b.path().join("out/bundle-heat.csv")).unwrap();
    assert_eq!(ca, cb);
}

#[test]
fn seed_flag_overrides_config() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("config.toml");
    fs::write(
        &cfg,
        "model = \"s2\"\nmethod = \"monte-carlo\"\nbudget = 2000\nseed = 3\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_equiheat"))
        .args(["gaussian-volume", "--seed", "9", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(d.path().join("out"))
        .output()
        .unwrap();
    assert!(matches!(out.status.code(), Some(0) | Some(1)));
    assert_eq!(report(d.path(), "gaussian-volume")["inputs"]["seed"], 9);
}

#[test]
fn json_round_trip_is_exact() {
    let d = tempfile::tempdir().unwrap();
    run(
        "selberg",
        "lattice = \"z4\"\ngrid = [0.3, 1.0]\n",
        d.path(),
        &[],
    );
    let text = fs::read_to_string(d.path().join("out/selberg.json")).unwrap();
    let parsed: ExperimentReport = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&parsed).unwrap(), text);
}
