use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
seed = 3

[radar]
range_freq_samples = 256
pulse_count = 2560

[geometry]
aperture_length = 320.0

[scene]
rows = 2
cols = 2
dx = 10.0
dy = 8.0
stagger = 2.0

[error]
kind = "quadratic"
coeff = 0.5

[pfa]
nx = 256
ny = 256
"#;

fn kasar(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kasar")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = kasar(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn chain(dir: &Path) {
    fs::write(dir.join("small.toml"), SMALL).unwrap();
    let c = ["--config", "small.toml"];
    let run = |rest: &[&str]| ok(dir, &[&c[..], rest].concat());
    run(&["simulate", "--out", "ph.bin"]);
    run(&["pfa", "--input", "ph.bin", "--spectrum", "sp.bin", "--image", "im.bin", "--pgm", "im.pgm"]);
    run(&["autofocus", "--input", "sp.bin", "--mode", "ka", "--image", "af.bin", "--report", "report.json"]);
    run(&["metrics", "--input", "af.bin", "--spectrum", "sp.bin", "--out", "metrics.json"]);
}

#[test]
fn full_chain_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    chain(dir.path());
    for f in ["ph.bin", "ph.bin.json", "sp.bin", "im.bin", "im.pgm", "af.bin", "report.json", "metrics.json"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(report["residual_rcm_cells"].as_f64().unwrap() < 0.5);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    chain(a.path());
    chain(b.path());
    for f in ["ph.bin", "sp.bin", "im.bin", "im.pgm", "af.bin", "report.json", "metrics.json"] {
        assert!(fs::read(a.path().join(f)).unwrap() == fs::read(b.path().join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn autofocus_rejects_an_image_file() {
    let dir = tempfile::tempdir().unwrap();
    chain(dir.path());
    let out = kasar(dir.path(), &["--config", "small.toml", "autofocus", "--input", "im.bin", "--image", "x.bin"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kind"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(kasar(dir.path(), &["--bogus"]).status.code(), Some(2));
    assert_eq!(kasar(dir.path(), &["autofocus", "--mode", "sideways"]).status.code(), Some(2));
    fs::write(dir.path().join("bad.toml"), "[pfa]\nnx = 0\n").unwrap();
    assert_eq!(kasar(dir.path(), &["--config", "bad.toml", "config"]).status.code(), Some(2));
    fs::write(dir.path().join("typo.toml"), "[pfa.interpolator]\ntapz = 8\n").unwrap();
    assert_eq!(kasar(dir.path(), &["--config", "typo.toml", "config"]).status.code(), Some(2));
    fs::write(dir.path().join("partial.toml"), "[pfa.interpolator]\ntaps = 8\n").unwrap();
    assert!(ok(dir.path(), &["--config", "partial.toml", "config"]).contains("oversample = 16"));
}

#[test]
fn missing_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = kasar(dir.path(), &["pfa", "--input", "nope.bin", "--spectrum", "s.bin", "--image", "i.bin"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn limits_reports_two_d_region() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(dir.path(), &["limits", "--res", "0.1", "--coeff", "0.1"]);
    let line = text.lines().find(|l| l.starts_with("coefficient")).unwrap();
    assert!(line.ends_with("region 2-D") || line.contains("accurate-2-D"), "{line}");
}

#[test]
fn config_round_trips_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.toml"), SMALL).unwrap();
    let first = ok(dir.path(), &["--config", "small.toml", "config"]);
    fs::write(dir.path().join("echo.toml"), &first).unwrap();
    assert_eq!(ok(dir.path(), &["--config", "echo.toml", "config"]), first);
    assert!(ok(dir.path(), &["--config", "small.toml", "--seed", "9", "config"]).contains("seed = 9"));
}
