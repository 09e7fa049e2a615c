use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn spinbath(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinbath"))
        .args(args)
        .output()
        .expect("binary runs")
}

const SMALL: &str = r#"{
  "n_modes": 20,
  "beta": [1.0, 0.3],
  "t_max": 2.0,
  "output_points": 20,
  "n_samples": 24,
  "block_size": 5,
  "initial_state": "psi-minus"
}"#;

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.json");
    fs::write(&path, SMALL).unwrap();
    path.to_string_lossy().into_owned()
}

fn run_ok(mode: &str, config: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        mode,
        "--config",
        config,
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let o = spinbath(&args);
    assert!(
        o.status.success(),
        "{mode}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

#[test]
fn compare_writes_all_files_with_headers() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path());
    let out = tmp.path().join("out");
    let o = run_ok("compare", &cfg, &out, &[]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("RMS"), "{stdout}");
    for name in ["numeric.csv", "analytic.csv", "trace.csv", "plot.py"] {
        let text = fs::read_to_string(out.join(name)).unwrap();
        assert!(text.starts_with("# spinbath "), "{name}");
        assert!(text.contains("# seed: 1\n"), "{name}");
        assert!(text.contains("\"n_samples\":24"), "{name}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["header"]["seed"], 1);
    assert!(report["rms_delta_rho22"].as_f64().is_some());
    assert!(report["trace"]["within_bounds"].as_bool().unwrap());

    let numeric = fs::read_to_string(out.join("numeric.csv")).unwrap();
    let header = numeric.lines().find(|l| !l.starts_with('#')).unwrap();
    let cols: Vec<&str> = header.split(',').collect();
    assert_eq!(cols.len(), 65);
    assert_eq!(
        (cols[0], cols[1], cols[2], cols[33]),
        ("t", "re_rho11", "im_rho11", "se_re_rho11")
    );
    assert_eq!(
        numeric.lines().filter(|l| !l.starts_with('#')).count(),
        1 + 21
    );
}

#[test]
fn same_seed_is_bit_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path());
    let (a, b, c) = (
        tmp.path().join("a"),
        tmp.path().join("b"),
        tmp.path().join("c"),
    );
    run_ok("simulate", &cfg, &a, &["--seed", "9"]);
    run_ok("simulate", &cfg, &b, &["--seed", "9"]);
    run_ok("simulate", &cfg, &c, &["--seed", "10"]);
    for name in ["numeric.csv", "trace.csv"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap()
        );
    }
    assert_ne!(
        fs::read(a.join("numeric.csv")).unwrap(),
        fs::read(c.join("numeric.csv")).unwrap()
    );
}

#[test]
fn samples_flag_overrides_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path());
    let out = tmp.path().join("o");
    let o = run_ok("simulate", &cfg, &out, &["--samples", "3"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("samples: 3 used"));
}

#[test]
fn other_modes_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path());
    run_ok("analytic", &cfg, &tmp.path().join("an"), &[]);
    assert!(tmp.path().join("an/analytic.csv").exists());
    let o = run_ok("oracle-check", &cfg, &tmp.path().join("or"), &[]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("closed form"));
    assert_eq!(
        fs::read_to_string(tmp.path().join("or/oracle.csv"))
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .count(),
        401
    );
    let o = run_ok(
        "sampler-check",
        &cfg,
        &tmp.path().join("sa"),
        &["--samples", "500"],
    );
    assert!(String::from_utf8_lossy(&o.stdout).contains("Var(R)"));
    assert!(tmp.path().join("sa/sampler.csv").exists());
}

#[test]
fn presets_are_selectable_by_name() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("u");
    let o = run_ok("analytic", "fig2", &out, &[]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("Ω = 5.839"));
}

#[test]
fn validation_errors_exit_with_one() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.json");
    for (text, needle) in [
        ("{\"n_samples\": 0}", "n_samples"),
        ("{\"n_sampels\": 10}", "n_sampels"),
        ("{\"xi\": 0.007,\n \"beta\": [1.0, }", "line 2"),
    ] {
        fs::write(&bad, text).unwrap();
        let o = spinbath(&[
            "run",
            "simulate",
            "--config",
            bad.to_str().unwrap(),
            "--out",
            tmp.path().join("x").to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(1), "{text}");
        assert!(
            String::from_utf8_lossy(&o.stderr).contains(needle),
            "{text}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!tmp.path().join("x").exists());
    }
    let o = spinbath(&["run", "simulate", "--config", "/no/such/file.json"]);
    assert_eq!(o.status.code(), Some(1));
    let o = spinbath(&["run", "teleport", "--config", "fig2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = spinbath(&["run", "simulate", "--config", "fig2", "--samples", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn runtime_failure_exits_with_two_and_cleans_up() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path());
    let out = tmp.path().join("out");
    fs::create_dir_all(out.join("plot.py")).unwrap();
    let o = spinbath(&[
        "run",
        "simulate",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(!out.join("numeric.csv").exists());
    assert!(!out.join("trace.csv").exists());

    let file = tmp.path().join("not_a_dir");
    fs::write(&file, "x").unwrap();
    let o = spinbath(&[
        "run",
        "analytic",
        "--config",
        &cfg,
        "--out",
        file.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}
