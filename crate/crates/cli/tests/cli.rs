use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn symbill(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symbill"))
        .args(args)
        .args(["--out", out.to_str().unwrap(), "--quiet"])
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const CIRCLE: &str = r#"{"kind":"ellipsoid","semi_axes":[1,1]}"#;

#[test]
fn orbit_passes_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = symbill(&["orbit", "--body", CIRCLE, "--svg"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["report.json", "orbit.csv", "scatter.svg"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let csv = fs::read_to_string(dir.path().join("orbit.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "k,x_1,x_2,H,eucl_norm,m_1,m_2,residual");
    assert_eq!(lines.count(), 101);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    // Defaults are materialized in the echoed config.
    assert_eq!(report["config"]["seed"], 0);
    assert_eq!(report["config"]["experiment"]["steps"], 100);
    assert_eq!(report["config"]["solver"]["residual_tol"], 1e-12);
}

#[test]
fn circle_shadow_error_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = symbill(&["shadow", "--body", CIRCLE], dir.path());
    // E ~ (2/3)/r² on the circle, so the r·E ratio verdict fails by design.
    assert_eq!(code(&o), 1);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let r = &report["report"];
    let table = r["tables"].as_array().unwrap().iter().find(|t| t["name"] == "samples").unwrap();
    let cols: Vec<&str> = table["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    let ri = cols.iter().position(|c| *c == "radius").unwrap();
    let ei = cols.iter().position(|c| *c == "error").unwrap();
    for row in table["rows"].as_array().unwrap() {
        let radius = row[ri].as_f64().unwrap();
        let e = row[ei].as_f64().unwrap();
        let delta = 4.0 * (1.0 / radius).asin() - 4.0 / radius;
        let want = 2.0 * radius * (delta / 2.0).sin();
        assert!((e - want).abs() < 1e-9, "r={radius}: {e} vs {want}");
    }
    let failing: Vec<&str> = r["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|v| v["pass"] == false)
        .map(|v| v["name"].as_str().unwrap())
        .collect();
    assert_eq!(failing, ["rE_bounded"]);
}

#[test]
fn broken_tolerance_fails_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        format!(
            r#"{{"body":{CIRCLE},"experiment":{{"name":"orbit","steps":20}},"solver":{{"residual_tol":1e-1,"max_iter":1}}}}"#
        ),
    )
    .unwrap();
    let o = symbill(&["orbit", "--config", cfg.to_str().unwrap()], dir.path());
    let c = code(&o);
    assert!(c == 1 || c == 2, "exit {c}");
    if c == 2 {
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = symbill(&["orbit"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("body"));

    let o = symbill(&["orbit", "--body", r#"{"kind":"constant_width_2d","eps":0.2}"#], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("validation"));

    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, format!(r#"{{"body":{CIRCLE},"experiment":{{"name":"shadow"}}}}"#)).unwrap();
    let o = symbill(&["orbit", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);

    let o = symbill(&["demo", "--body", CIRCLE], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn interior_start_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        format!(r#"{{"body":{CIRCLE},"experiment":{{"name":"orbit","x0":[0.5,0.0]}}}}"#),
    )
    .unwrap();
    let o = symbill(&["orbit", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert!(!o.stderr.is_empty());
}

#[test]
fn reruns_are_byte_identical() {
    let body = r#"{"kind":"constant_width_2d","eps":0.1}"#;
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["orbit", "--body", body, "--seed", "3", "--svg"],
        vec!["shadow", "--body", body, "--seed", "3"],
    ] {
        let files = ["report.json", "orbit.csv", "scatter.svg"];
        let clear = || {
            for f in files {
                let _ = fs::remove_file(dir.path().join(f));
            }
        };
        let read = || -> Vec<Option<Vec<u8>>> {
            files.iter().map(|f| fs::read(dir.path().join(f)).ok()).collect()
        };
        clear();
        let first = symbill(&args, dir.path());
        let a = read();
        clear();
        let second = symbill(&args, dir.path());
        assert_eq!(code(&first), code(&second));
        assert!(a[0].is_some());
        assert_eq!(a, read(), "{args:?}");
    }
}
