use std::path::Path;
use std::process::{Command, Output};

fn gaussbv(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaussbv"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

#[test]
fn list_shows_the_registry() {
    let o = Command::new(env!("CARGO_BIN_EXE_gaussbv")).arg("list").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["tv-equivalence", "coarea", "isoperimetric", "hino-uchida", "relaxed-perimeter"] {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
    assert!(text.lines().filter(|l| !l.trim().is_empty()).count() >= 10);
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"experiment": "coarea", "levle": 5}"#).unwrap();
    let o = gaussbv(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn parameter_outside_range_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = gaussbv(&["run", "--experiment", "coarea", "--level", "12"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = gaussbv(&["run", "--experiment", "no-such-thing"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tv_equivalence_in_one_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tv.json");
    std::fs::write(&cfg, r#"{"experiment": "tv-equivalence", "dim": 1}"#).unwrap();
    let o = gaussbv(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("tv-equivalence.json")).unwrap()).unwrap();
    assert_eq!(report["experiment"], "tv-equivalence");
    assert!(report["pass_flags"].as_object().unwrap().values().all(|v| v == true));
    assert!(report["wall_time"].as_f64().unwrap() >= 0.0);
    assert!(dir.path().join("tv_equivalence.csv").exists());
}

#[test]
fn rof_minimizer_is_half_x() {
    let dir = tempfile::tempdir().unwrap();
    let o = gaussbv(&["run", "--experiment", "rof-quadratic"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("rof_minimizer.csv")).unwrap();
    let rows: Vec<(f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let (x, u) = l.split_once(',').unwrap();
            (x.parse().unwrap(), u.parse().unwrap())
        })
        .collect();
    assert!(rows.len() > 100);
    // Gaussian-weighted L2 distance to x/2, relative to |x/2|
    let (mut err, mut norm) = (0.0, 0.0);
    for &(x, u) in &rows {
        let w = (-0.5 * x * x).exp();
        err += w * (u - 0.5 * x).powi(2);
        norm += w * (0.5 * x).powi(2);
    }
    let rel = (err / norm).sqrt();
    assert!(rel < 0.01, "{rel}");
}

#[test]
fn seed_override_changes_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = gaussbv(&["run", "--experiment", "coarea", "--seed", "3"], dir.path());
    assert!(o.status.code() == Some(0) || o.status.code() == Some(1));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("coarea.json")).unwrap()).unwrap();
    assert_eq!(report["inputs"]["seed"], 3);
}
