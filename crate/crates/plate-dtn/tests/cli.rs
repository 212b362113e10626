//! End-to-end runs of the `plate-dtn` binary on a small through-hole model.

use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
schema = "plate-dtn/1"

[material]
thickness = 2.0
young = 2.0e11
poisson = 0.3
density = 7800.0

[frequency]
values = [480.0, 500.0, 520.0]

[cavity]
shape = "through"
radius = 1.0

[mesh]
n_radial = 4
n_circumferential = 32
n_thickness = 2
radial_aspect = 2.0

[boundary]
radius = 4.0

[truncation]
harmonics = 4
thickness_order = 0
"#;

fn solve(dir: &Path, config: &str, args: &[&str], envs: &[(&str, &str)]) -> Output {
    let path = dir.join("run.toml");
    std::fs::write(&path, config).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_plate-dtn"));
    cmd.arg("solve").arg(&path).args(args).env_remove("PLATE_DTN_WORKERS").env("RUST_LOG", "warn");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn data_rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).skip(1).map(String::from).collect()
}

#[test]
fn three_frequency_sweep_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = solve(dir.path(), CONFIG, &["--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    // one Lamb and one SH column at this frequency
    let energy = data_rows(&out.join("energy.csv"));
    assert_eq!(energy.len(), 3 * 2);
    for family in ["lamb", "sh"] {
        assert_eq!(energy.iter().filter(|r| r.split(',').nth(1) == Some(family)).count(), 3);
    }
    let coeffs = data_rows(&out.join("coefficients.csv"));
    assert_eq!(coeffs.len(), 3 * (2 * 4 + 1) * 2);
    let header = std::fs::read_to_string(out.join("coefficients.csv")).unwrap();
    assert!(header.starts_with('#') && header.contains("unnormalised"));
    for i in 0..3 {
        assert!(out.join(format!("fields_{i:03}.vtk")).exists());
    }
    let log = std::fs::read_to_string(out.join("run.log")).unwrap();
    assert_eq!(log.matches("timings:").count(), 3);
    assert!(log.contains("capacitance condition") && log.contains("mode-fit condition"));
}

#[test]
fn csv_bytes_do_not_depend_on_run_or_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let runs = [("a", "1"), ("b", "1"), ("c", "3")];
    for (name, workers) in runs {
        let out = dir.path().join(name);
        let o = solve(dir.path(), CONFIG, &["--out", out.to_str().unwrap(), "--workers", workers], &[]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["coefficients.csv", "energy.csv", "fields_001.vtk"] {
        let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
        for other in ["b", "c"] {
            assert!(a == std::fs::read(dir.path().join(other).join(file)).unwrap(), "{file} differs in run {other}");
        }
    }
}

#[test]
fn check_mode_validates_without_solving() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = solve(dir.path(), CONFIG, &["--check", "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.matches(" Hz: ").count(), 3);
    assert!(text.contains("configuration OK"));
    assert!(!out.exists());
}

#[test]
fn invalid_configuration_exits_with_code_two_listing_all_problems() {
    let dir = tempfile::tempdir().unwrap();
    let bad = CONFIG.replace("density = 7800.0", "density = 0.0").replace("harmonics = 4", "harmonics = 7").replace("n_thickness = 2", "n_thickness = 5");
    let o = solve(dir.path(), &bad, &[], &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    for key in ["density", "harmonics", "n_thickness"] {
        assert!(err.contains(key), "{key} missing from: {err}");
    }
    let o = solve(dir.path(), "schema = 3", &[], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn worker_environment_variable_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let o = solve(dir.path(), CONFIG, &["--check"], &[("PLATE_DTN_WORKERS", "lots")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("PLATE_DTN_WORKERS"));
}
