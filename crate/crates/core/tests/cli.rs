use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_twistband"));
    c.env_remove("TWISTBAND_JOBS");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn twistband")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn missing_eps_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["bands"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eps"));
}

#[test]
fn bad_flag_and_zero_jobs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["bands", "--no-such-flag"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = bin()
        .env("TWISTBAND_JOBS", "0")
        .args(["bands", "--eps", "0.5", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn untwisted_bands_start_at_pi_squared() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["bands", "--gamma", "0", "--eps", "0.5"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("threshold.json").exists());

    let rows = csv_rows(&dir.path().join("bands.csv"));
    let at_zero = rows
        .iter()
        .find(|r| r[0].parse::<f64>().unwrap() == 0.0)
        .expect("p = 0 row");
    let l1: f64 = at_zero[1].parse().unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((l1 - pi2).abs() < 1e-4, "{l1}");

    let t: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("threshold.json")).unwrap())
            .unwrap();
    assert!((t["lambda1_0"].as_f64().unwrap() - pi2).abs() < 1e-4);
}

#[test]
fn runs_are_reproducible_and_manifested() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["spectrum2d", "--eps", "0.1", "--seed", "7"];
    for d in [a.path(), b.path()] {
        let o = run(&args, d);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ca = fs::read(a.path().join("spectrum.csv")).unwrap();
    let cb = fs::read(b.path().join("spectrum.csv")).unwrap();
    assert_eq!(ca, cb);

    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(m["command"], "spectrum2d");
    let outputs = m["outputs"].as_array().unwrap();
    assert!(!outputs.is_empty());
    for entry in outputs {
        let digest = entry["sha256"].as_str().unwrap();
        assert_eq!(digest.len(), 64);
        assert!(a.path().join(entry["path"].as_str().unwrap()).exists());
    }
}

#[test]
fn config_file_sets_parameters_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let ini = dir.path().join("run.ini");
    fs::write(&ini, "eps = 0.5\n[bands]\ngamma = 0\nn-bands = 2\n").unwrap();

    let out = dir.path().join("from_file");
    let o = bin()
        .args(["bands", "--config"])
        .arg(&ini)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let header = fs::read_to_string(out.join("bands.csv")).unwrap();
    assert!(header.starts_with("p,lambda1,lambda2\n"));

    let out = dir.path().join("flag");
    let o = bin()
        .args(["bands", "--n-bands", "3", "--config"])
        .arg(&ini)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success());
    let header = fs::read_to_string(out.join("bands.csv")).unwrap();
    assert!(header.starts_with("p,lambda1,lambda2,lambda3\n"));
}

#[test]
fn thin_counts_grow_and_conditions_are_tabulated() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["thin", "--eps", "0.2,0.1,0.05", "--check-conditions"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let counts: Vec<usize> = csv_rows(&dir.path().join("counts.csv"))
        .iter()
        .map(|r| r[4].parse().unwrap())
        .collect();
    assert_eq!(counts.len(), 3);
    assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
    assert!(counts[0] >= 1);

    let conds = csv_rows(&dir.path().join("conditions.csv"));
    assert!(!conds.is_empty());
    assert!(conds.iter().all(|r| r[2] == "true"));
    for name in ["I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX"] {
        assert!(conds.iter().any(|r| r[1] == name), "missing {name}");
    }
}

#[test]
fn thin_ground_state_approaches_harmonic_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["thin", "--eps", "0.01", "--k", "1"], dir.path());
    assert!(o.status.success());
    let rows = csv_rows(&dir.path().join("effective.csv"));
    let l1: f64 = rows[0][2].parse().unwrap();
    assert!((l1 - 2f64.sqrt()).abs() < 1e-5, "{l1}");
}

#[test]
fn constant_family_is_reported_as_inadmissible() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["validate-family", "--family", "constant"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let conds = csv_rows(&dir.path().join("conditions.csv"));
    for name in ["I", "II", "III"] {
        assert!(
            conds.iter().any(|r| r[1] == name && r[2] == "false"),
            "{name} should fail"
        );
    }
}

#[test]
fn surface_is_immersed() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["export-surface"], dir.path());
    assert!(o.status.success());
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert!(m["fitted"]["min_det_j"].as_f64().unwrap() > 0.0);
    assert!(fs::read_to_string(dir.path().join("surface.mesh"))
        .unwrap()
        .len()
        > 100);
}

#[test]
fn zero_preset_has_no_negative_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["certify", "--preset", "zero"], dir.path());
    assert!(o.status.success());
    let rows = csv_rows(&dir.path().join("certificates.csv"));
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[3].parse::<f64>().unwrap() >= 0.0));
}

#[test]
fn frame_reports_endpoint_gap() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["frame", "--curvatures", "1"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("frame.csv").exists());
}
