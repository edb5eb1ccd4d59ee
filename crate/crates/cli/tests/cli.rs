use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn h2conv(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_h2conv"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str], dir: &Path) -> Value {
    let out = h2conv(args, dir);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited")
}

#[test]
fn vacuum_index_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(
        &[
            "dispersion",
            "--wavelength-nm",
            "434",
            "--pressure-bar",
            "0",
        ],
        dir.path(),
    );
    assert_eq!(v["refractive_index"], 1.0);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert!(v["config"]["gas"].is_object());
}

#[test]
fn sweep_reports_interior_optimum_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sweep-pressure", "--out", "curve.csv"];
    let first = h2conv(&args, dir.path());
    assert!(first.status.success());
    let csv1 = std::fs::read(dir.path().join("curve.csv")).unwrap();
    let second = h2conv(&args, dir.path());
    let csv2 = std::fs::read(dir.path().join("curve.csv")).unwrap();
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(csv1, csv2);
    assert!(csv1.starts_with(b"pressure_bar,eta\n"));
    assert!(dir.path().join("curve.gp").exists());

    let v: Value = serde_json::from_slice(&first.stdout).unwrap();
    let p = v["optimum_pressure_bar"].as_f64().unwrap();
    assert!((4.0..=9.0).contains(&p), "{p}");
    // Calibrated by default to 1e-9 at 6.5 bar.
    assert!(v["optimum_eta"].as_f64().unwrap() > 1e-9);
}

#[test]
fn scan_then_fit_recovers_generator_width() {
    let dir = tempfile::tempdir().unwrap();
    let out = h2conv(
        &[
            "scan-resonance",
            "--pressure-bar",
            "16.7",
            "--out",
            "scan.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let v = ok_json(&["fit", "lorentzian", "--input", "scan.csv"], dir.path());
    assert_eq!(v["model"], "lorentzian");
    assert_eq!(v["converged"], true);
    let fwhm = v["params"]["fwhm"]["value"].as_f64().unwrap();
    assert!((fwhm / 668.0 - 1.0).abs() < 1e-6, "{fwhm}");
    assert!(v["config"]["input"].is_string());
}

#[test]
fn seeded_scans_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "scan-resonance",
        "--pressure-bar",
        "8",
        "--noise",
        "poisson",
        "--seed",
        "17",
    ];
    let a = h2conv(&args, dir.path());
    let b = h2conv(&args, dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(a.stdout.starts_with(b"detuning_MHz,counts,sigma\n"));
}

#[test]
fn pressure_series_extrapolates_to_line_center() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(
        &[
            "pressure-series",
            "--pressures",
            "4,8,12,16",
            "--out-dir",
            "scans",
        ],
        dir.path(),
    );
    assert!((v["shift_MHz_per_bar"].as_f64().unwrap() + 80.0).abs() < 1e-6);
    assert!((v["nu0_THz"].as_f64().unwrap() - 124.571055).abs() < 1e-12);
    assert_eq!(v["fits"].as_array().unwrap().len(), 4);
    assert!(dir.path().join("scans/scan_4bar.csv").exists());
}

#[test]
fn polarization_scan_and_malus_fits() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(&["polarization-scan", "--out", "pol.csv"], dir.path());
    assert!((v["fidelity"].as_f64().unwrap() - 0.95238).abs() < 1e-5);
    assert!((v["phase_difference_deg"].as_f64().unwrap() - 90.0).abs() < 0.5);
    let f = ok_json(
        &["fit", "malus", "--input", "pol.csv", "--channel", "2"],
        dir.path(),
    );
    assert!((f["params"]["phase"]["value"].as_f64().unwrap() - 90.0).abs() < 1e-6);
}

#[test]
fn line_fit_on_named_columns() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.csv"),
        "p,center\n4,-320\n8,-640\n12,-960\n",
    )
    .unwrap();
    let v = ok_json(
        &[
            "fit",
            "line",
            "--input",
            "c.csv",
            "--x-column",
            "p",
            "--y-column",
            "center",
        ],
        dir.path(),
    );
    assert!((v["params"]["slope"]["value"].as_f64().unwrap() + 80.0).abs() < 1e-12);
}

#[test]
fn toggle_writes_counts_table() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(
        &[
            "toggle",
            "--cycles",
            "20",
            "--seconds",
            "10",
            "--extra-cps",
            "1",
            "--out",
            "t.csv",
        ],
        dir.path(),
    );
    assert!(v["significance"].as_f64().is_some());
    let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(text.starts_with("cycle,phase,counts\n0,on,"));
    assert_eq!(text.lines().count(), 41);
}

#[test]
fn optimize_pressure_report() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(&["optimize", "--param", "pressure"], dir.path());
    let p = v["optimum_pressure_bar"].as_f64().unwrap();
    assert!((4.0..=9.0).contains(&p));
    let out = h2conv(
        &[
            "optimize", "--param", "pressure", "--lo-bar", "10", "--hi-bar", "16",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 4);
}

#[test]
fn config_errors_exit_3_with_location() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"cell": {"length_mm": 140}}"#,
    )
    .unwrap();
    let out = h2conv(&["sweep-pressure", "--config", "bad.json"], dir.path());
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cell.length_mm"));
    let out = h2conv(&["fit", "lorentzian", "--input", "missing.csv"], dir.path());
    assert_eq!(code(&out), 3);
    std::fs::write(dir.path().join("s.csv"), "detuning_MHz,sigma\n1,1\n").unwrap();
    let out = h2conv(&["fit", "lorentzian", "--input", "s.csv"], dir.path());
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("counts"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&h2conv(&["sweep-pressure", "--pressure", "3"], dir.path())),
        2
    );
    assert_eq!(
        code(&h2conv(
            &["dispersion", "--wavelength-nm", "434"],
            dir.path()
        )),
        2
    );
    assert_eq!(
        code(&h2conv(
            &["dispersion", "--wavelength-nm", "-4", "--pressure-bar", "1"],
            dir.path()
        )),
        2
    );
}

#[test]
fn help_names_units() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, needle) in [
        ("dispersion", "in nm"),
        ("dispersion", "in K"),
        ("mismatch", "in bar"),
        ("sweep-pressure", "in bar"),
        ("scan-resonance", "in bar"),
        ("pressure-series", "in bar"),
        ("polarization-scan", "in degrees"),
        ("toggle", "in seconds"),
        ("toggle", "counts/s"),
        ("optimize", "in bar"),
    ] {
        let out = h2conv(&[cmd, "--help"], dir.path());
        assert!(out.status.success());
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains(needle), "{cmd}: {text}");
    }
}
