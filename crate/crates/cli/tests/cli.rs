use std::path::Path;
use std::process::{Command, Output};

fn toroidsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toroidsim"))
        .args(args)
        .current_dir(dir)
        .env_remove("TOROIDSIM_CONFIG")
        .output()
        .expect("spawn toroidsim")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| {
            l.strip_prefix(key)
                .and_then(|r| r.trim_start().strip_prefix('='))
        })
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .trim()
        .to_string()
}

#[test]
fn fsr_and_polish_angle_report_expected_ranges() {
    let dir = tempfile::tempdir().unwrap();
    let o = toroidsim(dir.path(), &["fsr"]);
    assert!(o.status.success());
    let nm: f64 = value(&stdout(&o), "fsr_nm").parse().unwrap();
    assert!((2.7..3.7).contains(&nm), "{nm}");

    let o = toroidsim(dir.path(), &["polish-angle", "--diameter-um", "50"]);
    let deg: f64 = value(&stdout(&o), "complement_deg").parse().unwrap();
    assert!((16.0..20.0).contains(&deg), "{deg}");
}

#[test]
fn invalid_inputs_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["modes", "--diameter-um", "-5"][..],
        &["modes", "--diameter-um", "0"],
        &["fsr", "--radial-order", "0"],
        &["analyze", "missing.csv"],
        &["frobnicate"],
        &["--set", "no.such_key=1", "fsr"],
        &["thermal", "--omega", "2.5"],
    ] {
        let o = toroidsim(dir.path(), args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn malformed_csv_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.csv"),
        "wavelength_nm,intensity\n880,0.1\n880.1\n",
    )
    .unwrap();
    let o = toroidsim(dir.path(), &["analyze", "bad.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn non_convergence_exits_with_numerical_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = toroidsim(
        dir.path(),
        &["thermal", "--nr", "40", "--max-iterations", "10"],
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn synth_then_analyze_recovers_diameter() {
    let dir = tempfile::tempdir().unwrap();
    assert!(
        toroidsim(dir.path(), &["synth", "--seed", "3", "--out", "s.csv"])
            .status
            .success()
    );
    let text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(text.starts_with("# toroidsim"));
    assert!(text.contains("# synth.seed = 3"));

    let o = toroidsim(dir.path(), &["analyze", "s.csv"]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let d = report["inferred_diameter_um"].as_f64().unwrap();
    assert!((d - 55.0).abs() / 55.0 < 0.05, "{d}");
    assert!(report["peaks"].as_array().unwrap().len() >= 6);
}

#[test]
fn fixed_seed_outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = toroidsim(dir.path(), &["synth", "--seed", "9"]);
    let b = toroidsim(dir.path(), &["synth", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
    let c = toroidsim(dir.path(), &["synth", "--seed", "10"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn config_layers_in_order() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "# test\noptics.wavelength_nm = 905\n",
    )
    .unwrap();
    let wl = |args: &[&str]| {
        let o = toroidsim(dir.path(), args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        value(&stdout(&o), "wavelength_nm")
    };
    assert_eq!(
        wl(&["--config", "run.cfg", "fsr"]),
        wl(&["fsr", "--wavelength-nm", "905"])
    );
    assert_eq!(
        wl(&[
            "--config",
            "run.cfg",
            "--set",
            "optics.wavelength_nm=910",
            "fsr"
        ]),
        wl(&["fsr", "--wavelength-nm", "910"])
    );
    assert_eq!(
        wl(&[
            "--config",
            "run.cfg",
            "--set",
            "optics.wavelength_nm=910",
            "fsr",
            "--wavelength-nm",
            "920"
        ]),
        wl(&["fsr", "--wavelength-nm", "920"])
    );

    let env = Command::new(env!("CARGO_BIN_EXE_toroidsim"))
        .args(["fsr"])
        .current_dir(dir.path())
        .env("TOROIDSIM_CONFIG", dir.path().join("run.cfg"))
        .output()
        .unwrap();
    assert_eq!(
        value(&stdout(&env), "wavelength_nm"),
        wl(&["fsr", "--wavelength-nm", "905"])
    );
}

#[test]
fn bad_config_line_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.cfg"),
        "optics.silica_index = 1.45\nthis is not valid\n",
    )
    .unwrap();
    let o = toroidsim(dir.path(), &["--config", "bad.cfg", "fsr"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn zero_power_thermal_has_no_melt_front() {
    let dir = tempfile::tempdir().unwrap();
    let o = toroidsim(dir.path(), &["thermal", "--power-mw", "0", "--nr", "40"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(value(&text, "melt_front_um"), "none");
    let rise: f64 = value(&text, "max_rise_k").parse().unwrap();
    assert!(rise.abs() < 1e-6);

    let o = toroidsim(dir.path(), &["reflow", "--power-mw", "0", "--nr", "40"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn power_sweep_front_never_moves_outward() {
    let dir = tempfile::tempdir().unwrap();
    let o = toroidsim(
        dir.path(),
        &["thermal", "--nr", "60", "--sweep-mw", "50:95:10"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fronts: Vec<f64> = stdout(&o)
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("power"))
        .map(|l| {
            let f = l.split(',').nth(3).unwrap();
            f.parse().unwrap_or(f64::INFINITY)
        })
        .collect();
    assert_eq!(fronts.len(), 10);
    assert!(fronts.windows(2).all(|w| w[1] <= w[0]), "{fronts:?}");
}

#[test]
fn implant_reports_dose_and_handles_zero_peak() {
    let dir = tempfile::tempdir().unwrap();
    let o = toroidsim(dir.path(), &["implant", "--overlap"]);
    let text = stdout(&o);
    let dev: f64 = value(&text, "deviation_percent").parse().unwrap();
    assert!(dev.abs() < 10.0);
    let eta: f64 = value(&text, "overlap_eta").parse().unwrap();
    assert!(eta > 0.0 && eta <= 1.0);

    let o = toroidsim(dir.path(), &["implant", "--peak-cm3", "0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dose: f64 = value(&stdout(&o), "integrated_dose_cm2").parse().unwrap();
    assert_eq!(dose, 0.0);
}
