//! End-to-end checks of the `ksic` binary: output shapes and exit codes.

use std::process::Command;

fn ksic() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ksic"))
}

#[test]
fn eigen_emits_json_with_expected_fields() {
    let out = ksic().args(["eigen", "--lambda", "60", "--oracle", "--n", "400"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let delta = v["delta_o"].as_f64().unwrap();
    assert!(delta < 0.0);
    let oracle = v["oracle"].as_f64().unwrap();
    assert!((delta - oracle).abs() / delta.abs() < 1e-2);
    assert!(v["bracket"].as_array().unwrap().len() == 2);
}

#[test]
fn coeffs_unit_interval_closed_forms() {
    let out = ksic().args(["coeffs", "--a", "0", "--b", "1"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["c1"]["a"].as_f64().unwrap() - 24.0).abs() < 1e-12);
    assert!((v["c2"]["c"].as_f64().unwrap() - 9.0 / 35.0).abs() < 1e-12);
}

#[test]
fn sigma3_emits_csv() {
    let out = ksic()
        .args([
            "sigma3", "--alpha1", "8", "--alpha2", "9", "--delta1", "1", "--delta2", "1.5", "--tbar1", "0.4",
            "--tbar2", "0.3", "--periods", "2", "--samples", "2",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# ksic_version="));
    assert_eq!(lines.next().unwrap(), "t,V1,V2");
    assert_eq!(text.lines().count(), 2 + 1 + 2 * 2 * 2); // header + t0 + samples
}

#[test]
fn certify_rejects_insufficient_rates_with_exit_2() {
    let out = ksic()
        .args(["certify", "--controller", "1", "--lambda1", "50", "--alpha1", "1", "--alpha2", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_fast_passes() {
    let out = ksic().args(["verify", "--level", "fast"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[XFAIL] control.latched_law_with_interface_term"));
    assert!(text.contains("verification fast: ok"));
}

#[test]
fn simulate_reports_blowup_with_exit_3() {
    // controller 1 at the desk scale diverges within a few steps; the run
    // must end with the blow-up exit code and a JSON outcome
    let dir = std::env::temp_dir().join("ksic_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("desk1.json");
    std::fs::write(
        &cfg,
        r#"{
  "grid": { "n_w": 65, "n_v": 65, "y": 1.0, "l": 2.0 },
  "physics": { "lambda1": 50.0 },
  "schedule": { "tbar1": 0.05, "tbar2": 0.05 },
  "controller": { "mode": "controller1", "alpha1": 15000.0, "alpha2": 15000.0 },
  "solver": { "dt": 1e-6, "t_end": 0.01, "preset": { "kind": "random_smooth", "amplitude": 0.001 }, "seed": 1 },
  "outputs": { "stride": 1000 }
}"#,
    )
    .unwrap();
    let out = ksic().args(["simulate", "--config", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["outcome"]["kind"], "blown_up");
}
