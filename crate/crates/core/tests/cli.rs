use std::path::Path;
use std::process::{Command, Output};

fn chargeflow(dir: &Path, args: &[&str]) -> Output {
    let config = dir.join("config.json");
    if !config.exists() {
        std::fs::write(&config, "{}").unwrap();
    }
    Command::new(env!("CARGO_BIN_EXE_chargeflow")).args(args).arg("--config").arg(&config).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn gauss_map_writes_metadata_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.csv");
    let out = chargeflow(
        dir.path(),
        &[
            "gauss-map",
            "--case",
            "B",
            "--override",
            "gauss_map.x1.count=3",
            "--override",
            "gauss_map.x2.count=2",
            "--out",
            path.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let (meta, body): (Vec<&str>, Vec<&str>) = text.lines().partition(|l| l.starts_with('#'));
    assert_eq!(meta[0], "# chargeflow gauss-map");
    let config = meta.iter().find_map(|l| l.strip_prefix("# config: ")).unwrap();
    let config: serde_json::Value = serde_json::from_str(config).unwrap();
    assert_eq!(config["case"], "B");
    assert_eq!(config["gauss_map"]["x1"]["count"], 3);
    assert_eq!(body[0], "x1,x2,delta_qd");
    assert_eq!(body.len(), 1 + 3 * 2);
    // probes coincide on the first row
    assert_eq!(body[1], "-10,-10,0");
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&chargeflow(dir.path(), &["gauss-map", "--override", "nope=1"])), 2);
    assert_eq!(code(&chargeflow(dir.path(), &["gauss-map", "--case", "E"])), 2);
    assert_eq!(code(&chargeflow(dir.path(), &["gauss-map", "--override", "grid.points=4"])), 2);
    let out = Command::new(env!("CARGO_BIN_EXE_chargeflow"))
        .args(["gauss-map", "--config", dir.path().join("missing.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_reports_json_and_flags_the_half_coefficient() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let p = path.to_str().unwrap();
    let out = chargeflow(dir.path(), &["verify", "--out", p]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["checks"].as_array().unwrap().len() >= 4);

    let out = chargeflow(
        dir.path(),
        &[
            "verify",
            "--override",
            "verify.density_coefficient=0.5",
            "--override",
            "verify.checks=[\"analytic\"]",
            "--out",
            p,
        ],
    );
    assert_eq!(code(&out), 1);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["checks"][0]["name"], "analytic");
    assert_eq!(report["checks"][0]["passed"], false);
}

#[test]
fn unconverged_sweep_rows_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("laser.csv");
    let out = chargeflow(
        dir.path(),
        &[
            "laser-sweep",
            "--override",
            "laser.points=8192",
            "--override",
            "laser.f0={\"min\":1e-4,\"max\":1e-4,\"count\":1}",
            "--override",
            "laser.convergence=1e-14",
            "--out",
            path.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&out), 3);
    let text = std::fs::read_to_string(&path).unwrap();
    let last = text.lines().last().unwrap();
    assert!(last.contains("error: convergence failure"), "{last}");
}
