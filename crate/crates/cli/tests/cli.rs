use std::path::Path;
use std::process::{Command, Output};

fn conelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conelab"))
        .args(args)
        .output()
        .expect("spawn conelab")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn small_sweep(dir: &Path, schema_version: u32) -> std::path::PathBuf {
    let cfg = serde_json::json!({
        "schema_version": schema_version,
        "plan": {
            "theta": std::f64::consts::FRAC_PI_2,
            "theta_x": std::f64::consts::PI,
            "schedule": [
                {"r_min": 1e-2, "r_max": 1e2},
                {"r_min": 1e-3, "r_max": 1e3}
            ],
            "resolution": {"elements_per_decade": 12.0}
        }
    });
    let p = dir.join(format!("sweep_v{schema_version}.json"));
    std::fs::write(&p, cfg.to_string()).unwrap();
    p
}

#[test]
fn analytic_quarter_plane() {
    let v = json(&conelab(&[
        "analytic", "--N", "2", "--theta", "1.5707963267948966", "--mu", "3", "--rmin", "1e-3", "--rmax", "1e3",
    ]));
    assert_eq!(v["mu_C"].as_f64().unwrap(), 4.0);
    assert_eq!(v["lambda_D"].as_f64().unwrap(), 4.0);
    let (ap, am) = (v["alpha_plus"].as_f64().unwrap(), v["alpha_minus"].as_f64().unwrap());
    assert!((ap - 1.0).abs() < 1e-12 && (am + 1.0).abs() < 1e-12);
    let l = 6.0 * 10f64.ln();
    let expected = 4.0 + (std::f64::consts::PI / l).powi(2);
    assert!((v["mu_trunc"].as_f64().unwrap() - expected).abs() < 1e-12);
}

#[test]
fn analytic_rejects_mismatched_dimension() {
    let out = conelab(&["analytic", "--N", "3", "--theta", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mesh_writes_text() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    let out = conelab(&[
        "mesh", "--bulge", "1,2,0.785", "--n-radial", "12", "--n-angular", "4", "--refine", "1", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let mesh = conelab::geometry::Mesh::from_text(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(mesh.min_signed_area() > 0.0);
}

#[test]
fn solve_reports_eigenpair() {
    let v = json(&conelab(&["solve", "--elements-per-decade", "8"]));
    let mu = v["mu_h"].as_f64().unwrap();
    assert!(mu > 4.05 && mu < 4.4, "{mu}");
    assert_eq!(v["positivity_ok"], true);
}

#[test]
fn bs_check_csv_and_exit_codes() {
    let out = conelab(&["bs-check", "--rmin", "1e-2", "--rmax", "1e2", "--elements-per-decade", "8"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("lambda,defect\n"));
    assert!(text.lines().count() > 2);
    let strict = conelab(&[
        "bs-check", "--rmin", "1e-2", "--rmax", "1e2", "--elements-per-decade", "8", "--max-defect", "0",
    ]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn sweep_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_sweep(dir.path(), 1);
    let out_dir = dir.path().join("out");
    let out = conelab(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), conelab::lab::output::RESULTS_HEADER);
    assert_eq!(csv.lines().count(), 3);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("verdict.json")).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["sweep"]["verdict"]["classification"].is_string());
    assert!(out_dir.join("plotdata").join("mu_vs_invL2.csv").exists());
}

#[test]
fn wrong_schema_version_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_sweep(dir.path(), 2);
    let out = conelab(&["sweep", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema_version"));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let _: conelab::lab::SweepConfig = conelab::lab::load_config(&root.join("sweep_cone.json")).unwrap();
    let _: conelab::lab::SweepConfig = conelab::lab::load_config(&root.join("sweep_bulge.json")).unwrap();
    let _: conelab::lab::SweepConfig = conelab::lab::load_config(&root.join("decay.json")).unwrap();
    let _: conelab::lab::GapConfig = conelab::lab::load_config(&root.join("gap.json")).unwrap();
    let _: conelab::lab::ProbeConfig = conelab::lab::load_config(&root.join("probe.json")).unwrap();
    let _: conelab::lab::BumpConfig = conelab::lab::load_config(&root.join("bump_search.json")).unwrap();
    let _: conelab::lab::MonoConfig = conelab::lab::load_config(&root.join("mono.json")).unwrap();
}
