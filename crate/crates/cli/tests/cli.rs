use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use upblock_cli::RunConfig;

fn upblock(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_upblock"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines
        .next()
        .unwrap()
        .split(',')
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

fn sidecar_config(path: &Path) -> RunConfig {
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    serde_json::from_value(v["config"].clone()).unwrap()
}

const SMALL_MAP: [&str; 4] = ["--set", "fig3.hwp_points=13", "--set", "fig3.qwp_points=13"];

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = upblock(dir.path(), &["selftest"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(!String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn preset_curve_is_raised_by_convolution() {
    let dir = tempfile::tempdir().unwrap();
    let o = upblock(dir.path(), &["g2tau", "--preset", "arrow-D"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("g2tau_arrow-D.csv")).unwrap();
    assert!(csv.starts_with("tau_ns,g2_bare,g2_convolved\n"));
    let bare = column(&csv, "g2_bare");
    let conv = column(&csv, "g2_convolved");
    let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min(&conv) > min(&bare));
    assert!(dir.path().join("g2tau_arrow-D.meta.json").exists());
}

#[test]
fn fig3_writes_four_tables_with_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let o = upblock(dir.path(), &[&["fig3"][..], &SMALL_MAP].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    for stem in ["fig3_n_out", "fig3_g2", "fig3_g2tau_C", "fig3_g2tau_D"] {
        let csv = fs::read_to_string(dir.path().join(format!("{stem}.csv"))).unwrap();
        assert!(csv.lines().count() > 1);
        let cfg = sidecar_config(&dir.path().join(format!("{stem}.meta.json")));
        assert_eq!(cfg.fig3.hwp_points, 13);
        assert_eq!(cfg.output_dir, dir.path());
    }
    let g2 = fs::read_to_string(dir.path().join("fig3_g2.csv")).unwrap();
    assert_eq!(g2.lines().next().unwrap(), "hwp_deg,qwp_deg,g2_bare,g2_convolved,status");
    assert_eq!(g2.lines().count(), 1 + 13 * 13);
    let n = fs::read_to_string(dir.path().join("fig3_n_out.csv")).unwrap();
    assert_eq!(n.lines().next().unwrap(), "hwp_deg,qwp_deg,mean_n_out,status");
}

#[test]
fn sidecar_config_reproduces_the_output() {
    let a = tempfile::tempdir().unwrap();
    let o = upblock(a.path(), &["fig2", "--set", "fig2.points=6", "--set", "system.g_ghz=10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut cfg = sidecar_config(&a.path().join("fig2.meta.json"));
    let b = tempfile::tempdir().unwrap();
    cfg.output_dir = b.path().to_path_buf();
    let path = b.path().join("config.toml");
    fs::write(&path, cfg.to_toml_string().unwrap()).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_upblock"))
        .args(["fig2", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(a.path().join("fig2.csv")).unwrap(),
        fs::read(b.path().join("fig2.csv")).unwrap()
    );
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = upblock(dir.path(), &["steady", "--set", "system.kappa_h_ghz=-3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("system.kappa_h_ghz"), "{}", stderr(&o));

    let o = upblock(dir.path(), &["g2tau", "--preset", "arrow-Z"]);
    assert_eq!(o.status.code(), Some(1));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[solver]\nn_max = \"three\"\n").unwrap();
    let o = upblock(dir.path(), &["steady", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn runtime_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("not_a_dir");
    fs::write(&blocker, "").unwrap();
    let o = upblock(&blocker, &["steady"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn steady_reports_mode_populations() {
    let dir = tempfile::tempdir().unwrap();
    let o = upblock(dir.path(), &["steady"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("steady.json")).unwrap()).unwrap();
    let r = &v["result"];
    for key in ["mean_photons_h", "mean_photons_v", "qd_excited_population"] {
        let x = r[key].as_f64().unwrap();
        assert!(x > 0.0 && x < 1.0, "{key} = {x}");
    }
    assert!((r["input_photons"].as_f64().unwrap() - 0.06).abs() < 1e-12);
    assert!(v["config"].is_object());
}

#[test]
fn g2zero_reports_optimizer_restarts() {
    let dir = tempfile::tempdir().unwrap();
    let o = upblock(dir.path(), &["g2zero"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("g2zero.json")).unwrap()).unwrap();
    let r = &v["result"];
    assert!(r["g2_bare"].as_f64().unwrap() < 0.05);
    assert!(r["g2_convolved"].as_f64().unwrap() > r["g2_bare"].as_f64().unwrap());
    assert!(r["selection"]["restart_spread"].as_f64().unwrap() < 1e-4);
}

#[test]
fn brightness_and_squeeze_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = upblock(
        dir.path(),
        &[
            "brightness",
            "--set",
            "brightness.theta_points=3",
            "--set",
            "brightness.splittings_ghz=[0.0, 10.0]",
            "--set",
            "optimizer.chi_points=16",
            "--set",
            "optimizer.psi_points=16",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("brightness.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
    assert!(column(&csv, "mean_n_out").iter().all(|&n| n > 0.0));

    let o = upblock(dir.path(), &[&["squeeze"][..], &SMALL_MAP].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(dir.path().join("squeeze_two_photon.csv")).unwrap();
    assert!(table.starts_with("alpha_bar,r,r_over_alpha_sq,p2_exact,p2_approx,relative_error,squeezing_db\n"));
    let dist = fs::read_to_string(dir.path().join("photon_distribution.csv")).unwrap();
    assert_eq!(dist.lines().next().unwrap(), "n,coherent,arrow-C,arrow-D");
    for name in ["coherent", "arrow-C", "arrow-D"] {
        let total: f64 = column(&dist, name).iter().sum();
        assert!((total - 1.0).abs() < 1e-6, "{name}: {total}");
    }
    assert!(dir.path().join("photon_statistics.meta.json").exists());
}
