use std::path::Path;
use std::process::{Command, Output};

fn afdm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_afdm")).args(args).output().expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(afdm(&["--help"]).status.code(), Some(0));
    let v = afdm(&["--version"]);
    assert_eq!(v.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&v.stdout).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn bad_arguments_and_configs_exit_one() {
    assert_eq!(afdm(&["design", "--mode", "nonsense"]).status.code(), Some(1));
    assert_eq!(afdm(&["sense", "--snr", "4:-1:0"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[system]\nn = 128\nunknown_key = 3\n").unwrap();
    let o = afdm(&["design", "--config", cfg.to_str().unwrap(), "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("config error"));
    assert_eq!(afdm(&["design", "--rcs-ratio", "1.5", "--out", &out_arg(dir.path())]).status.code(), Some(1));
    assert_eq!(afdm(&["evaluate", "--out", &out_arg(dir.path())]).status.code(), Some(1));
}

#[test]
fn design_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let o = afdm(&["design", "--mode", "joint", "--gamma", "5", "--iters", "30", "--seeds", "2", "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["design_0.afdm", "design_0.json", "design_0.trace.csv", "design_1.afdm", "summary.csv", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("design_1.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 1);
    assert_eq!(meta["source"], "proposed");
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(summary.starts_with("instance,isl_raw,isl_db_vs_baseline,"));
    assert_eq!(summary.lines().count(), 3);

    let eval_dir = dir.path().join("eval");
    let w = dir.path().join("design_0.afdm");
    let o = afdm(&["evaluate", w.to_str().unwrap(), "--out", eval_dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(eval_dir.join("evaluate.csv")).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let papr: f64 = row[2].parse().unwrap();
    assert!((papr - meta_papr(dir.path())).abs() < 1e-9);
}

fn meta_papr(dir: &Path) -> f64 {
    let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("design_0.json")).unwrap()).unwrap();
    meta["papr_db"].as_f64().unwrap()
}

#[test]
fn missing_waveform_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = afdm(&["evaluate", "/nonexistent/w.afdm", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn baseline_ccdf_and_ber_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_eq!(afdm(&["design", "--baseline", "gps", "--out", &out]).status.code(), Some(0));
    assert_eq!(afdm(&["ccdf", "--source", "gps", "--trials", "50", "--out", &out]).status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("ccdf_gps.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("gamma_db,ccdf"));
    assert_eq!(text.lines().count(), 50);

    let cfg = dir.path().join("ber.toml");
    std::fs::write(&cfg, "[ber]\nsources = [\"conventional\"]\npool = 2\n[ber.scenario]\nmin_bits = 2000\n").unwrap();
    let o = afdm(&["ber", "--config", cfg.to_str().unwrap(), "--snr", "10", "--ideal-pa", "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("ber_conventional.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
}
