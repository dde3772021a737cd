use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_delsarte"))
}

#[test]
fn list_prints_nine_scenarios_in_stable_order() {
    let a = bin().arg("list").output().unwrap();
    let b = bin().arg("list").output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let names: Vec<String> = String::from_utf8(a.stdout)
        .unwrap()
        .lines()
        .map(|l| l.split_whitespace().next().unwrap().to_string())
        .collect();
    assert_eq!(
        names,
        [
            "lagrangian-identity",
            "darboux-1d",
            "intertwine",
            "inverse-roundtrip",
            "kernel-invariance",
            "complex-exactness",
            "betti",
            "hodge-decomposition",
            "locality"
        ]
    );
}

#[test]
fn unknown_scenario_lists_valid_names() {
    let out = bin().args(["run", "nope"]).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("unknown scenario") && err.contains("betti"), "{err}");
}

#[test]
fn empty_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    std::fs::write(&cfg, "").unwrap();
    let out = bin().args(["run", "betti", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("empty"));
}

#[test]
fn missing_operator_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "scenario = \"lagrangian-identity\"\noperator = \"missing.toml\"\n").unwrap();
    let out = bin().args(["run", "lagrangian-identity", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
}

fn run_betti(out: &Path, extra: &[&str]) -> std::process::Output {
    bin().args(["run", "betti", "--out"]).arg(out).args(extra).output().unwrap()
}

#[test]
fn betti_writes_reports_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_betti(dir.path(), &["--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("betti.csv")).unwrap();
    assert!(csv.starts_with("scenario,check,residual,threshold,pass,grid,ms\n"));
    assert!(csv.lines().any(|l| l.starts_with("betti,dims-t2,") && l.contains(",true,8x8,")));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("betti.json")).unwrap()).unwrap();
    let dims: Vec<u64> = json["details"]["harmonic-t2"]["degrees"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["dim"].as_u64().unwrap())
        .collect();
    assert_eq!(dims, [1, 2, 1]);
}

#[test]
fn same_seed_gives_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let cfg = d.path().join("c.json");
        std::fs::write(&cfg, r#"{"seed": 11, "grid": {"torus": 8}}"#).unwrap();
        let out = bin().args(["run", "hodge-decomposition", "--config"]).arg(&cfg).arg("--out").arg(d.path()).output().unwrap();
        assert!(out.status.success());
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("hodge-decomposition.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn failing_threshold_gives_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[tolerances]\nloop-period = 1e-300\n\"gap-t1\" = 100.0\n").unwrap();
    let out = bin().args(["run", "betti", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("betti,gap-t1,") && l.contains(",false,")));
}

#[test]
fn svg_flag_writes_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["run", "kernel-invariance", "--svg", "--out"]).arg(dir.path()).output().unwrap();
    assert!(out.status.success());
    let svg = std::fs::read_to_string(dir.path().join("kernel-invariance-kernel-det.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn shipped_configs_pass() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["lagrangian-identity", "darboux-1d", "betti"] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = root.join(format!("{name}.toml"));
        let out = bin().args(["run", name, "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stdout));
    }
}
