use delsarte::scenario::{list_scenarios, run_scenario, ScenarioConfig};

#[test]
fn every_scenario_passes_with_defaults() {
    let mut failed = Vec::new();
    for (name, _) in list_scenarios() {
        let out = run_scenario(&ScenarioConfig::for_scenario(name)).unwrap();
        print!("{}", out.csv().unwrap());
        for r in &out.rows {
            if !r.pass {
                failed.push(format!("{name}/{}: {:?}", r.check, r.error));
            }
        }
    }
    assert!(failed.is_empty(), "{failed:#?}");
}

#[test]
fn toml_and_json_configs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("c.toml");
    let j = dir.path().join("c.json");
    std::fs::write(&t, "scenario = \"betti\"\nseed = 4\n[grid]\ntorus = 6\n[tolerances]\nloop-period = 1e-10\n").unwrap();
    std::fs::write(&j, r#"{"scenario": "betti", "seed": 4, "grid": {"torus": 6}, "tolerances": {"loop-period": 1e-10}}"#).unwrap();
    let a = ScenarioConfig::load(&t).unwrap();
    assert_eq!(a, ScenarioConfig::load(&j).unwrap());
    let out = run_scenario(&a).unwrap();
    assert_eq!(out.row("loop-period").unwrap().threshold, 1e-10);
    assert_eq!(out.row("dims-t2").unwrap().grid, "6x6");
}

#[test]
fn invalid_configs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.toml");
    for bad in ["", "  \n", "scenario = \"nope\"", "[tolerances]\nx = -1.0", "unknown_field = 1", "[family]\nkappa = 0.0"] {
        std::fs::write(&p, bad).unwrap();
        assert!(ScenarioConfig::load(&p).is_err(), "{bad:?}");
    }
}

#[test]
fn failed_setup_becomes_failed_rows() {
    let mut cfg = ScenarioConfig::for_scenario("darboux-1d");
    cfg.grid.points = Some(4);
    let out = run_scenario(&cfg).unwrap();
    assert!(!out.rows.is_empty());
    assert!(out.rows.iter().all(|r| !r.pass && r.error.is_some()));
}

#[test]
fn rows_pass_iff_residual_within_threshold() {
    let out = run_scenario(&ScenarioConfig::for_scenario("complex-exactness")).unwrap();
    for r in &out.rows {
        assert_eq!(r.pass, r.residual <= r.threshold);
    }
}
