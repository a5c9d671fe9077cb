use serde_json::json;
use stit_harness::{run_experiment, HarnessError, Report, EXPERIMENTS};

fn smoke(name: &str, seed: u64) -> Report {
    run_experiment(name, None, seed, 0.01).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn every_experiment_runs_at_smoke_scale() {
    for name in EXPERIMENTS {
        if *name == "cond-independence" {
            continue;
        }
        let r = smoke(name, 3);
        assert_eq!(r.experiment, *name);
        assert!(!r.rows.is_empty());
        assert!(r.notes.iter().any(|n| n.contains("reduced power")));
        assert!(r.rows.iter().any(|row| row.pass.is_some()), "{name} asserts nothing");
    }
}

#[test]
fn reports_are_deterministic() {
    let a = smoke("method-equivalence", 11);
    let b = smoke("method-equivalence", 11);
    assert_eq!(a.csv().unwrap(), b.csv().unwrap());
    assert_eq!(a.config_hash, b.config_hash);
    let c = smoke("method-equivalence", 12);
    assert_ne!(a.csv().unwrap(), c.csv().unwrap());
    assert_eq!(a.config_hash, c.config_hash);
}

#[test]
fn targets_are_echoed() {
    let r = smoke("first-split", 1);
    let row = &r.rows[0];
    assert!((row.target.unwrap() - (-1.0f64).exp()).abs() < 1e-15);
    assert_eq!(r.config["t"], json!(0.25));
    assert_eq!(r.config["n_scale"], json!(0.01));
}

#[test]
fn config_overrides_change_the_hash() {
    let cfg = json!({"t": 0.5});
    let a = run_experiment("first-split", Some(&cfg), 1, 0.01).unwrap();
    let b = smoke("first-split", 1);
    assert_ne!(a.config_hash, b.config_hash);
    assert!((a.rows[0].target.unwrap() - (-2.0f64).exp()).abs() < 1e-15);
}

#[test]
fn doubling_t_squares_the_capacity_target() {
    let a = run_experiment("capacity", Some(&json!({"t": 0.1})), 1, 0.01).unwrap();
    let b = run_experiment("capacity", Some(&json!({"t": 0.2})), 1, 0.01).unwrap();
    let (pa, pb) = (a.rows[0].target.unwrap(), b.rows[0].target.unwrap());
    assert!((pa * pa - pb).abs() < 1e-15);
}

#[test]
fn tiny_horizon_leaves_the_window_uncut() {
    let r = run_experiment("capacity", Some(&json!({"t": 1e-9})), 1, 0.01).unwrap();
    assert_eq!(r.rows[0].estimate, 1.0);
}

#[test]
fn too_few_conditioned_replicates() {
    // a tiny t2 makes early encapsulation essentially impossible
    let cfg = json!({"t2": 1e-6});
    let e = run_experiment("cond-independence", Some(&cfg), 1, 0.0001).unwrap_err();
    assert!(matches!(e, HarnessError::TooFewConditioned { .. }));
}

#[test]
fn invalid_configs() {
    for cfg in [json!({"t2": 0.5}), json!({"probe_y": 30.0}), json!({"unknown": true})] {
        assert!(run_experiment("cond-independence", Some(&cfg), 1, 0.0001)
            .unwrap_err()
            .is_config());
    }
    let iso_boxes = json!({"measure": {"gamma": 1.0, "directional": {"kind": "isotropic2d"}}});
    assert!(run_experiment("encapsulation-equality", Some(&iso_boxes), 1, 0.01)
        .unwrap_err()
        .is_config());
}

#[test]
fn power_check_detects_the_wrong_scaling() {
    let r = run_experiment("stit-property", None, 5, 0.2).unwrap();
    let power = r.rows.iter().find(|row| row.label == "power:detected").unwrap();
    assert_eq!(power.pass, Some(true));
}
