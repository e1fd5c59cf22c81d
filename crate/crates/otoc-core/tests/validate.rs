use serde_json::json;

use otoc_core::config::RunConfig;
use otoc_core::io::{read_dense_matrix, write_dense_matrix};
use otoc_core::lattice::build_creutz;
use otoc_core::validate::*;

fn cfg(model: &str, nu: f64, w: serde_json::Value, state: serde_json::Value) -> RunConfig {
    RunConfig::from_value(json!({
        "model": model, "params": {"n": 40, "nu": nu},
        "initial_state": state, "w_operator": w,
        "time_grid": {"t_max": 60.0, "dt": 0.5}
    }))
    .unwrap()
}

fn a1() -> serde_json::Value {
    json!({"kind": "site_projector", "sites": [[1, "A"]]})
}

fn basis() -> serde_json::Value {
    json!({"kind": "basis", "site": [1, "A"]})
}

#[test]
fn extended_chain_matches_closed_form() {
    for nu in [0.5, 1.5] {
        for w in [a1(), json!({"kind": "chiral_sum", "j": 3})] {
            let st = json!({"kind": "staggered", "m": 3});
            let r = validate(&cfg("ssh_extended", nu, w.clone(), st), ChainMode::Extended, None).unwrap();
            assert!(r.max_diff <= 1e-10, "nu={nu} {w}: {}", r.max_diff);
            assert_eq!(r.times.len(), 121);
        }
    }
    let w = json!({"kind": "site_projector", "sites": [[1, "A"], [2, "A"]]});
    let r = validate(&cfg("ssh", 0.7, w, basis()), ChainMode::Extended, None).unwrap();
    assert!(r.max_diff <= 1e-10);
}

#[test]
fn plain_chain_agrees_in_the_topological_phase() {
    let r = validate(&cfg("ssh", 0.5, a1(), basis()), ChainMode::Plain, None).unwrap();
    assert!(r.max_diff <= 1e-6, "{}", r.max_diff);
}

#[test]
fn corruption_is_detected() {
    let c = Corruption { i: 0, j: 1, delta: 0.01 };
    let r = validate(&cfg("ssh", 0.5, a1(), basis()), ChainMode::Extended, Some(c)).unwrap();
    assert!(r.max_diff > 1e-6);
    let bad = Corruption { i: 500, j: 1, delta: 0.01 };
    assert!(validate(&cfg("ssh", 0.5, a1(), basis()), ChainMode::Extended, Some(bad)).is_err());
}

#[test]
fn unsupported_inputs() {
    let e = validate(&cfg("ssh", 0.0, a1(), basis()), ChainMode::Extended, None).unwrap_err();
    assert!(e.is_input_error() && e.to_string().contains("nu"));
    let w = json!({"kind": "site_projector", "sites": [[2, "A"]]});
    assert!(validate(&cfg("ssh", 0.5, w, basis()), ChainMode::Extended, None).is_err());
    let st = json!({"kind": "basis", "site": [1, "B"]});
    assert!(validate(&cfg("ssh", 0.5, a1(), st), ChainMode::Extended, None).is_err());
    let cr = RunConfig::from_value(json!({
        "model": "creutz", "params": {"n": 5, "eta0": 0.5},
        "initial_state": basis(), "w_operator": a1()
    }))
    .unwrap();
    assert!(validate(&cr, ChainMode::Extended, None).unwrap_err().is_input_error());
}

#[test]
fn report_csv() {
    let r = validate(&cfg("ssh", 0.5, a1(), basis()), ChainMode::Extended, None).unwrap();
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    let s = String::from_utf8(buf).unwrap();
    assert!(s.starts_with("t,analytic,numeric,diff\n"));
    assert_eq!(s.lines().count(), 122);
}

#[test]
fn dense_matrix_round_trip() {
    let h = build_creutz(3, 0.4, 1.3).unwrap();
    let text = write_dense_matrix(&h.entries);
    assert_eq!(read_dense_matrix(&text).unwrap(), h.entries);
    assert!(read_dense_matrix("").is_err());
    assert!(read_dense_matrix("2\n1 0 0 0\n0 0").is_err());
    assert!(read_dense_matrix("1\n1 0 5").is_err());
}
