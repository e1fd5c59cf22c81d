use serde_json::{json, Value};

use otoc_core::config::*;

fn base() -> Value {
    json!({
        "model": "ssh", "params": {"n": 8, "nu": 0.5},
        "initial_state": {"kind": "basis", "site": [1, "A"]},
        "w_operator": {"kind": "site_projector", "sites": [[1, "A"]]}
    })
}

#[test]
fn unknown_keys_are_rejected() {
    let mut v = base();
    v["colour"] = json!("blue");
    assert!(RunConfig::from_value(v).unwrap_err().is_input_error());
    let mut v = base();
    v["params"]["mass"] = json!(1.0);
    let e = RunConfig::from_value(v).unwrap_err();
    assert!(e.is_input_error());
}

#[test]
fn missing_nu_names_the_field() {
    let mut v = base();
    v["params"].as_object_mut().unwrap().remove("nu");
    let e = RunConfig::from_value(v).unwrap_err();
    assert!(e.to_string().contains("nu"), "{e}");
}

#[test]
fn out_of_range_parameters() {
    for (k, x) in [("n", json!(1)), ("epsilon", json!(0.0)), ("eta", json!("big"))] {
        let mut v = base();
        v["params"][k] = x;
        let e = RunConfig::from_value(v).unwrap_err();
        assert!(e.to_string().contains(k), "{k}: {e}");
    }
    let mut v = base();
    v["time_grid"] = json!({"t_max": -1.0, "dt": 0.1});
    assert!(RunConfig::from_value(v).is_err());
    let mut v = base();
    v["disorder"] = json!({"d": 1.0, "prng": "mt19937"});
    assert!(RunConfig::from_value(v).unwrap_err().to_string().contains("prng"));
    let mut v = base();
    v["disorder"] = json!({"d": 1.0, "d1": 0.5});
    assert!(RunConfig::from_value(v).is_err());
}

#[test]
fn defaults_are_filled() {
    let c = RunConfig::from_value(base()).unwrap();
    let n = c.normalized().unwrap();
    assert_eq!(n["params"]["eta"], json!(0.0));
    assert_eq!(n["params"]["epsilon"], json!(1.0));
    assert_eq!(n["time_grid"]["t_max"], json!(200.0));
    assert_eq!(n["observable"]["kind"], json!("long_time_limit"));
}

#[test]
fn normalized_round_trip_and_fingerprint() {
    let a = RunConfig::from_value(base()).unwrap();
    let b = RunConfig::from_value(a.normalized().unwrap()).unwrap();
    assert_eq!(a.fingerprint().unwrap(), b.fingerprint().unwrap());
    assert_eq!(b.normalized().unwrap(), a.normalized().unwrap());
    assert_eq!(a.fingerprint().unwrap().len(), 64);

    // explicit defaults hash the same as implicit ones
    let mut v = base();
    v["params"]["epsilon"] = json!(1.0);
    assert_eq!(RunConfig::from_value(v).unwrap().fingerprint().unwrap(), a.fingerprint().unwrap());
    let mut v = base();
    v["params"]["nu"] = json!(0.6);
    assert_ne!(RunConfig::from_value(v).unwrap().fingerprint().unwrap(), a.fingerprint().unwrap());
}

#[test]
fn all_families_parse() {
    let docs = [
        json!({"model": "ssh_extended", "params": {"n": 5, "nu": 1.2}}),
        json!({"model": "creutz", "params": {"n": 5, "eta0": 0.5}}),
        json!({"model": "haldane", "params": {"nx": 3, "ny": 3, "mu": 1.0}}),
        json!({"model": "qwz", "params": {"nx": 3, "ny": 3, "eta0": 1.0, "mu_p": 1.0}}),
        json!({"model": "ssh2d", "params": {"nx": 3, "ny": 3, "nu_p": 0.5}}),
        json!({"model": "nonhermitian_ssh", "params": {"n": 5, "nu": 1.2, "delta": 0.3}}),
    ];
    for mut d in docs {
        d["initial_state"] = json!({"kind": "lowest_abs_eigenstate", "project_qs": false});
        d["w_operator"] = json!({"kind": "identity"});
        if d["model"] == "nonhermitian_ssh" {
            d["initial_state"] = json!({"kind": "basis", "site": [1, "A"]});
        }
        let c = RunConfig::from_value(d.clone()).unwrap_or_else(|e| panic!("{d}: {e}"));
        let p = c.pipeline().unwrap();
        assert_eq!(p.model.family(), d["model"].as_str().unwrap());
    }
}

#[test]
fn set_parameters_by_name() {
    let mut m = RunConfig::from_value(base()).unwrap().pipeline().unwrap().model;
    m.set("nu", 0.9).unwrap();
    assert_eq!(m.params_value()["nu"], json!(0.9));
    m.set("eta", 0.25).unwrap();
    assert_eq!(m.params_value()["eta"], json!(0.25));
    assert_eq!(m.chain_cells(), Some(8));
    assert!(m.set("mu", 1.0).is_err());
    // lattice sizes are not sweepable
    assert!(m.set("n", 12.0).is_err());
}

#[test]
fn disorder_strengths() {
    assert_eq!(DisorderSpec::with_strength(2.0).strengths().unwrap(), (1.0, 2.0));
    let mut d = DisorderSpec::with_strength(1.0);
    d.set("d1", 0.3).unwrap();
    assert_eq!(d.strengths().unwrap(), (0.3, 0.0));
    assert!(d.set("x", 1.0).is_err());
}

#[test]
fn disorder_only_on_ssh() {
    let v = json!({
        "model": "creutz", "params": {"n": 5, "eta0": 0.5},
        "disorder": {"d": 1.0},
        "initial_state": {"kind": "basis", "site": [1, "A"]},
        "w_operator": {"kind": "identity"}
    });
    assert!(RunConfig::from_value(v).unwrap_err().to_string().contains("disorder"));
}

#[test]
fn site_labels_resolve() {
    let mut v = base();
    v["w_operator"] = json!({"kind": "site_projector", "sites": [[9, "A"]]});
    let c = RunConfig::from_value(v);
    // labels are checked when the operator is built
    let p = c.map(|c| c.pipeline().unwrap());
    if let Ok(p) = p {
        assert!(p.run(None, None).is_err());
    }
}
