use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn mukai(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mukai")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn fixture_value(name: &str) -> Value {
    let o = mukai(&["fixtures", name]);
    assert_eq!(code(&o), 0);
    serde_json::from_slice(&o.stdout).unwrap()
}

fn write_temp(v: &Value) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".json").tempfile().unwrap();
    f.write_all(v.to_string().as_bytes()).unwrap();
    f
}

#[test]
fn every_fixture_passes() {
    for name in ["genus2", "nikulin", "order11", "order2-frameshapes"] {
        let o = mukai(&["run", name, "--json"]);
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stdout));
        assert_eq!(stdout_json(&o)["passed"], Value::Bool(true));
    }
}

#[test]
fn run_accepts_a_path() {
    let f = write_temp(&fixture_value("order11"));
    let o = mukai(&["run", f.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("all tasks passed"));
}

#[test]
fn corrupted_map_fails_verification() {
    for name in ["genus2", "nikulin"] {
        let mut v = fixture_value(name);
        let images = v["equivalence"]["p"]["images"].as_array_mut().unwrap();
        let k = images.len() - 1;
        images[k] = Value::from("(0, 0, 3)");
        let f = write_temp(&v);
        let o = mukai(&["verify", f.path().to_str().unwrap(), "--json"]);
        assert_eq!(code(&o), 1, "{name}");
        let o = mukai(&["run", f.path().to_str().unwrap()]);
        assert_eq!(code(&o), 1, "{name}");
    }
}

#[test]
fn corrupted_claimed_adjoint_fails() {
    let mut v = fixture_value("nikulin");
    let mut q: Vec<Value> = vec![Value::from("(1, 0, 0)"); 1];
    q.extend((0..8).map(|_| Value::from("(0, 0, 0)")));
    q.push(Value::from("(0, 0, 2)"));
    v["equivalence"]["q"] = serde_json::json!({ "images": q });
    let f = write_temp(&v);
    let o = mukai(&["verify", f.path().to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 1);
    let report = stdout_json(&o);
    assert_eq!(report["passed"], Value::Bool(false));
}

#[test]
fn wrong_expectation_exits_one() {
    let mut v = fixture_value("order11");
    v["tasks"][1]["expect"]["euler_characteristic"] = Value::from(35);
    let f = write_temp(&v);
    let o = mukai(&["run", f.path().to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 1);
    let r = stdout_json(&o);
    assert_eq!(r["tasks"][1]["expectation"]["passed"], Value::Bool(false));
}

#[test]
fn invalid_input_exits_two() {
    assert_eq!(code(&mukai(&["run", "no-such-fixture"])), 2);
    assert_eq!(code(&mukai(&["euler", "1^24", "--v-square", "3"])), 2);
    assert_eq!(code(&mukai(&["fixed-locus", "genus2", "--vector", "(0, 2Z, 0)"])), 2);
    assert_eq!(code(&mukai(&["frameshape", "genus2", "--action", "missing"])), 2);
    let mut v = fixture_value("order11");
    v["lattices"]["L"]["sum"] = serde_json::json!(["U", "L"]);
    let f = write_temp(&v);
    assert_eq!(code(&mukai(&["run", f.path().to_str().unwrap()])), 2);
    let mut bad = tempfile::NamedTempFile::new().unwrap();
    bad.write_all(b"{ not json").unwrap();
    assert_eq!(code(&mukai(&["run", bad.path().to_str().unwrap()])), 2);
}

#[test]
fn group_cap_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_mukai")).args(["run", "order11"]).env("MUKAI_MAX_GROUP", "5").output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("5"));
    let o = Command::new(env!("CARGO_BIN_EXE_mukai")).args(["run", "order11"]).env("MUKAI_MAX_GROUP", "zero").output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn euler_prints_series_and_cross_check() {
    let o = mukai(&["euler", "1^8 2^8", "--v-square", "0", "--terms", "20", "--oracle", "--json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["euler_characteristic"], Value::from(8));
    assert_eq!(v["oracle"]["eigenvalue_product_agrees"], Value::Bool(true));
}

#[test]
fn fixed_locus_table_lists_classes() {
    let o = mukai(&["fixed-locus", "genus2", "--vector", "(0, H, 0)", "--table"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("29 orbits"), "{text}");
    assert!(text.contains("(ii)"));
}

#[test]
fn fiber_counts_and_oracle() {
    let o = mukai(&["fiber", "nikulin", "--vector", "(0, 0, 1)", "--orbits-under", "Gdual", "--oracle", "--json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["count"], Value::from(16));
    assert_eq!(v["orbit_count"], Value::from(8));
    assert!(v["oracle"]["skipped"].is_string());

    let small = serde_json::json!({
        "version": "1",
        "lattices": { "A": { "diagonal": [-2, -2, -4] }, "B": { "diagonal": [1] } },
        "tasks": [{ "kind": "fiber", "lattice": "A", "map": { "matrix": [[1, 1, 0]] }, "codomain": "B",
                    "target": "[0]", "min_square": -8, "expect": { "count": 9 } }]
    });
    let f = write_temp(&small);
    let o = mukai(&["run", f.path().to_str().unwrap(), "--oracle", "--json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(stdout_json(&o)["tasks"][0]["result"]["oracle"]["agrees"], Value::Bool(true));
}

#[test]
fn genericity_and_charge_subcommands() {
    let o = mukai(&["genericity", "genus2", "--lattice", "Lambda", "--omega", "H", "--beta", "1/3*H", "--vector", "(0, H, 0)", "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["generic"], Value::Bool(true));
    let o = mukai(&["charge", "genus2", "--lattice", "Lambda", "--omega", "H", "--beta", "0", "--vector", "(1, 0, -1)", "--json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["distinguished_domain"]["inside"], Value::Bool(false));
    assert_eq!(v["values"][0]["re"], serde_json::json!([2, 1]));
}

#[test]
fn oracle_subcommand_runs_cross_checks() {
    let o = mukai(&["oracle", "order11", "--json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["tasks"][1]["result"]["oracle"]["eigenvalue_product_agrees"], Value::Bool(true));
}
