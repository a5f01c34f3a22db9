//! Browser bindings. Each export takes plain strings and returns a JSON
//! document; errors come back as a JSON object with an `error` field so the
//! page can show them without exception handling.

use mukai_core::problem::{self, ProblemFile, RunOptions, TaskSpec};
use mukai_core::stability::SplittingMode;
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

const MAX_TERMS: usize = 400;

fn run_task(fixture: &str, task: TaskSpec) -> Result<Value, String> {
    let src = problem::fixture_source(fixture).map_err(|e| e.to_string())?;
    let p = ProblemFile::from_json(src).map_err(|e| e.to_string())?;
    let ctx = p.validate(&RunOptions::default()).map_err(|e| e.to_string())?;
    problem::execute(&ctx, &task).map(|(v, _)| v).map_err(|e| e.to_string())
}

fn wrap(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

pub fn euler_series_json(frameshape: &str, terms: usize, v_square: Option<i64>) -> Result<Value, String> {
    if terms == 0 || terms > MAX_TERMS {
        return Err(format!("terms must lie between 1 and {MAX_TERMS}"));
    }
    let p = ProblemFile::from_json(r#"{"version":"1"}"#).map_err(|e| e.to_string())?;
    let ctx = p.validate(&RunOptions { oracle: true, ..RunOptions::default() }).map_err(|e| e.to_string())?;
    let task = TaskSpec::Euler { frameshape: frameshape.to_string(), terms: Some(terms), v_square, expect: None };
    problem::execute(&ctx, &task).map(|(v, _)| v).map_err(|e| e.to_string())
}

pub fn fixed_locus_json(fixture: &str, vector: &str) -> Result<Value, String> {
    run_task(fixture, TaskSpec::FixedLocus { vector: vector.to_string(), records: false, expect: None })
}

pub fn charge_json(fixture: &str, lattice: &str, omega: &str, beta: &str, vector: &str, all_classes: bool) -> Result<Value, String> {
    let charge = run_task(
        fixture,
        TaskSpec::Charge {
            lattice: lattice.into(),
            omega: omega.into(),
            beta: beta.into(),
            vectors: vec![vector.into()],
            action: None,
            expect: None,
        },
    )?;
    let mode = if all_classes { SplittingMode::AllClasses } else { SplittingMode::Effective };
    let genericity = run_task(
        fixture,
        TaskSpec::Genericity {
            lattice: lattice.into(),
            omega: omega.into(),
            beta: beta.into(),
            vector: vector.into(),
            action: None,
            mode,
            expect: None,
        },
    )?;
    Ok(json!({ "charge": charge, "genericity": genericity }))
}

/// `v_square` is ignored when it is not an even integer string.
#[wasm_bindgen]
pub fn euler_series(frameshape: &str, terms: usize, v_square: &str) -> String {
    let v = v_square.trim().parse::<i64>().ok();
    wrap(euler_series_json(frameshape, terms, v))
}

#[wasm_bindgen]
pub fn fixed_locus_profile(fixture: &str, vector: &str) -> String {
    wrap(fixed_locus_json(fixture, vector))
}

#[wasm_bindgen]
pub fn charge_report(fixture: &str, lattice: &str, omega: &str, beta: &str, vector: &str, all_classes: bool) -> String {
    wrap(charge_json(fixture, lattice, omega, beta, vector, all_classes))
}

#[wasm_bindgen]
pub fn fixture_list() -> String {
    json!(problem::fixture_names()).to_string()
}
