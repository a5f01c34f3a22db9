//! Plain-text rendering of task results.

use mukai_core::problem::RunReport;
use serde_json::Value;

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        Value::Array(a) if a.len() == 2 && a.iter().all(Value::is_i64) => {
            let (n, d) = (a[0].as_i64().unwrap(), a[1].as_i64().unwrap());
            if d == 1 {
                n.to_string()
            } else {
                format!("{n}/{d}")
            }
        }
        other => other.to_string(),
    }
}

fn census(v: &Value) -> String {
    match v.as_object() {
        Some(m) if !m.is_empty() => m.iter().map(|(k, n)| format!("{n}x[{k}]")).collect::<Vec<_>>().join(" "),
        _ => "-".into(),
    }
}

fn fixed_locus(v: &Value) -> String {
    let mut out = format!(
        "fixed locus over {}: {} support vectors, {} orbits, dual group of order {}\n",
        scalar(&v["vector"]),
        v["support_size"],
        v["orbit_count"],
        v["dual_group_order"]
    );
    out.push_str(&format!(
        "{:<7} {:>6} {:>4} {:>6}  {:<26} {:<12} {:>6} {:>8}\n",
        "class", "square", "dim", "count", "census", "sym power", "div=1", "nsdiv=1"
    ));
    for c in v["classes"].as_array().into_iter().flatten() {
        let sym = match &c["sym_power"] {
            Value::Null => "-".to_string(),
            s => format!("{}w, w^2={}", s["multiplicity"], s["part_square"]),
        };
        out.push_str(&format!(
            "{:<7} {:>6} {:>4} {:>6}  {:<26} {:<12} {:>6} {:>8}\n",
            format!("({})", scalar(&c["label"])),
            scalar(&c["square"]),
            scalar(&c["dimension"]),
            scalar(&c["count"]),
            census(&c["census"]),
            sym,
            scalar(&c["divisibility_one"]),
            scalar(&c["ns_divisibility_one"]),
        ));
    }
    for r in v["records"].as_array().into_iter().flatten() {
        out.push_str(&format!(
            "  {}  orbit {}  square {}  {}\n",
            scalar(&r["representative"]),
            r["orbit_size"],
            scalar(&r["square"]),
            scalar(&r["stratum"])
        ));
    }
    for n in v["notes"].as_array().into_iter().flatten() {
        out.push_str(&format!("note: {}\n", scalar(n)));
    }
    out
}

fn verify(v: &Value) -> String {
    let mut out = format!(
        "equivalence data {} (invariant rank {}, image rank {}, index {})\n",
        if v["passed"] == Value::Bool(true) { "verified" } else { "FAILED" },
        v["invariant_rank"],
        v["l_rank"],
        scalar(&v["l_index"])
    );
    for c in v["checks"].as_array().into_iter().flatten() {
        let mark = if c["passed"] == Value::Bool(true) { "ok  " } else { "FAIL" };
        out.push_str(&format!("  {mark} {}\n", scalar(&c["name"])));
        for f in c["failures"].as_array().into_iter().flatten() {
            out.push_str(&format!("       {}\n", scalar(f)));
        }
    }
    out
}

fn generic(v: &Value, indent: usize, out: &mut String) {
    if let Value::Object(m) = v {
        for (k, x) in m {
            match x {
                Value::Object(_) => {
                    out.push_str(&format!("{:indent$}{k}:\n", ""));
                    generic(x, indent + 2, out);
                }
                Value::Array(a) if a.iter().any(Value::is_object) => {
                    out.push_str(&format!("{:indent$}{k}:\n", ""));
                    for (i, item) in a.iter().enumerate() {
                        out.push_str(&format!("{:w$}[{i}]\n", "", w = indent + 2));
                        generic(item, indent + 4, out);
                    }
                }
                Value::Array(a) if a.len() > 2 && a.iter().all(|e| !e.is_array()) => {
                    let items: Vec<String> = a.iter().map(scalar).collect();
                    out.push_str(&format!("{:indent$}{k}: {}\n", "", items.join(" ")));
                }
                _ => out.push_str(&format!("{:indent$}{k}: {}\n", "", scalar(x))),
            }
        }
    }
}

pub fn task(kind: &str, v: &Value) -> String {
    if let Some(e) = v.get("error") {
        return format!("  error: {}\n", scalar(e));
    }
    match kind {
        "fixed-locus" => fixed_locus(v),
        "verify" => verify(v),
        "euler" => {
            let mut out = format!("{} (degree {})\n  1/eta_g = {}\n", scalar(&v["frameshape"]), v["degree"], scalar(&v["display"]));
            if let Some(e) = v.get("euler_characteristic") {
                out.push_str(&format!("  Euler characteristic at v^2 = {}: {}\n", v["v_square"], scalar(e)));
            }
            if let Some(o) = v.get("oracle") {
                out.push_str(&format!("  product-form cross-check: {}\n", o["eigenvalue_product_agrees"]));
            }
            out
        }
        _ => {
            let mut out = String::new();
            generic(v, 2, &mut out);
            out
        }
    }
}

pub fn run_report(r: &RunReport) -> String {
    let mut out = String::new();
    if let Some(name) = &r.problem {
        out.push_str(&format!("problem {name}\n"));
    }
    for t in &r.tasks {
        let status = match (t.ok, t.expectation.checked, t.expectation.passed) {
            (false, _, _) => "FAIL",
            (true, true, true) => "pass",
            (true, true, false) => "MISMATCH",
            (true, false, _) => "done",
        };
        let time = t.millis.map(|m| format!(" [{m} ms]")).unwrap_or_default();
        out.push_str(&format!("task {} {}: {status}{time}\n", t.index, t.kind));
        for m in &t.expectation.mismatches {
            out.push_str(&format!("  expected: {m}\n"));
        }
        out.push_str(&task(&t.kind, &t.result));
    }
    out.push_str(if r.passed { "all tasks passed\n" } else { "some tasks failed\n" });
    out
}
