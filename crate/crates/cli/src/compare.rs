use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::{schema, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDiff {
    pub path: String,
    pub abs: f64,
    pub rel: f64,
    pub ok: bool,
}

/// Per-field comparison of a report against a golden file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiffSummary {
    pub entries: Vec<FieldDiff>,
    /// Golden fields absent from the report or of a different kind.
    pub missing: Vec<String>,
}

impl DiffSummary {
    pub fn passed(&self) -> bool {
        self.missing.is_empty() && self.entries.iter().all(|e| e.ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &FieldDiff> {
        self.entries.iter().filter(|e| !e.ok)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            s.push_str(&format!(
                "{} {}  abs={:.3e} rel={:.3e}\n",
                if e.ok { "ok  " } else { "FAIL" },
                e.path,
                e.abs,
                e.rel
            ));
        }
        for m in &self.missing {
            s.push_str(&format!("MISS {m}\n"));
        }
        s
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

/// Walks the golden document; every golden leaf must exist in the report. Numbers pass when
/// the absolute difference is at most `tol`, other leaves when equal.
pub fn compare_golden(report: &Value, golden: &Value, tol: f64) -> DiffSummary {
    let mut out = DiffSummary::default();
    walk(report, golden, String::new(), tol, &mut out);
    out
}

fn walk(r: &Value, g: &Value, path: String, tol: f64, out: &mut DiffSummary) {
    match (g, r) {
        (Value::Object(gm), Value::Object(rm)) => {
            for (k, gv) in gm {
                match rm.get(k) {
                    Some(rv) => walk(rv, gv, join(&path, k), tol, out),
                    None => out.missing.push(join(&path, k)),
                }
            }
        }
        (Value::Array(ga), Value::Array(ra)) => {
            for (i, gv) in ga.iter().enumerate() {
                let p = format!("{path}[{i}]");
                match ra.get(i) {
                    Some(rv) => walk(rv, gv, p, tol, out),
                    None => out.missing.push(p),
                }
            }
        }
        (Value::Number(gn), Value::Number(rn)) => {
            let (a, b) = (gn.as_f64().unwrap_or(f64::NAN), rn.as_f64().unwrap_or(f64::NAN));
            let abs = (a - b).abs();
            let rel = if a == 0.0 { abs } else { abs / a.abs() };
            out.entries.push(FieldDiff {
                path,
                abs,
                rel,
                ok: abs <= tol,
            });
        }
        (Value::Object(_) | Value::Array(_) | Value::Number(_), _) => out.missing.push(path),
        (g, r) => {
            let ok = g == r;
            out.entries.push(FieldDiff {
                path,
                abs: if ok { 0.0 } else { f64::INFINITY },
                rel: if ok { 0.0 } else { f64::INFINITY },
                ok,
            });
        }
    }
}

fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| schema(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| schema(format!("{}: {e}", path.display())))
}

pub fn compare_files(report: &Path, golden: &Path, tol: f64) -> CliResult<DiffSummary> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(schema(format!("tol = {tol} must be finite and ≥ 0")));
    }
    Ok(compare_golden(&read_json(report)?, &read_json(golden)?, tol))
}
