use std::collections::BTreeMap;
use std::io::{self, Write};

use idescope_process::fmt_f64;
use serde_json::{json, Map, Value};

use crate::cloud::{FiberCloud, MERGE_TOL};
use crate::limits::Trace;

/// Collected results of a limit-set computation.
#[derive(Debug, Clone, Default)]
pub struct LimitSetReport {
    pub model: String,
    pub params: Value,
    /// Ω_A(τ) per τ.
    pub fibres: BTreeMap<i64, FiberCloud>,
    pub attractor_fibers: BTreeMap<i64, FiberCloud>,
    pub omega_minus: Option<FiberCloud>,
    pub omega_plus: Option<FiberCloud>,
    pub omega_star: Option<FiberCloud>,
    pub traces: BTreeMap<String, Trace>,
    pub verdicts: BTreeMap<String, bool>,
    pub extra: Map<String, Value>,
}

fn num(v: f64) -> Value {
    // non-finite distances (empty fibres) have no JSON number
    if v.is_finite() {
        json!(v)
    } else {
        json!(if v > 0.0 { "inf" } else { "nan" })
    }
}

pub fn cloud_json(c: &FiberCloud) -> Value {
    Value::Array(
        c.points()
            .iter()
            .map(|p| Value::Array(p.iter().map(|v| num(*v)).collect()))
            .collect(),
    )
}

pub fn trace_json(t: &Trace) -> Value {
    Value::Array(t.entries.iter().map(|(s, d)| json!([s, num(*d)])).collect())
}

impl LimitSetReport {
    pub fn new(model: impl Into<String>, params: Value) -> Self {
        Self {
            model: model.into(),
            params,
            ..Default::default()
        }
    }

    pub fn add_trace(&mut self, name: impl Into<String>, trace: Trace) {
        self.traces.insert(name.into(), trace);
    }

    /// Convergence flag of every trace.
    pub fn converged(&self) -> BTreeMap<String, bool> {
        self.traces.iter().map(|(k, t)| (k.clone(), t.converged)).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.traces.values().all(|t| t.converged)
    }

    pub fn to_json(&self) -> Value {
        let fibre_map = |m: &BTreeMap<i64, FiberCloud>| -> Value {
            Value::Object(m.iter().map(|(t, c)| (t.to_string(), cloud_json(c))).collect())
        };
        let mut fibres = Map::new();
        fibres.insert("omega_a".into(), fibre_map(&self.fibres));
        fibres.insert("attractor".into(), fibre_map(&self.attractor_fibers));
        let mut intervals = Map::new();
        let mut resolution = Map::new();
        for (name, c) in [
            ("omega_minus", &self.omega_minus),
            ("omega_plus", &self.omega_plus),
            ("omega_star", &self.omega_star),
        ] {
            if let Some(c) = c {
                fibres.insert(name.into(), cloud_json(c));
                resolution.insert(name.into(), num(c.resolution));
                if let Some((lo, hi)) = c.hull() {
                    intervals.insert(name.into(), json!([num(lo), num(hi)]));
                }
            }
        }
        let traces: Map<String, Value> = self.traces.iter().map(|(k, t)| (k.clone(), trace_json(t))).collect();
        let tolerances: Map<String, Value> = self.traces.iter().map(|(k, t)| (k.clone(), num(t.tol))).collect();
        let mut doc = json!({
            "model": self.model,
            "params": self.params,
            "fibres": fibres,
            "intervals": intervals,
            "traces": traces,
            "tolerances": tolerances,
            "resolution": resolution,
            "verdicts": self.verdicts,
            "converged": self.converged(),
            "metadata": {
                "merge_tol": MERGE_TOL,
                "compact_attracting_set": "implicit: discretized images are finite-dimensional",
            },
        });
        if !self.extra.is_empty() {
            doc["extra"] = Value::Object(self.extra.clone());
        }
        doc
    }
}

/// Per-fibre CSV. With `nodes`, each point is a function sampled on the nodes and rows
/// are `x,u`, one block per function; otherwise rows are `index,value`.
pub fn write_cloud_csv<W: Write>(cloud: &FiberCloud, nodes: Option<&[f64]>, mut w: W) -> io::Result<()> {
    match nodes {
        Some(xs) => {
            writeln!(w, "x,u")?;
            for p in cloud.points() {
                for (x, u) in xs.iter().zip(p) {
                    writeln!(w, "{},{}", fmt_f64(*x), fmt_f64(*u))?;
                }
            }
        }
        None => {
            let d = cloud.dim();
            if d <= 1 {
                writeln!(w, "index,value")?;
            } else {
                let cols: Vec<String> = (0..d).map(|k| format!("value_{k}")).collect();
                writeln!(w, "index,{}", cols.join(","))?;
            }
            for (i, p) in cloud.points().iter().enumerate() {
                let vals: Vec<String> = p.iter().map(|v| fmt_f64(*v)).collect();
                writeln!(w, "{i},{}", vals.join(","))?;
            }
        }
    }
    Ok(())
}

pub fn write_trace_csv<W: Write>(entries: &[(i64, f64)], mut w: W) -> io::Result<()> {
    writeln!(w, "s,dist")?;
    for (s, d) in entries {
        writeln!(w, "{s},{}", fmt_f64(*d))?;
    }
    Ok(())
}
