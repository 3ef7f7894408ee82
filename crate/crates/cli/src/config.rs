use std::fs;
use std::path::{Path, PathBuf};

use idescope_models::{Catalog, Instance, StateBox};
use idescope_setdyn::{Sampling, SetDescriptor};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::{schema, CliResult};

/// One experiment: a model, a task and where to write the results.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Root of every random stream; required by sampling tasks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub model: ModelSection,
    /// Nyström settings merged into the model parameters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<Value>,
    pub task: TaskSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub name: String,
    #[serde(default)]
    pub params: Value,
}

impl ModelSection {
    pub fn instantiate(&self, catalog: &Catalog, quadrature: Option<&Value>) -> CliResult<Instance> {
        let mut params = self.params.clone();
        if let Some(q) = quadrature {
            match &mut params {
                Value::Null => params = serde_json::json!({ "quadrature": q }),
                Value::Object(m) => {
                    if m.contains_key("quadrature") {
                        return Err(schema("quadrature given both as a section and as a model parameter"));
                    }
                    m.insert("quadrature".into(), q.clone());
                }
                _ => return Err(schema("model.params must be a table")),
            }
        }
        catalog
            .instantiate(&self.name, &params)
            .map_err(|e| schema(e.to_string()))
    }
}

/// `kind` selects a registered task; the remaining keys are that task's parameters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TaskSection {
    pub kind: String,
    #[serde(flatten)]
    pub params: Map<String, Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Per-fibre CSV files next to the report.
    pub fibre_csv: bool,
    /// Full clouds inside the report JSON; intervals and traces are always written.
    pub fibres_in_report: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            fibre_csv: true,
            fibres_in_report: true,
        }
    }
}

impl ExperimentConfig {
    /// TOML by default; `.json` files are read as JSON.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| schema(format!("cannot read {}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        Self::parse(&text, is_json)
    }

    pub fn parse(text: &str, json: bool) -> CliResult<Self> {
        if json {
            serde_json::from_str(text).map_err(|e| schema(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| schema(e.to_string()))
        }
    }

    pub fn require_seed(&self) -> CliResult<u64> {
        self.seed.ok_or_else(|| {
            schema(format!(
                "task `{}` samples sets and needs a top-level seed",
                self.task.kind
            ))
        })
    }
}

/// Decode a parameter table into a task's typed parameters.
pub fn decode<T: DeserializeOwned>(what: &str, params: &Map<String, Value>) -> CliResult<T> {
    serde_json::from_value(Value::Object(params.clone())).map_err(|e| schema(format!("{what}: {e}")))
}

pub fn positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(schema(format!("{name} = {v} must be positive")))
    }
}

/// An explicit list of times or an inclusive range.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Times {
    List(Vec<i64>),
    Range {
        start: i64,
        end: i64,
        #[serde(default = "one")]
        step: u64,
    },
}

fn one() -> u64 {
    1
}

impl Times {
    pub fn values(&self) -> CliResult<Vec<i64>> {
        let v = match self {
            Times::List(v) => v.clone(),
            Times::Range { start, end, step } => {
                if *step == 0 || end < start {
                    return Err(schema(format!("time range {start}..={end} step {step} is empty")));
                }
                (*start..=*end).step_by(*step as usize).collect()
            }
        };
        if v.is_empty() {
            return Err(schema("empty time list"));
        }
        Ok(v)
    }
}

/// A scalar broadcast to every coordinate, or an explicit vector.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Vector {
    Scalar(f64),
    Values(Vec<f64>),
}

impl Vector {
    pub fn expand(&self, dim: usize) -> CliResult<Vec<f64>> {
        match self {
            Vector::Scalar(v) => Ok(vec![*v; dim]),
            Vector::Values(v) if v.len() == dim => Ok(v.clone()),
            Vector::Values(v) => Err(schema(format!(
                "vector of length {} given for dimension {dim}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub lo: Vector,
    pub hi: Vector,
}

/// The source family A (constant in time): the override if given, else the model's default box.
pub fn source_descriptor(instance: &Instance, spec: Option<&SourceSpec>) -> CliResult<SetDescriptor> {
    let dim = instance.model.dimension();
    let b = match spec {
        Some(s) => StateBox {
            lo: s.lo.expand(dim)?,
            hi: s.hi.expand(dim)?,
        },
        None => instance.source.clone().ok_or_else(|| {
            schema(format!(
                "model `{}` has no default source set; give `source`",
                instance.model.id()
            ))
        })?,
    };
    let desc = if dim == 1 {
        SetDescriptor::Interval {
            lo: b.lo[0],
            hi: b.hi[0],
        }
    } else {
        SetDescriptor::Box { lo: b.lo, hi: b.hi }
    };
    Ok(desc)
}

/// How source sets are discretized; exactly one of `resolution` and `count`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    pub resolution: Option<f64>,
    pub count: Option<usize>,
}

impl SamplingSpec {
    pub fn build(&self, seed: u64) -> CliResult<Sampling> {
        match (self.resolution, self.count) {
            (Some(r), None) => {
                positive("sampling.resolution", r)?;
                Ok(Sampling::Grid { resolution: r, seed })
            }
            (None, Some(c)) if c > 0 => Ok(Sampling::Random { count: c, seed }),
            _ => Err(schema(
                "sampling needs exactly one of `resolution` or a positive `count`",
            )),
        }
    }
}
