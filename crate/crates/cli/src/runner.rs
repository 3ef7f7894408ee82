use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use idescope_models::Catalog;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::json::to_canonical_string;
use crate::tasks::{Context, TaskRegistry};
use crate::{CliError, CliResult, ExperimentConfig};

pub const REPORT_FILE: &str = "report.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskStatus {
    pub name: String,
    pub converged: bool,
    pub passed: bool,
}

/// Provenance of a run. Everything except the wall time is a function of the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub version: String,
    pub wall_time_s: f64,
    pub tasks: Vec<TaskStatus>,
    pub outputs: Vec<OutputFile>,
}

impl RunManifest {
    pub fn converged(&self) -> bool {
        self.tasks.iter().all(|t| t.converged)
    }

    pub fn passed(&self) -> bool {
        self.tasks.iter().all(|t| t.passed)
    }

    /// The error a CLI run reports for this manifest, if any.
    pub fn status(&self) -> CliResult<()> {
        if !self.converged() {
            let names: Vec<_> = self
                .tasks
                .iter()
                .filter(|t| !t.converged)
                .map(|t| t.name.as_str())
                .collect();
            return Err(CliError::NonConvergence(format!(
                "{} did not meet its tolerance; partial results written",
                names.join(", ")
            )));
        }
        if !self.passed() {
            return Err(CliError::Failed("check failed".into()));
        }
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Runs the configured task and writes the report, plot data and manifest to `out_dir`
/// (the config's `output.dir` when None). Non-convergence still writes everything.
pub fn run(config: &ExperimentConfig, out_dir: Option<&Path>) -> CliResult<RunManifest> {
    let started = Instant::now();
    let catalog = Catalog::builtin();
    let tasks = TaskRegistry::builtin();
    let task = tasks.get(&config.task.kind)?;
    let instance = config.model.instantiate(&catalog, config.quadrature.as_ref())?;
    let ctx = Context {
        config,
        instance: &instance,
        catalog: &catalog,
    };
    let out = task.run(&ctx, &config.task.params)?;

    let dir: PathBuf = out_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| config.output.dir.clone());
    fs::create_dir_all(&dir)?;
    let mut report = out.report;
    if let Value::Object(m) = &mut report {
        if let Some(name) = &config.name {
            m.insert("name".into(), json!(name));
        }
        if let Some(seed) = config.seed {
            m.insert("seed".into(), json!(seed));
        }
    }
    let mut files = vec![(REPORT_FILE.to_string(), to_canonical_string(&report))];
    files.extend(out.files);
    files.sort_by(|a, b| a.0.cmp(&b.0));
    let mut outputs = Vec::with_capacity(files.len());
    for (name, contents) in &files {
        fs::write(dir.join(name), contents)?;
        outputs.push(OutputFile {
            path: name.clone(),
            sha256: sha256_hex(contents.as_bytes()),
            bytes: contents.len() as u64,
        });
    }
    let config_json = serde_json::to_value(config).map_err(|e| CliError::Failed(e.to_string()))?;
    let manifest = RunManifest {
        config_hash: sha256_hex(to_canonical_string(&config_json).as_bytes()),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: started.elapsed().as_secs_f64(),
        tasks: vec![TaskStatus {
            name: task.name().to_string(),
            converged: out.converged,
            passed: out.passed,
        }],
        outputs,
    };
    let manifest_json = serde_json::to_value(&manifest).map_err(|e| CliError::Failed(e.to_string()))?;
    fs::write(dir.join(MANIFEST_FILE), to_canonical_string(&manifest_json))?;
    Ok(manifest)
}
