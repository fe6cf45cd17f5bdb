//! Runs scenarios and writes their reports, tables and the run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::artifact::write_atomic;
use crate::config::{load_scenarios, ConfigError, Scenario};
use crate::pipelines::{self, Context, PipelineOutput};
use crate::profile::TolProfile;

pub const DEFAULT_OUT: &str = "out";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("scenario `{id}`: {source}")]
    Pipeline { id: String, source: kleinflow_core::Error },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides every scenario's `output_dir`.
    pub out: Option<PathBuf>,
    /// Overrides every scenario's seed.
    pub seed: Option<u64>,
    pub profile: TolProfile,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub id: String,
    pub pipeline: String,
    pub seed: u64,
    pub dir: PathBuf,
    pub artifacts: Vec<String>,
    pub output: PipelineOutput,
}

fn base_dir(s: &Scenario, opts: &RunOptions) -> PathBuf {
    opts.out.clone().or_else(|| s.output_dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    write_atomic(path, bytes).map_err(|source| RunError::Io { path: path.to_path_buf(), source })
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s.into_bytes()
}

/// Runs one scenario and writes `report.json` plus one CSV per table under
/// `<out>/<id>/`. A failing pipeline still leaves a report naming the error.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<ScenarioOutcome, RunError> {
    let seed = opts.seed.unwrap_or(s.seed);
    let dir = base_dir(s, opts).join(&s.id);
    let ctx = Context { seed, profile: opts.profile };
    let mut report = json!({
        "id": s.id,
        "pipeline": s.pipeline.name(),
        "seed": seed,
        "parameters": serde_json::to_value(&s.parameters).expect("parameters serialize"),
        "tolerances": opts.profile.describe(),
    });
    match pipelines::run(s, &ctx) {
        Ok(output) => {
            let mut artifacts = Vec::new();
            for t in &output.tables {
                write(&dir.join(t.file_name()), &t.to_csv())?;
                artifacts.push(t.file_name());
            }
            let r = report.as_object_mut().expect("object");
            r.insert("passed".into(), json!(output.passed));
            r.insert("summary".into(), json!(output.summary));
            r.insert("metrics".into(), json!(output.metrics));
            r.insert("grid".into(), output.grid.clone().unwrap_or(Value::Null));
            r.insert("artifacts".into(), json!(artifacts));
            write(&dir.join("report.json"), &pretty(&report))?;
            Ok(ScenarioOutcome { id: s.id.clone(), pipeline: s.pipeline.name().into(), seed, dir, artifacts, output })
        }
        Err(source) => {
            let r = report.as_object_mut().expect("object");
            r.insert("passed".into(), json!(false));
            r.insert("error".into(), json!(source.to_string()));
            write(&dir.join("report.json"), &pretty(&report))?;
            Err(RunError::Pipeline { id: s.id.clone(), source })
        }
    }
}

/// Runs every scenario on its own thread. Results keep the input order.
pub fn run_all(scenarios: &[Scenario], opts: &RunOptions) -> Vec<Result<ScenarioOutcome, RunError>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios.iter().map(|s| scope.spawn(move || run_scenario(s, opts))).collect();
        handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
    })
}

/// Writes `manifest.json` into each output base directory. No timestamps, so
/// reruns are byte-identical.
pub fn write_manifests(
    scenarios: &[Scenario],
    results: &[Result<ScenarioOutcome, RunError>],
    opts: &RunOptions,
) -> Result<Vec<PathBuf>, RunError> {
    let mut by_dir: BTreeMap<PathBuf, Vec<Value>> = BTreeMap::new();
    for (s, r) in scenarios.iter().zip(results) {
        let entry = match r {
            Ok(o) => json!({
                "id": o.id,
                "pipeline": o.pipeline,
                "seed": o.seed,
                "passed": o.output.passed,
                "summary": o.output.summary,
                "artifacts": o.artifacts,
            }),
            Err(e) => json!({
                "id": s.id,
                "pipeline": s.pipeline.name(),
                "seed": opts.seed.unwrap_or(s.seed),
                "passed": false,
                "error": e.to_string(),
            }),
        };
        by_dir.entry(base_dir(s, opts)).or_default().push(entry);
    }
    let mut written = Vec::new();
    for (dir, entries) in by_dir {
        let manifest = json!({
            "kleinflow": env!("CARGO_PKG_VERSION"),
            "kleinflow_core": kleinflow_core::VERSION,
            "tol_profile": opts.profile.name(),
            "tolerances": opts.profile.describe(),
            "seed_override": opts.seed,
            "scenarios": entries,
        });
        let path = dir.join("manifest.json");
        write(&path, &pretty(&manifest))?;
        written.push(path);
    }
    Ok(written)
}

/// Loads, runs and records every scenario of a file.
pub fn run_file(path: &Path, opts: &RunOptions) -> Result<Vec<Result<ScenarioOutcome, RunError>>, RunError> {
    let scenarios = load_scenarios(path)?;
    let results = run_all(&scenarios, opts);
    write_manifests(&scenarios, &results, opts)?;
    Ok(results)
}
