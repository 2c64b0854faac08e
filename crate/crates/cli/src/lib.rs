//! Experiment runner behind the `symplab` binary.

pub mod config;
pub mod error;
pub mod experiments;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

pub use config::{load_config, parse_config_text, split_pair, Params};
pub use error::CliError;
pub use experiments::{find_experiment, list_experiments, Check, EXPERIMENTS};

pub const TOOL: &str = "symplab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

/// Contents of `report.json`. Wall-clock time is written to `timing.json`
/// so that the report itself is reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: String,
    pub config: BTreeMap<String, String>,
    pub tolerances: BTreeMap<String, String>,
    pub results: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub artifacts: Vec<String>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

/// Resolves the configuration, runs the experiment and writes
/// `report.json`, `timing.json` and the experiment's artifacts into `out`.
pub fn run(experiment: &str, given: &BTreeMap<String, String>, out: &Path) -> Result<ExperimentReport, CliError> {
    let exp = find_experiment(experiment).ok_or_else(|| CliError::UnknownExperiment(experiment.to_string()))?;
    let params = Params::resolve(exp.name, exp.keys, given)?;
    let job = (exp.prepare)(&params)?;
    fs::create_dir_all(out)?;

    let start = Instant::now();
    let outcome = job()?;
    let elapsed = start.elapsed().as_secs_f64();

    let tolerances = exp
        .tolerances
        .iter()
        .map(|k| (k.to_string(), params.values()[*k].clone()))
        .collect();
    let report = ExperimentReport {
        tool: TOOL,
        version: VERSION,
        experiment: exp.name.to_string(),
        config: params.values().clone(),
        tolerances,
        passed: outcome.checks.iter().all(|c| c.passed),
        checks: outcome.checks,
        results: outcome.results,
        artifacts: outcome.artifacts.iter().map(|(name, _)| name.clone()).collect(),
    };
    for (name, body) in &outcome.artifacts {
        fs::write(out.join(name), body)?;
    }
    fs::write(out.join("report.json"), report.to_json())?;
    let timing = serde_json::json!({ "experiment": exp.name, "wall_clock_s": elapsed });
    fs::write(
        out.join("timing.json"),
        serde_json::to_string_pretty(&timing).expect("timing serializes") + "\n",
    )?;
    Ok(report)
}
