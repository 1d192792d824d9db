//! Run reports, written as one JSON object per line.
//!
//! Every report carries the same keys; fields that do not apply to a command
//! are `null` or empty:
//!
//! | key | type | meaning |
//! |-----|------|---------|
//! | `command` | string | subcommand name |
//! | `argv` | string array | arguments after the program name |
//! | `params` | object | resolved parameters, defaults included |
//! | `steps` | integer or null | filter steps taken |
//! | `iterates` | integer or null | iterates recorded, `v₀` included |
//! | `stop_reason` | string or null | `tolerance` or `max_iterations` |
//! | `j_trace` | number array | functional value per iterate |
//! | `timings_ms` | object | wall milliseconds per phase |
//! | `kernel_evaluations` | integer | kernel evaluations performed |
//! | `outputs` | string array | files written |
//! | `metrics` | object | command-specific numbers |

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, Serialize)]
pub struct RunReport {
    pub command: String,
    pub argv: Vec<String>,
    pub params: BTreeMap<String, Value>,
    pub steps: Option<usize>,
    pub iterates: Option<usize>,
    pub stop_reason: Option<String>,
    pub j_trace: Vec<f64>,
    pub timings_ms: BTreeMap<String, f64>,
    pub kernel_evaluations: u64,
    pub outputs: Vec<String>,
    pub metrics: BTreeMap<String, Value>,
}

impl RunReport {
    pub fn new(command: &str, argv: &[String]) -> Self {
        Self {
            command: command.to_string(),
            argv: argv.to_vec(),
            ..Self::default()
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.params.insert(key.to_string(), value.into());
    }

    pub fn metric(&mut self, key: &str, value: impl Into<Value>) {
        self.metrics.insert(key.to_string(), value.into());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Runs `f`, adding its wall time under `phase`.
    pub fn timed<R>(&mut self, phase: &str, f: impl FnOnce() -> R) -> R {
        let start = Instant::now();
        let r = f();
        *self.timings_ms.entry(phase.to_string()).or_insert(0.0) += start.elapsed().as_secs_f64() * 1e3;
        r
    }

    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)? + "\n")
    }

    pub fn append_to(&self, path: &Path) -> Result<()> {
        let line = self.to_json_line()?;
        OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .and_then(|mut f| f.write_all(line.as_bytes()))
            .map_err(|e| CliError::io(path, e))
    }
}
