use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use slconvex_core::{AnalysisConfig, ConvexityReport, CounterexampleReport};

use crate::source::EnergyDescriptor;

pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

/// Self-contained output of `analyze` and `counterexample`. Everything
/// except `timing` is a function of the energy and the echoed config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub tool_version: String,
    pub command: String,
    pub energy: EnergyDescriptor,
    pub config: AnalysisConfig,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub report: Option<ConvexityReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counterexample: Option<CounterexampleReport>,
    pub exit_code: i32,
    pub timing: Timing,
}

impl ReportDocument {
    pub fn new(command: &str, energy: EnergyDescriptor, config: AnalysisConfig) -> Self {
        ReportDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            energy,
            config,
            report: None,
            counterexample: None,
            exit_code: 0,
            timing: Timing { elapsed_seconds: 0.0 },
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}
