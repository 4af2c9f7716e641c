use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// One report: a header line carrying the timestamp, then a JSON body that
/// depends only on the configuration.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub result: Value,
}

impl Report {
    pub fn new(command: &'static str, config: &impl Serialize) -> Self {
        Report {
            tool: "snrw",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config: serde_json::to_value(config).expect("config serializes"),
            checks: Vec::new(),
            passed: true,
            result: Value::Null,
        }
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.passed &= passed;
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn result(mut self, value: impl Serialize) -> Self {
        self.result = serde_json::to_value(value).expect("result serializes");
        self
    }

    pub fn render(&self) -> String {
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let body = serde_json::to_string_pretty(self).expect("report serializes");
        format!("# {} {} {} generated-at={stamp}\n{body}\n", self.tool, self.version, self.command)
    }

    pub fn write(&self, out: Option<&Path>) -> Result<(), CliError> {
        let text = self.render();
        match out {
            Some(path) => fs::write(path, text)
                .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display()))),
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Internal(format!("cannot write report: {e}"))),
        }
    }
}
