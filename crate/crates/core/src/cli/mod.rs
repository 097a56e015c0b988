//! Batch scenario runner.
//!
//! A run is a pure function of its [`ExperimentConfig`]: the report's JSON is
//! byte-identical across runs apart from `duration_ms`. Exit codes: `0` when
//! the observed verdict matches the scenario's certified expectation, `1`
//! when it does not, `2` on configuration errors.

mod config;
mod scenarios;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::time::Instant;

use clap::Parser;
use serde::Serialize;
use serde_json::Value;

pub use config::{
    from_map, parse_config, parse_config_text, ConfigError, ConfigFlags, ExperimentConfig,
    OutputFormat, Pairing, Scenario, SourceSpec, KEYS,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub expected: String,
    pub observed: String,
    pub matches: bool,
}

impl Verdict {
    pub fn new(expected: impl Into<String>, observed: impl Into<String>) -> Self {
        let (expected, observed) = (expected.into(), observed.into());
        Self {
            matches: expected == observed,
            expected,
            observed,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub scenario: Scenario,
    pub config: Value,
    pub result: Value,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<f64>,
    #[serde(skip)]
    pub summary: Vec<String>,
    #[serde(skip)]
    pub csv: String,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.verdict.matches {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON without the timing field.
    pub fn to_json_deterministic(&self) -> String {
        let mut r = self.clone();
        r.duration_ms = None;
        r.to_json()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario: {}", self.scenario);
        for line in &self.summary {
            let _ = writeln!(out, "  {line}");
        }
        let _ = writeln!(
            out,
            "verdict: {} (expected {}) -> {}",
            self.verdict.observed,
            self.verdict.expected,
            if self.verdict.matches {
                "ok"
            } else {
                "MISMATCH"
            }
        );
        if let Some(ms) = self.duration_ms {
            let _ = writeln!(out, "duration: {ms:.1} ms");
        }
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Text => self.to_text(),
            OutputFormat::Json => self.to_json() + "\n",
            OutputFormat::Csv => self.csv.clone(),
        }
    }
}

/// Dispatches to the configured scenario.
pub fn run(config: &ExperimentConfig) -> Result<Report, ConfigError> {
    let start = Instant::now();
    let mut report = scenarios::dispatch(config)?;
    report.duration_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    Ok(report)
}

/// Parses `args`, runs, writes the rendered report and returns the exit
/// code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let flags = match ConfigFlags::try_parse_from(args) {
        Ok(f) => f,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let config = match parse_config(&flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let text = report.render(config.format);
    match &config.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("cannot write {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{text}"),
    }
    report.exit_code()
}
