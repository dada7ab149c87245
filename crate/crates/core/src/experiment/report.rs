use serde::Serialize;

use super::ExperimentConfig;

pub const SCHEMA_VERSION: &str = "converse-report/1";

/// Common behavior of every report body.
pub trait Report: Serialize {
    fn kind(&self) -> &'static str;
    /// Whether the report records a clean run (drives the exit status).
    fn passed(&self) -> bool;
    fn text(&self) -> String;
    fn csv(&self) -> Option<String> {
        None
    }
}

/// Versioned wrapper written as the structured report.
#[derive(Serialize)]
pub struct Envelope<'a, R: Serialize> {
    pub schema: &'static str,
    pub kind: &'static str,
    pub config: &'a ExperimentConfig,
    pub passed: bool,
    pub body: &'a R,
}

impl<'a, R: Report> Envelope<'a, R> {
    pub fn new(config: &'a ExperimentConfig, body: &'a R) -> Self {
        Envelope { schema: SCHEMA_VERSION, kind: body.kind(), config, passed: body.passed(), body }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}
