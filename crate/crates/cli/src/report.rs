use std::io::Write;

use brl_core::Error;
use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: &str = concat!("brl/1 (", env!("CARGO_PKG_VERSION"), ")");

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub outputs: Value,
    pub wall_time_ms: u64,
    pub version: &'static str,
}

/// A failed command, printed as a JSON error object.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub command: String,
    pub inputs: Value,
    pub error: Value,
    pub version: &'static str,
}

impl ErrorReport {
    pub fn new(command: &str, inputs: Value, err: &Error) -> Self {
        Self {
            command: command.to_string(),
            inputs,
            error: json!({ "kind": err.kind(), "message": err.to_string() }),
            version: SCHEMA_VERSION,
        }
    }
}

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok = 0,
    CheckFailed = 1,
    InputError = 2,
    NumericalFailure = 3,
}

impl Status {
    pub fn of_error(err: &Error) -> Self {
        if err.is_input_error() {
            Status::InputError
        } else {
            Status::NumericalFailure
        }
    }
}

/// One evaluated point: a report or an error, plus its exit status.
pub enum Line {
    Report(RunReport, Status),
    Error(ErrorReport, Status),
}

impl Line {
    pub fn status(&self) -> Status {
        match self {
            Line::Report(_, s) | Line::Error(_, s) => *s,
        }
    }

    pub fn emit(&self, json_mode: bool) -> std::io::Result<()> {
        let stdout = std::io::stdout();
        let mut out = stdout.lock();
        match (self, json_mode) {
            (Line::Report(r, _), true) => writeln!(out, "{}", serde_json::to_string(r)?),
            (Line::Report(r, _), false) => writeln!(out, "{}", serde_json::to_string_pretty(r)?),
            (Line::Error(e, _), true) => writeln!(out, "{}", serde_json::to_string(e)?),
            (Line::Error(e, _), false) => {
                let kind = e.error["kind"].as_str().unwrap_or_default();
                let msg = e.error["message"].as_str().unwrap_or_default();
                writeln!(std::io::stderr(), "error [{kind}]: {msg}")
            }
        }
    }
}
