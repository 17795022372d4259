use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use zlattice::document::{emit, emit_csv};
use zlattice::error::Error;
use zlattice::sequence::SequenceTable;

use crate::args::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Read { .. } | CliError::Write { .. } => 4,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

fn core_exit_code(e: &Error) -> i32 {
    match e {
        Error::SingularSymbol { .. } => 3,
        Error::EvaluatorFailure { source, .. } => match core_exit_code(source) {
            3 => 3,
            _ => 2,
        },
        Error::TruncationExceedsTolerance { .. } | Error::DivergentConvolution { .. } | Error::PointOutsideRegion => 2,
        Error::Schema(_)
        | Error::LengthMismatch { .. }
        | Error::NonFinite(_)
        | Error::SupportOutsideDomain { .. }
        | Error::InvalidEnvelope(_)
        | Error::KindMismatch(_) => 4,
        _ => 1,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Ok,
    Pass,
    Fail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Ok => "OK",
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        })
    }
}

/// What a command hands back to the dispatcher.
pub struct Outcome {
    pub status: Status,
    pub ledger: Value,
    pub result: Value,
}

impl Outcome {
    pub fn ok(ledger: Value, result: Value) -> Self {
        Outcome { status: Status::Ok, ledger, result }
    }

    pub fn exit_code(&self) -> i32 {
        if self.status == Status::Fail {
            2
        } else {
            0
        }
    }
}

#[derive(Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub threads: usize,
    pub status: Option<Status>,
    pub exit_code: i32,
    pub inputs_digest: String,
    pub outputs: Vec<String>,
    pub ledger: Value,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub timings_ms: BTreeMap<String, f64>,
}

/// Run context: input digest, written outputs and stage timings.
pub struct Context {
    pub format: Format,
    hasher: Sha256,
    outputs: Vec<String>,
    timings: BTreeMap<String, f64>,
}

impl Context {
    pub fn new(format: Format, command: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        Context { format, hasher, outputs: Vec::new(), timings: BTreeMap::new() }
    }

    /// Read an input file and fold it into the digest.
    pub fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        self.hasher.update((text.len() as u64).to_le_bytes());
        self.hasher.update(text.as_bytes());
        Ok(text)
    }

    pub fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.timings.entry(stage.to_string()).or_default() += start.elapsed().as_secs_f64() * 1e3;
        out
    }

    pub fn write_text(&mut self, path: &Path, text: &str) -> Result<(), CliError> {
        std::fs::write(path, text).map_err(|source| CliError::Write { path: path.to_path_buf(), source })?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    /// Write `table` to `path` in the configured format, or return it for the report.
    pub fn emit_table(&mut self, table: &SequenceTable, path: Option<&Path>) -> Result<Value, CliError> {
        match path {
            Some(p) => {
                let text = match self.format {
                    Format::Json => emit(table),
                    Format::Csv => emit_csv(table),
                };
                self.write_text(p, &text)?;
                Ok(Value::String(p.display().to_string()))
            }
            None => Ok(serde_json::to_value(zlattice::document::to_doc(table)).expect("sequence documents serialize")),
        }
    }

    pub fn finish(self, command: String, threads: usize, outcome: Result<Outcome, CliError>, total_ms: f64) -> RunReport {
        let inputs_digest: String = self.hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
        let mut timings = self.timings;
        timings.insert("total".into(), total_ms);
        let (status, exit_code, ledger, result, error) = match outcome {
            Ok(o) => (Some(o.status), o.exit_code(), o.ledger, o.result, None),
            Err(e) => (None, e.exit_code(), Value::Null, Value::Null, Some(e.to_string())),
        };
        RunReport {
            tool: "zlattice",
            version: env!("CARGO_PKG_VERSION"),
            command,
            threads,
            status,
            exit_code,
            inputs_digest,
            outputs: self.outputs,
            ledger,
            result,
            error,
            timings_ms: timings,
        }
    }
}
