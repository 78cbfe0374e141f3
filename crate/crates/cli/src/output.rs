//! Report envelopes, destinations and exit codes.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use bfan_core::{Error, DEFAULT_MAX_N, HARD_MAX_N};
use serde::Serialize;

use crate::Common;

pub const SCHEMA: &str = "bfan/1";

pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;

/// An error with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. }
            | Error::LengthMismatch { .. }
            | Error::DimensionTooLarge { .. }
            | Error::NotBoolean
            | Error::RangeViolation(_) => EXIT_IO,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;

pub struct Context {
    timestamp: Option<u64>,
}

impl Context {
    pub fn new(timestamp: bool) -> Self {
        let timestamp = timestamp.then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        Context { timestamp }
    }

    /// Wraps a report body with the schema tag and the optional timestamp.
    pub fn envelope<'a, T: Serialize>(&self, command: &'a str, body: &'a T) -> Envelope<'a, T> {
        Envelope {
            schema: SCHEMA,
            command,
            timestamp: self.timestamp,
            body,
        }
    }
}

#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    schema: &'static str,
    command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
    #[serde(flatten)]
    body: &'a T,
}

/// The dimension cap: `BFAN_MAX_N` if set, else the library default.
pub fn dimension_cap() -> CliResult<u32> {
    match std::env::var("BFAN_MAX_N") {
        Err(_) => Ok(DEFAULT_MAX_N),
        Ok(v) => match v.trim().parse::<u32>() {
            Ok(n) if n <= HARD_MAX_N => Ok(n),
            _ => Err(Failure::usage(format!(
                "BFAN_MAX_N must be an integer in 0..={HARD_MAX_N}, got {v:?}"
            ))),
        },
    }
}

pub fn read_input(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| Failure::io(path, e))
}

pub fn write_file(path: &Path, data: &[u8]) -> CliResult<()> {
    std::fs::write(path, data).map_err(|e| Failure::io(path, e))
}

/// Sends a finished report to `--out` or stdout.
pub fn emit(common: &Common, text: &str) -> CliResult<()> {
    match &common.out {
        Some(path) => write_file(path, text.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure {
                    code: EXIT_IO,
                    message: e.to_string(),
                })
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
