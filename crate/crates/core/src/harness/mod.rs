//! Artifact plumbing behind the `spr` binary.
//!
//! Every command takes and returns plain values; the binary only parses flags,
//! reads and writes files, and maps errors to exit codes. All artifacts are
//! pretty-printed JSON with a trailing newline, so identical inputs give
//! byte-identical files.

mod commands;
mod config;
mod simulate;

pub use commands::{
    audit_passes, cmd_audit, cmd_build, cmd_capacity, cmd_erase, cmd_exact_build, cmd_plan,
    cmd_precode, cmd_repair_exact, cmd_repair_functional, ExactRepairReport, FeasibilityRow,
    PatternSpec, PlanReport, PrecodeReport, RepairReport,
};
pub use config::{Construction, RunConfig};
pub use simulate::{
    cmd_simulate, run_episode, simulate_csv, Episode, EpisodeRow, Simulation, SimulationSummary,
};

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::Error;
use crate::{seeded_rng, SeededRng};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SPR_OUT_DIR";

/// Errors surfaced by the harness, each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("audit failed: {0}")]
    AuditFailed(String),
    #[error("usage: {0}")]
    Usage(String),
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    /// Short machine-readable class name.
    pub fn class(&self) -> &'static str {
        match self {
            HarnessError::Io { .. } => "io",
            HarnessError::Schema { .. } => "schema",
            HarnessError::AuditFailed(_) => "audit",
            HarnessError::Usage(_) => "usage",
            HarnessError::Core(e) => match e {
                Error::InvalidConfig(_)
                | Error::Dimension(_)
                | Error::InvalidPartition(_)
                | Error::MissingPayload => "invalid-input",
                Error::InvalidPattern(_) | Error::Infeasible | Error::Unrecoverable { .. } => {
                    "infeasible"
                }
                Error::NotPrime(_)
                | Error::FieldTooSmall { .. }
                | Error::BoundOverflow { .. }
                | Error::DivisionByZero { .. } => "field",
                Error::Singular { .. }
                | Error::ConstructionFailed { .. }
                | Error::RepairFailed { .. } => "construction",
                Error::SearchExhausted { .. } => "search-exhausted",
                Error::SearchSpaceTooLarge(_) => "too-large",
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.class() {
            "usage" => 2,
            "io" => 3,
            "schema" => 4,
            "invalid-input" => 5,
            "infeasible" => 6,
            "field" => 7,
            "construction" => 8,
            "search-exhausted" => 9,
            "too-large" => 10,
            "audit" => 11,
            _ => 1,
        }
    }

    /// Structured record written to stderr on failure.
    pub fn record(&self) -> ErrorRecord {
        ErrorRecord {
            schema_version: crate::SCHEMA_VERSION,
            error: self.class().into(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct ErrorRecord {
    pub schema_version: u32,
    pub error: String,
    pub exit_code: i32,
    pub message: String,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifacts serialize");
    s.push('\n');
    s
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> HarnessResult<T> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.into(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| {
        // Validation errors from `try_from` come back wrapped by serde.
        HarnessError::Schema {
            path: path.into(),
            message: e.to_string(),
        }
    })
}

pub fn write_text(path: &Path, text: &str) -> HarnessResult<()> {
    let io = |e: std::io::Error| HarnessError::Io {
        path: path.into(),
        message: e.to_string(),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, text).map_err(io)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> HarnessResult<()> {
    write_text(path, &to_json(value))
}

/// Independent generator for sub-task `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SeededRng {
    let mut rng = seeded_rng(seed);
    rng.set_stream(stream);
    rng
}

/// Seed for sub-task `stream`, drawn from [`stream_rng`].
pub fn stream_seed(seed: u64, stream: u64) -> u64 {
    use rand::RngCore;
    stream_rng(seed, stream).next_u64()
}
