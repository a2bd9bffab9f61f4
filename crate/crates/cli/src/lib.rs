//! Experiment harness around the core library: config parsing, sweep
//! execution, and CSV/SVG emission. The binary in `main.rs` is a thin
//! dispatcher over these modules.

pub mod config;
pub mod emit;
pub mod runner;

use std::fmt;

/// Run-level failures, each mapped to a process exit code. Per-point
/// failures never surface here; they are recorded in the result rows.
#[derive(Debug)]
pub enum HarnessError {
    /// Bad config, bad flags, bad parameters: exit 1.
    Config(String),
    /// The run completed but produced no usable numbers: exit 2.
    Numerical(String),
    /// Filesystem trouble writing outputs: exit 3.
    Io(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Numerical(_) => 2,
            HarnessError::Io(_) => 3,
        }
    }
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Config(m) => write!(f, "config error: {m}"),
            HarnessError::Numerical(m) => write!(f, "numerical error: {m}"),
            HarnessError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<config::ConfigError> for HarnessError {
    fn from(e: config::ConfigError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}
