//! Batch driver for the q-Fock laboratory: configuration, verification
//! suites, analysis commands and report rendering.

pub mod commands;
pub mod config;
pub mod json;
pub mod render;
pub mod report;

pub use commands::{
    cmd_centralizer, cmd_classify, cmd_mixing, cmd_moments, cmd_verify, parse_word,
};
pub use config::{RunConfig, Tolerances};
pub use report::{Report, Status, SuiteResult, SCHEMA_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qfock::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status for the error.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Exit status for a finished report: 0 when every suite passed or was
/// skipped, 1 otherwise.
pub fn report_exit_code(report: &Report) -> i32 {
    if report.passed() {
        0
    } else {
        1
    }
}
