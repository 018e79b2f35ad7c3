use std::path::{Path, PathBuf};

use qfock::fock::{check_q, DEFAULT_ORACLE_LIMIT};
use qfock::RepresentationSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_TRUNCATION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Residual bound for operator and Gram identities.
    pub identity_tol: f64,
    /// Relation tolerance of the type classifier.
    pub class_tol: f64,
    /// Largest degree handed to the permutation-sum Gram oracle.
    pub oracle_limit: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity_tol: 1e-10,
            class_tol: 1e-9,
            oracle_limit: DEFAULT_ORACLE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub spec: RepresentationSpec,
    pub q: f64,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub report_path: Option<PathBuf>,
}

fn default_truncation() -> usize {
    DEFAULT_TRUNCATION
}

impl RunConfig {
    pub fn new(spec: RepresentationSpec, q: f64, truncation: usize) -> Self {
        Self {
            spec,
            q,
            truncation,
            tolerances: Tolerances::default(),
            seed: 0,
            report_path: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("parse error: {e}")))?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        check_q(self.q).map_err(|e| CliError::Config(e.to_string()))?;
        self.spec
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.truncation < 2 {
            return Err(CliError::Config(format!(
                "truncation must be at least 2, got {}",
                self.truncation
            )));
        }
        let t = &self.tolerances;
        if !(t.identity_tol > 0.0 && t.class_tol > 0.0 && t.oracle_limit > 0) {
            return Err(CliError::Config("tolerances must be positive".into()));
        }
        Ok(())
    }
}
