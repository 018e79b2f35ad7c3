use qfock::spectral::TypeVerdict;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    /// The identity or statement the suite exercises.
    pub anchor: String,
    pub status: Status,
    pub max_residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl SuiteResult {
    pub fn residual(name: &str, anchor: &str, residual: f64, tol: f64, detail: String) -> Self {
        let status = if residual <= tol {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            name: name.into(),
            anchor: anchor.into(),
            status,
            max_residual: Some(residual),
            tolerance: Some(tol),
            detail,
        }
    }

    pub fn exact(name: &str, anchor: &str, ok: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            max_residual: None,
            tolerance: None,
            detail,
        }
    }

    pub fn skipped(name: &str, anchor: &str, detail: String) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            status: Status::Skipped,
            max_residual: None,
            tolerance: None,
            detail,
        }
    }

    pub fn failed(name: &str, anchor: &str, detail: String) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            status: Status::Fail,
            max_residual: None,
            tolerance: None,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditioningRow {
    pub degree: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub condition_number: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub n: usize,
    /// Coefficients of `q^0, q^1, ...` from the pair-partition enumeration.
    pub coefficients: Vec<u64>,
    pub combinatorial: f64,
    /// `<Ω, s_q(ξ)^n Ω>_q`, absent beyond the valid degrees.
    pub operator: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralizerRow {
    pub degree: usize,
    pub count: usize,
    pub fixed_subspace_dimension: usize,
    pub words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingSection {
    pub xi0: String,
    pub x: String,
    pub y: String,
    pub max_n: usize,
    /// `Re T_{nn}` for `n ≤ max_n`.
    pub t_diagonal: Vec<f64>,
    /// `a_n = Σ_m |T_{mn}|^2`.
    pub hs_terms: Vec<f64>,
    pub hs_partial_sums: Vec<f64>,
    pub ratio: Option<f64>,
    /// `‖E(x ĥ_n y)‖_2`, when both expectations vanish.
    pub decay: Option<Vec<f64>>,
    /// Principal-angle intersection dimension against the other fixed letters.
    pub intersections: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    #[serde(default)]
    pub conditioning: Vec<ConditioningRow>,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(default)]
    pub moments: Option<Vec<MomentRow>>,
    #[serde(default)]
    pub centralizer: Option<Vec<CentralizerRow>>,
    #[serde(default)]
    pub verdict: Option<TypeVerdict>,
    #[serde(default)]
    pub mixing: Option<MixingSection>,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            config: config.clone(),
            seed: config.seed,
            suites: Vec::new(),
            conditioning: Vec::new(),
            warnings: Vec::new(),
            moments: None,
            centralizer: None,
            verdict: None,
            mixing: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.status != Status::Fail)
    }

    pub fn max_residual(&self) -> f64 {
        self.suites
            .iter()
            .filter_map(|s| s.max_residual)
            .fold(0.0, f64::max)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> String {
        crate::json::to_string(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
