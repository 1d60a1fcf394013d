//! Machine-readable report documents.
//!
//! Everything outside the `timing` object is a pure function of the
//! command arguments and seed.

use serde::Serialize;

use crate::runtime::TrialsSummary;
use crate::verification::LemmaReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub elapsed_ms: u128,
}

/// Fully resolved simulate configuration, enough to rerun it.
#[derive(Clone, Debug, Serialize)]
pub struct ResolvedConfig {
    pub group: String,
    pub group_order: usize,
    pub subgroup_gens: Vec<String>,
    pub h: Vec<usize>,
    pub h_names: Vec<String>,
    pub m: usize,
    pub m_default: usize,
    pub ordering: Vec<usize>,
    pub scalar: String,
    pub seed: u64,
    pub rng: String,
    pub mode: String,
    pub trials: usize,
    pub skip_implied: bool,
    pub term_cap: usize,
    pub rank_reduction: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisSection {
    pub reps: Vec<usize>,
    /// Exact rational ("p/q") in exact mode.
    pub success_probability: String,
    pub success_probability_f64: f64,
    pub steps: serde_json::Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationResults {
    pub oracle_calls_per_trial: usize,
    pub classical_queries: usize,
    /// |G| / m; below 1 at small orders, the logarithmic advantage only
    /// shows asymptotically.
    pub classical_to_quantum_ratio: f64,
    pub theorem1_target: f64,
    /// 1 − 2|G|/2^{m/2}.
    pub bound_at_m: f64,
    pub scheduled_tests: usize,
    pub analysis: AnalysisSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampled: Option<TrialsSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub command: &'static str,
    pub config: ResolvedConfig,
    pub results: SimulationResults,
    pub timing: Timing,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyConfig {
    pub check: String,
    pub group: String,
    pub scalar: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyTiming {
    pub elapsed_ms: u128,
    pub per_report_ms: Vec<u128>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub command: &'static str,
    pub config: VerifyConfig,
    pub pass: bool,
    pub cases: usize,
    pub failure_count: usize,
    pub reports: Vec<LemmaReport>,
    pub timing: VerifyTiming,
}

impl VerifyReport {
    pub fn new(config: VerifyConfig, reports: Vec<LemmaReport>, elapsed_ms: u128) -> Self {
        VerifyReport {
            schema: SCHEMA_VERSION,
            command: "verify",
            pass: reports.iter().all(LemmaReport::passed),
            cases: reports.iter().map(|r| r.cases).sum(),
            failure_count: reports.iter().map(|r| r.failures.len()).sum(),
            timing: VerifyTiming {
                elapsed_ms,
                per_report_ms: reports.iter().map(|r| r.elapsed_ms).collect(),
            },
            reports,
            config,
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
