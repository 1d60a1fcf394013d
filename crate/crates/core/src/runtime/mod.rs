//! The oracle model and the sequential measurement algorithm, in exact
//! analysis mode and Born-sampled mode.

mod analysis;
mod oracle;
mod sampled;
mod schedule;
mod trials;

pub use analysis::{analysis_states, run_analysis, AnalysisStep, AnalysisTrace};
pub use oracle::{infer_subgroup_from_oracle, make_oracle_from_subgroup, sample_coset_reps, OracleFunction};
pub use sampled::{
    initial_state, run_sampled_trial, run_sampled_trial_traced, MeasurementRecord, Outcome, SkipReason,
    StepRecord, TrialResult,
};
pub use schedule::{test_schedule, ScheduledTest};
pub use trials::{run_trials, trial_rng, analysis_rng, TestStats, TrialsSummary, RNG_NAME};

use crate::error::{HspError, Result};
use crate::group::{Element, FiniteGroup};
use crate::scalar::ScalarMode;
use crate::tensor::CompressOptions;

/// ⌈4·log₂ n⌉ + 2, computed exactly as 2 + min{k : 2^k ≥ n⁴}.
pub fn default_m(n: usize) -> usize {
    assert!(n >= 1, "group order must be positive");
    let n4 = (n as u128).pow(4);
    let mut k = 0;
    while (1u128 << k) < n4 {
        k += 1;
    }
    k + 2
}

/// Resolved configuration for analysis and sampled runs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub m: usize,
    /// Element test order; a permutation of 0..|G|.
    pub ordering: Vec<Element>,
    pub skip_implied: bool,
    pub scalar_mode: ScalarMode,
    pub seed: u64,
    pub compress: CompressOptions,
    pub trials: usize,
}

impl RunConfig {
    /// Defaults: m = default_m(|G|), index ordering, no skipping, exact
    /// scalars, seed 0, one trial.
    pub fn for_group(group: &FiniteGroup) -> Self {
        RunConfig {
            m: default_m(group.order()),
            ordering: group.elements().collect(),
            skip_implied: false,
            scalar_mode: ScalarMode::Exact,
            seed: 0,
            compress: CompressOptions::default(),
            trials: 1,
        }
    }

    pub fn validate(&self, group: &FiniteGroup) -> Result<()> {
        if self.m == 0 {
            return Err(HspError::InvalidInput("m must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(HspError::InvalidInput("trials must be at least 1".into()));
        }
        let n = group.order();
        let mut seen = vec![false; n];
        if self.ordering.len() != n {
            return Err(HspError::InvalidInput(format!(
                "ordering has {} entries, group order is {n}",
                self.ordering.len()
            )));
        }
        for &x in &self.ordering {
            if x >= n || std::mem::replace(&mut seen[x], true) {
                return Err(HspError::InvalidInput("ordering is not a permutation".into()));
            }
        }
        Ok(())
    }
}
