use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::oracle::OracleFunction;
use super::sampled::{run_sampled_trial, Outcome, TrialResult};
use super::schedule::ScheduledTest;
use super::RunConfig;
use crate::error::Result;
use crate::group::Subgroup;
use crate::scalar::Scalar;

pub const RNG_NAME: &str = "ChaCha20 (rand_chacha 0.3; seed_from_u64(seed), stream = trial index)";

/// Private stream for trial `index`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stream used to draw representatives for analysis-mode runs.
pub fn analysis_rng(seed: u64) -> ChaCha20Rng {
    trial_rng(seed, u64::MAX)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TestStats {
    pub subgroup: Vec<usize>,
    pub generators: Vec<usize>,
    pub plus: usize,
    pub minus: usize,
    pub skipped: usize,
    /// Mean measured p_plus over non-skipped trials.
    pub mean_p_plus: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialsSummary {
    pub trials: usize,
    pub successes: Option<usize>,
    pub success_rate: Option<f64>,
    pub all_correct: Option<usize>,
    pub subgroup_outputs: usize,
    pub inconsistent_trials: usize,
    pub mean_oracle_calls: f64,
    pub theorem1_target: f64,
    pub per_test: Vec<TestStats>,
    /// Output set X (as a member list) → count.
    pub outputs: BTreeMap<String, usize>,
}

/// Runs `config.trials` independent trials, trial i on stream i. Results
/// come back in trial order whatever the thread count.
pub fn run_trials<S: Scalar>(
    f: &OracleFunction,
    config: &RunConfig,
    schedule: &[ScheduledTest],
    known_h: Option<&Subgroup>,
) -> Result<(TrialsSummary, Vec<TrialResult<S>>)> {
    config.validate(f.group())?;
    let results: Vec<TrialResult<S>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut oracle = f.clone();
            oracle.reset_count();
            let mut rng = trial_rng(config.seed, i);
            run_sampled_trial::<S, _>(&mut oracle, config, schedule, known_h, &mut rng)
        })
        .collect::<Result<_>>()?;
    Ok((summarize(f, schedule, &results), results))
}

fn summarize<S: Scalar>(
    f: &OracleFunction,
    schedule: &[ScheduledTest],
    results: &[TrialResult<S>],
) -> TrialsSummary {
    let n = results.len();
    let count = |pred: &dyn Fn(&TrialResult<S>) -> Option<bool>| -> Option<usize> {
        results.iter().map(|r| pred(r).map(usize::from)).sum::<Option<usize>>()
    };
    let successes = count(&|r| r.matches_h);
    let all_correct = count(&|r| r.all_correct);
    let mut per_test: Vec<TestStats> = schedule
        .iter()
        .map(|t| TestStats {
            subgroup: t.subgroup.members().to_vec(),
            generators: t.generators.clone(),
            ..TestStats::default()
        })
        .collect();
    let mut p_sums = vec![0.0f64; schedule.len()];
    for r in results {
        for s in &r.record.steps {
            let stats = &mut per_test[s.test_index];
            if s.skipped() {
                stats.skipped += 1;
            }
            match s.outcome {
                Outcome::Plus => stats.plus += 1,
                Outcome::Minus => stats.minus += 1,
            }
            if let Some(p) = &s.p_plus {
                p_sums[s.test_index] += p.to_f64();
            }
        }
    }
    for (stats, sum) in per_test.iter_mut().zip(p_sums) {
        let measured = n - stats.skipped;
        stats.mean_p_plus = (measured > 0).then(|| sum / measured as f64);
    }
    let mut outputs = BTreeMap::new();
    for r in results {
        let key = format!("{:?}", r.x);
        *outputs.entry(key).or_insert(0) += 1;
    }
    let order = f.group().order() as f64;
    TrialsSummary {
        trials: n,
        successes,
        success_rate: successes.map(|s| s as f64 / n as f64),
        all_correct,
        subgroup_outputs: results.iter().filter(|r| r.is_subgroup).count(),
        inconsistent_trials: results.iter().filter(|r| !r.consistent).count(),
        mean_oracle_calls: results.iter().map(|r| r.oracle_calls as f64).sum::<f64>() / n as f64,
        theorem1_target: 1.0 - 1.0 / order,
        per_test,
        outputs,
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::super::{make_oracle_from_subgroup, test_schedule};
    use super::*;
    use crate::group::{make_named, GroupSpec};
    use crate::Rational as Q;

    #[test]
    fn single_trial_matches_direct_run() {
        let s3 = Arc::new(make_named(&GroupSpec::Symmetric(3)).unwrap());
        let h = crate::group::cyclic_subgroup(&s3, 1);
        let mut cfg = RunConfig::for_group(&s3);
        cfg.seed = 99;
        let sched = test_schedule(&s3, &cfg.ordering);
        let f = make_oracle_from_subgroup(&h);
        let (_, rs) = run_trials::<Q>(&f, &cfg, &sched, Some(&h)).unwrap();
        let mut f2 = f.clone();
        let direct = run_sampled_trial::<Q, _>(&mut f2, &cfg, &sched, Some(&h), &mut trial_rng(99, 0)).unwrap();
        assert_eq!(rs[0].x, direct.x);
        assert_eq!(rs[0].reps, direct.reps);
    }

    #[test]
    fn same_seed_same_summary_across_thread_counts() {
        let z2 = Arc::new(make_named(&GroupSpec::Cyclic(2)).unwrap());
        let h = crate::group::Subgroup::trivial(&z2);
        let mut cfg = RunConfig::for_group(&z2);
        cfg.trials = 1000;
        cfg.seed = 5;
        let sched = test_schedule(&z2, &cfg.ordering);
        let f = make_oracle_from_subgroup(&h);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_trials::<Q>(&f, &cfg, &sched, Some(&h)).unwrap().0)
        };
        let a = run(1);
        assert_eq!(a, run(4));
        // exact success probability is 63/64
        assert!(a.success_rate.unwrap() >= 0.5);
        assert_eq!(a.mean_oracle_calls, 6.0);
    }
}
