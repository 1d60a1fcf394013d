use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use super::oracle::{sample_coset_reps, OracleFunction};
use super::schedule::ScheduledTest;
use super::RunConfig;
use crate::coset::FactorVector;
use crate::error::{HspError, Result};
use crate::group::{subgroup_closure, Element, FiniteGroup, Subgroup};
use crate::scalar::{Scalar, ScalarMode, DRAW_BITS};
use crate::tensor::{apply_pk, difference, TensorSumState};

/// Float-mode states whose normalized norm falls below this are rejected.
const FLOAT_NORM_FLOOR: f64 = 1e-200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Outcome {
    pub fn sign(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    /// K contains an element already known to lie outside H.
    ContainsNonMember,
    /// K lies inside the subgroup generated by known members.
    ImpliedMember,
}

#[derive(Clone, Debug)]
pub struct StepRecord<S> {
    pub test_index: usize,
    pub outcome: Outcome,
    /// Normalized Born probability of +1; None when skipped.
    pub p_plus: Option<S>,
    pub skip_reason: Option<SkipReason>,
}

impl<S> StepRecord<S> {
    pub fn skipped(&self) -> bool {
        self.skip_reason.is_some()
    }
}

#[derive(Clone, Debug)]
pub struct MeasurementRecord<S> {
    pub steps: Vec<StepRecord<S>>,
}

#[derive(Clone, Debug)]
pub struct TrialResult<S> {
    pub reps: Vec<Element>,
    /// The output set X, sorted.
    pub x: Vec<Element>,
    pub is_subgroup: bool,
    pub matches_h: Option<bool>,
    /// Every measured outcome agreed with the true H (when known).
    pub all_correct: Option<bool>,
    /// No element was marked both member and non-member.
    pub consistent: bool,
    pub oracle_calls: u64,
    pub record: MeasurementRecord<S>,
}

/// |Ψ⟩ = ⊗_i |f⁻¹(label_i)⟩, the post-measurement state of the label
/// register, unnormalized.
pub fn initial_state<S: Scalar>(f: &OracleFunction, labels: &[u64]) -> TensorSumState<S> {
    let n = f.group().order();
    let mut cache: Vec<(u64, Arc<FactorVector<S>>)> = Vec::new();
    let factors: Vec<Arc<FactorVector<S>>> = labels
        .iter()
        .map(|&l| match cache.iter().find(|(k, _)| *k == l) {
            Some((_, v)) => Arc::clone(v),
            None => {
                let v = Arc::new(FactorVector::indicator(n, f.preimage(l)));
                cache.push((l, Arc::clone(&v)));
                v
            }
        })
        .collect();
    let m = labels.len();
    TensorSumState::from_terms(
        f.group(),
        m,
        vec![crate::tensor::TensorTerm {
            coeff: S::one(),
            factors,
        }],
    )
}

/// One run of the algorithm: m oracle calls, then A_K for every scheduled
/// K with Born-rule outcomes.
pub fn run_sampled_trial<S: Scalar, R: Rng + ?Sized>(
    f: &mut OracleFunction,
    config: &RunConfig,
    schedule: &[ScheduledTest],
    known_h: Option<&Subgroup>,
    rng: &mut R,
) -> Result<TrialResult<S>> {
    run_inner(f, config, schedule, known_h, rng, None)
}

/// As [`run_sampled_trial`], also returning every state visited (the
/// initial state, then the post-measurement state of each measured test).
pub fn run_sampled_trial_traced<S: Scalar, R: Rng + ?Sized>(
    f: &mut OracleFunction,
    config: &RunConfig,
    schedule: &[ScheduledTest],
    known_h: Option<&Subgroup>,
    rng: &mut R,
) -> Result<(TrialResult<S>, Vec<TensorSumState<S>>)> {
    let mut states = Vec::new();
    let r = run_inner(f, config, schedule, known_h, rng, Some(&mut states))?;
    Ok((r, states))
}

struct Knowledge {
    group: Arc<FiniteGroup>,
    member: Vec<bool>,
    nonmember: Vec<bool>,
}

impl Knowledge {
    fn new(group: &Arc<FiniteGroup>) -> Self {
        let n = group.order();
        let mut member = vec![false; n];
        member[group.identity()] = true;
        Knowledge {
            group: Arc::clone(group),
            member,
            nonmember: vec![false; n],
        }
    }

    fn implied(&self, test: &ScheduledTest) -> Option<SkipReason> {
        let k = test.subgroup.members();
        if k.iter().any(|&x| self.nonmember[x]) {
            return Some(SkipReason::ContainsNonMember);
        }
        let known: Vec<Element> = (0..self.member.len()).filter(|&x| self.member[x]).collect();
        let closure = subgroup_closure(&self.group, &known);
        k.iter().all(|&x| closure.contains(x)).then_some(SkipReason::ImpliedMember)
    }

    fn record(&mut self, test: &ScheduledTest, outcome: Outcome) {
        match outcome {
            Outcome::Plus => test.subgroup.members().iter().for_each(|&x| self.member[x] = true),
            Outcome::Minus => test.generators.iter().for_each(|&x| self.nonmember[x] = true),
        }
    }
}

fn run_inner<S: Scalar, R: Rng + ?Sized>(
    f: &mut OracleFunction,
    config: &RunConfig,
    schedule: &[ScheduledTest],
    known_h: Option<&Subgroup>,
    rng: &mut R,
    mut trace: Option<&mut Vec<TensorSumState<S>>>,
) -> Result<TrialResult<S>> {
    let group = Arc::clone(f.group());
    let calls_before = f.call_count();
    let (reps, labels) = sample_coset_reps(f, config.m, rng);
    let oracle_calls = f.call_count() - calls_before;

    let mut psi = initial_state::<S>(f, &labels);
    let initial_norm = psi.norm_sq();
    let mut norm = initial_norm.clone();
    if let Some(t) = trace.as_deref_mut() {
        t.push(psi.clone());
    }
    let mut knowledge = Knowledge::new(&group);
    let mut steps = Vec::with_capacity(schedule.len());
    let mut all_correct = true;

    for (i, test) in schedule.iter().enumerate() {
        let truth = known_h.map(|h| test.subgroup.is_subgroup_of(h));
        if config.skip_implied {
            if let Some(reason) = knowledge.implied(test) {
                let outcome = match reason {
                    SkipReason::ContainsNonMember => Outcome::Minus,
                    SkipReason::ImpliedMember => Outcome::Plus,
                };
                knowledge.record(test, outcome);
                steps.push(StepRecord {
                    test_index: i,
                    outcome,
                    p_plus: None,
                    skip_reason: Some(reason),
                });
                continue;
            }
        }
        let projected = apply_pk(&psi, &test.projector);
        let plus_weight = projected.norm_sq();
        let mut p_plus = plus_weight.clone() / norm.clone();
        if S::MODE == ScalarMode::Float {
            p_plus = clamp_unit(p_plus);
        }
        let draw = rng.gen::<u64>() >> (64 - DRAW_BITS);
        let outcome = if p_plus.exceeds_draw(draw) {
            Outcome::Plus
        } else {
            Outcome::Minus
        };
        match outcome {
            Outcome::Plus => {
                psi = projected;
                norm = plus_weight;
            }
            Outcome::Minus => {
                psi = difference(&psi, &projected, &config.compress)?;
                norm = match S::MODE {
                    ScalarMode::Exact => norm - plus_weight,
                    ScalarMode::Float => psi.norm_sq(),
                };
            }
        }
        if S::MODE == ScalarMode::Float {
            let rel = (norm.clone() / initial_norm.clone()).to_f64();
            if !(rel > FLOAT_NORM_FLOOR) {
                return Err(HspError::DegenerateState);
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(psi.clone());
        }
        if let Some(truth) = truth {
            all_correct &= truth == (outcome == Outcome::Plus);
        }
        knowledge.record(test, outcome);
        steps.push(StepRecord {
            test_index: i,
            outcome,
            p_plus: Some(p_plus),
            skip_reason: None,
        });
    }

    let x: Vec<Element> = group.elements().filter(|&g| knowledge.member[g]).collect();
    let consistent = group.elements().all(|g| !(knowledge.member[g] && knowledge.nonmember[g]));
    let is_subgroup = Subgroup::from_members(&group, x.iter().copied()).is_ok();
    Ok(TrialResult {
        reps,
        matches_h: known_h.map(|h| h.members() == x.as_slice()),
        all_correct: known_h.map(|_| all_correct),
        x,
        is_subgroup,
        consistent,
        oracle_calls,
        record: MeasurementRecord { steps },
    })
}

fn clamp_unit<S: Scalar>(p: S) -> S {
    if p < S::zero() {
        S::zero()
    } else if p > S::one() {
        S::one()
    } else {
        p
    }
}

#[cfg(test)]
mod tests {
    use num_traits::{One, Zero};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    use super::super::{make_oracle_from_subgroup, run_analysis, test_schedule};
    use super::*;
    use crate::group::{cyclic_subgroup, enumerate_subgroups, make_named, GroupSpec};
    use crate::tensor::{apply_pk_complement, CompressOptions};
    use crate::Rational as Q;

    fn group(spec: GroupSpec) -> Arc<FiniteGroup> {
        Arc::new(make_named(&spec).unwrap())
    }

    #[test]
    fn whole_group_always_returns_g() {
        let d4 = group(GroupSpec::Dihedral(4));
        let h = Subgroup::whole(&d4);
        let cfg = RunConfig::for_group(&d4);
        let sched = test_schedule(&d4, &cfg.ordering);
        let mut f = make_oracle_from_subgroup(&h);
        for seed in 0..5 {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let r = run_sampled_trial::<Q, _>(&mut f, &cfg, &sched, Some(&h), &mut rng).unwrap();
            assert_eq!(r.x, h.members());
            assert_eq!(r.matches_h, Some(true));
            assert!(r.record.steps.iter().all(|s| s.outcome == Outcome::Plus
                && s.p_plus.as_ref().is_some_and(One::is_one)));
            assert_eq!(r.oracle_calls, cfg.m as u64);
        }
    }

    #[test]
    fn oracle_calls_equal_m() {
        let s3 = group(GroupSpec::Symmetric(3));
        let h = cyclic_subgroup(&s3, 3);
        let mut cfg = RunConfig::for_group(&s3);
        cfg.m = 5;
        let sched = test_schedule(&s3, &cfg.ordering);
        let mut f = make_oracle_from_subgroup(&h);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..4 {
            let r = run_sampled_trial::<Q, _>(&mut f, &cfg, &sched, Some(&h), &mut rng).unwrap();
            assert_eq!(r.oracle_calls, 5);
        }
        assert_eq!(f.call_count(), 20);
    }

    /// Exhaustive enumeration of the outcome tree with exact branch
    /// probabilities, skip logic off.
    fn all_correct_mass(
        psi: &TensorSumState<Q>,
        sched: &[ScheduledTest],
        h: &Subgroup,
        i: usize,
        correct: bool,
        total: &mut Q,
        correct_mass: &mut Q,
        norm0: &Q,
    ) {
        if i == sched.len() {
            let w = psi.norm_sq() / norm0.clone();
            *total += &w;
            if correct {
                *correct_mass += w;
            }
            return;
        }
        let t = &sched[i];
        let truth = t.subgroup.is_subgroup_of(h);
        let plus = apply_pk(psi, &t.projector);
        let minus = apply_pk_complement(psi, &t.projector, &CompressOptions::default()).unwrap();
        for (state, is_plus) in [(plus, true), (minus, false)] {
            if state.norm_sq().is_zero() {
                continue;
            }
            all_correct_mass(&state, sched, h, i + 1, correct && truth == is_plus, total, correct_mass, norm0);
        }
    }

    #[test]
    fn outcome_tree_all_correct_mass_equals_analysis() {
        for spec in [GroupSpec::Cyclic(4), GroupSpec::Symmetric(3)] {
            let g = group(spec);
            for h in enumerate_subgroups(&g).unwrap() {
                let mut cfg = RunConfig::for_group(&g);
                cfg.m = 3;
                let sched = test_schedule(&g, &cfg.ordering);
                let reps = vec![1, 0, 2];
                let psi = crate::tensor::tensor_coset_state::<Q>(&h, &reps);
                let (mut total, mut good) = (Q::zero(), Q::zero());
                all_correct_mass(&psi, &sched, &h, 0, true, &mut total, &mut good, &psi.norm_sq());
                assert!(total.is_one(), "path probabilities sum to 1");
                let a = run_analysis::<Q>(&h, &cfg, &reps).unwrap();
                assert_eq!(good, a.final_success_prob);
            }
        }
    }

    #[test]
    fn skip_implied_skips_and_keeps_correct_answers() {
        let z4 = group(GroupSpec::Cyclic(4));
        // H = {e}: test ⟨1⟩ = Z4 first; a −1 there marks 1, 3 only, and
        // ⟨2⟩ still needs a measurement.
        let h = Subgroup::trivial(&z4);
        let mut cfg = RunConfig::for_group(&z4);
        cfg.skip_implied = true;
        let sched = test_schedule(&z4, &cfg.ordering);
        let mut f = make_oracle_from_subgroup(&h);
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let r = run_sampled_trial::<Q, _>(&mut f, &cfg, &sched, Some(&h), &mut rng).unwrap();
        assert_eq!(r.record.steps.len(), 2);
        assert_eq!(r.record.steps[0].outcome, Outcome::Minus);
        assert!(!r.record.steps[1].skipped());

        // ordering 2 first: ⟨2⟩ = {0,2} returns −1 w.h.p., then ⟨1⟩ ∋ 2 is skipped
        cfg.ordering = vec![0, 2, 1, 3];
        let sched = test_schedule(&z4, &cfg.ordering);
        let r = run_sampled_trial::<Q, _>(&mut f, &cfg, &sched, Some(&h), &mut rng).unwrap();
        assert_eq!(r.record.steps[0].outcome, Outcome::Minus);
        assert_eq!(r.record.steps[1].skip_reason, Some(SkipReason::ContainsNonMember));
        assert_eq!(r.record.steps[1].outcome, Outcome::Minus);
        assert_eq!(r.x, vec![0]);

        // H = Z4, Z4 tested first: ⟨2⟩ is implied positive
        let h = Subgroup::whole(&z4);
        let mut f = make_oracle_from_subgroup(&h);
        cfg.ordering = vec![0, 1, 2, 3];
        let sched = test_schedule(&z4, &cfg.ordering);
        let r = run_sampled_trial::<Q, _>(&mut f, &cfg, &sched, Some(&h), &mut rng).unwrap();
        assert_eq!(r.record.steps[1].skip_reason, Some(SkipReason::ImpliedMember));
        assert_eq!(r.matches_h, Some(true));
    }

    #[test]
    fn float_and_exact_agree_on_outcomes_for_same_stream() {
        let s3 = group(GroupSpec::Symmetric(3));
        let h = cyclic_subgroup(&s3, 3);
        let cfg = RunConfig::for_group(&s3);
        let sched = test_schedule(&s3, &cfg.ordering);
        for seed in 0..10 {
            let mut f = make_oracle_from_subgroup(&h);
            let a = run_sampled_trial::<Q, _>(&mut f, &cfg, &sched, Some(&h), &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
            let b = run_sampled_trial::<f64, _>(&mut f, &cfg, &sched, Some(&h), &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(a.x, b.x);
            for (sa, sb) in a.record.steps.iter().zip(&b.record.steps) {
                let (pa, pb) = (sa.p_plus.as_ref().unwrap().to_f64(), sb.p_plus.unwrap());
                assert!((pa - pb).abs() <= 1e-12);
            }
        }
    }
}
