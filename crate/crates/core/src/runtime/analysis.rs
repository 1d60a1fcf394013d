use serde::Serialize;

use super::schedule::{test_schedule, ScheduledTest};
use super::RunConfig;
use crate::error::Result;
use crate::group::{Element, Subgroup};
use crate::scalar::Scalar;
use crate::tensor::{apply_pk, apply_pk_complement, difference, inner, tensor_coset_state, TensorSumState};

/// Diagnostics after the i-th scheduled test (index 0 is the initial state).
#[derive(Clone, Debug)]
pub struct AnalysisStep<S> {
    pub index: usize,
    /// None for the initial entry.
    pub subgroup: Option<Subgroup>,
    pub in_h: bool,
    /// ⟨Ψ_i|Ψ_i⟩ / ⟨Ψ|Ψ⟩.
    pub norm_sq_psi: S,
    /// ⟨E_i|E_i⟩ / ⟨Ψ|Ψ⟩ with E_i = Ψ − Ψ_i.
    pub err_sq: S,
    /// i² / 2^m over scheduled tests.
    pub lemma2_bound: S,
    /// Number of elements whose membership is settled after this step,
    /// counting the identity.
    pub elements_settled: usize,
    /// elements_settled² / 2^m: the bound indexed over element tests.
    pub element_bound: S,
    pub terms: usize,
}

#[derive(Clone, Debug)]
pub struct AnalysisTrace<S> {
    pub m: usize,
    pub reps: Vec<Element>,
    pub steps: Vec<AnalysisStep<S>>,
    /// Exact probability that every test answers correctly.
    pub final_success_prob: S,
}

#[derive(Serialize)]
struct StepJson {
    index: usize,
    subgroup: Option<Vec<Element>>,
    in_h: bool,
    norm_sq_psi: String,
    err_sq: String,
    lemma2_bound: String,
    elements_settled: usize,
    element_bound: String,
    terms: usize,
}

impl<S: Scalar> AnalysisTrace<S> {
    pub fn steps_json(&self) -> serde_json::Value {
        let rows: Vec<StepJson> = self
            .steps
            .iter()
            .map(|s| StepJson {
                index: s.index,
                subgroup: s.subgroup.as_ref().map(|k| k.members().to_vec()),
                in_h: s.in_h,
                norm_sq_psi: s.norm_sq_psi.render(),
                err_sq: s.err_sq.render(),
                lemma2_bound: s.lemma2_bound.render(),
                elements_settled: s.elements_settled,
                element_bound: s.element_bound.render(),
                terms: s.terms,
            })
            .collect();
        serde_json::to_value(rows).expect("serializable")
    }
}

/// Follows the correct branch of every scheduled test from |Ψ⟩ = ⊗|a_iH⟩:
/// P_K when K ⊆ H, P_K⊥ otherwise.
pub fn run_analysis<S: Scalar>(h: &Subgroup, config: &RunConfig, reps: &[Element]) -> Result<AnalysisTrace<S>> {
    walk(h, config, reps, false).map(|(trace, _)| trace)
}

/// Ψ_0, Ψ_1, … along the correct branch, for cross-checking.
pub fn analysis_states<S: Scalar>(h: &Subgroup, config: &RunConfig, reps: &[Element]) -> Result<Vec<TensorSumState<S>>> {
    walk(h, config, reps, true).map(|(_, states)| states)
}

fn walk<S: Scalar>(
    h: &Subgroup,
    config: &RunConfig,
    reps: &[Element],
    keep: bool,
) -> Result<(AnalysisTrace<S>, Vec<TensorSumState<S>>)> {
    assert_eq!(reps.len(), config.m, "need one representative per register");
    let group = h.group();
    config.validate(group)?;
    let schedule: Vec<ScheduledTest> = test_schedule(group, &config.ordering);
    let two_m = S::from_u64(2).powi(config.m as u32);
    let bound = |i: usize| S::from_u64((i * i) as u64) / two_m.clone();

    let psi = tensor_coset_state::<S>(h, reps);
    let psi_norm = psi.norm_sq();
    let mut current = psi.clone();
    let mut settled = 1;
    let mut steps = vec![AnalysisStep {
        index: 0,
        subgroup: None,
        in_h: true,
        norm_sq_psi: S::one(),
        err_sq: S::zero(),
        lemma2_bound: S::zero(),
        elements_settled: settled,
        element_bound: bound(settled),
        terms: current.term_count(),
    }];
    let mut states = Vec::new();
    if keep {
        states.push(current.clone());
    }

    for (i, test) in schedule.iter().enumerate() {
        let in_h = test.subgroup.is_subgroup_of(h);
        current = if in_h {
            apply_pk(&current, &test.projector)
        } else {
            apply_pk_complement(&current, &test.projector, &config.compress)?
        };
        settled += test.generators.len();
        let err = difference(&psi, &current, &config.compress)?;
        steps.push(AnalysisStep {
            index: i + 1,
            subgroup: Some(test.subgroup.clone()),
            in_h,
            norm_sq_psi: current.norm_sq() / psi_norm.clone(),
            err_sq: inner(&err, &err) / psi_norm.clone(),
            lemma2_bound: bound(i + 1),
            elements_settled: settled,
            element_bound: bound(settled),
            terms: current.term_count(),
        });
        if keep {
            states.push(current.clone());
        }
    }
    let final_success_prob = steps.last().unwrap().norm_sq_psi.clone();
    Ok((
        AnalysisTrace {
            m: config.m,
            reps: reps.to_vec(),
            steps,
            final_success_prob,
        },
        states,
    ))
}
