use std::sync::Arc;
use std::time::Instant;

use rand::Rng;

use super::dense::{dense_apply_pk, dense_apply_pk_complement, dense_coset_state, dense_dot, dense_from_tensor, DenseState};
use super::{Failure, LemmaReport};
use crate::coset::AveragingProjector;
use crate::error::Result;
use crate::group::{enumerate_subgroups, parse_group_string, Element, FiniteGroup, Subgroup};
use crate::runtime::{
    analysis_rng, analysis_states, default_m, make_oracle_from_subgroup, run_analysis, run_sampled_trial_traced,
    test_schedule, trial_rng, Outcome, RunConfig,
};
use crate::scalar::{Scalar, FLOAT_TOLERANCE};
use crate::tensor::{apply_pk, inner, tensor_coset_state, TensorSumState};
use crate::Rational;

/// Verification fleet: Abelian and non-Abelian, cyclic and non-cyclic, and
/// Q8 (non-Abelian with every subgroup normal).
pub const FLEET: &[&str] = &["Z:2", "Z:3", "Z:4", "Z:2xZ:2", "Z:6", "S:3", "D:4", "Q8"];

pub fn fleet() -> Vec<(String, Arc<FiniteGroup>)> {
    FLEET
        .iter()
        .map(|s| (s.to_string(), Arc::new(parse_group_string(s).expect("fleet specs are valid"))))
        .collect()
}

fn two_pow(m: usize) -> Rational {
    Rational::from_u64(2).powi(m as u32)
}

/// Normalized ⟨Ψ|P_K|Ψ⟩ = (|H∩K|/|K|)^m for every subgroup pair, every
/// m ≤ `m_max` and `draws` random representative tuples; also ≤ 2^{-m}
/// when K ⊄ H and = 1 when K ⊆ H.
pub fn check_lemma1(group: &Arc<FiniteGroup>, label: &str, m_max: usize, draws: usize, seed: u64) -> Result<LemmaReport> {
    let start = Instant::now();
    let subs = enumerate_subgroups(group)?;
    let mut rng = trial_rng(seed, 0);
    let mut report = LemmaReport::new("lemma1", label);
    for h in &subs {
        for k in &subs {
            let proj = AveragingProjector::new(k);
            let base = Rational::from_ratio(h.intersection_order(k) as i64, k.order() as i64);
            let contained = k.is_subgroup_of(h);
            for m in 1..=m_max {
                let expected = base.powi(m as u32);
                for _ in 0..draws {
                    let reps: Vec<Element> = (0..m).map(|_| rng.gen_range(0..group.order())).collect();
                    let psi = tensor_coset_state::<Rational>(h, &reps);
                    let got = inner(&psi, &apply_pk(&psi, &proj)) / psi.norm_sq();
                    report.cases += 1;
                    let bound_ok = if contained {
                        got == Rational::from_u64(1)
                    } else {
                        got <= Rational::from_u64(1) / two_pow(m)
                    };
                    if got != expected || !bound_ok {
                        report.failures.push(Failure {
                            group: label.to_string(),
                            h: h.members().to_vec(),
                            k: Some(k.members().to_vec()),
                            m,
                            step: None,
                            expected: expected.render(),
                            got: got.render(),
                        });
                    }
                }
            }
        }
    }
    report.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

/// Normalized ⟨E_i|E_i⟩ ≤ i²/2^m at every analysis step, both for the
/// scheduled-test index and for the element-count index.
pub fn check_lemma2(h: &Subgroup, config: &RunConfig, label: &str) -> Result<LemmaReport> {
    let start = Instant::now();
    let reps: Vec<Element> = {
        let mut rng = analysis_rng(config.seed);
        (0..config.m).map(|_| rng.gen_range(0..h.group().order())).collect()
    };
    let trace = run_analysis::<Rational>(h, config, &reps)?;
    let mut report = LemmaReport::new("lemma2", label);
    for step in &trace.steps {
        report.cases += 1;
        let ok = step.err_sq <= step.lemma2_bound && step.err_sq <= step.element_bound;
        let initial_ok = step.index != 0 || step.err_sq == Rational::from_u64(0);
        if !ok || !initial_ok {
            report.failures.push(Failure {
                group: label.to_string(),
                h: h.members().to_vec(),
                k: step.subgroup.as_ref().map(|k| k.members().to_vec()),
                m: config.m,
                step: Some(step.index),
                expected: format!("<= {}", step.lemma2_bound.render()),
                got: step.err_sq.render(),
            });
        }
    }
    report.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

/// p ≥ 1 − 2|G|/2^{m/2}, checked as (1 − p)² ≤ 4|G|²/2^m, and p ≥ 1 − 1/|G|
/// when m is the default.
pub fn check_success_bound(h: &Subgroup, config: &RunConfig, label: &str) -> Result<LemmaReport> {
    let start = Instant::now();
    let n = h.group().order();
    let reps: Vec<Element> = {
        let mut rng = analysis_rng(config.seed);
        (0..config.m).map(|_| rng.gen_range(0..n)).collect()
    };
    let p = run_analysis::<Rational>(h, config, &reps)?.final_success_prob;
    let one = Rational::from_u64(1);
    let mut report = LemmaReport::new("bound", label);
    let fail = |expected: String, report: &mut LemmaReport| {
        report.failures.push(Failure {
            group: label.to_string(),
            h: h.members().to_vec(),
            k: None,
            m: config.m,
            step: None,
            expected,
            got: p.render(),
        })
    };
    report.cases += 1;
    let gap = one.clone() - p.clone();
    let limit = Rational::from_u64(4 * (n * n) as u64) / two_pow(config.m);
    if p > one || gap.clone() * &gap > limit {
        fail(format!("(1 - p)^2 <= {}", limit.render()), &mut report);
    }
    if config.m == default_m(n) {
        report.cases += 1;
        let target = one - Rational::from_ratio(1, n as i64);
        if p < target {
            fail(format!(">= {}", target.render()), &mut report);
        }
    }
    report.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

/// Structured-versus-dense equivalence. For every subgroup H: the analysis
/// path, and `trials` sampled trials cycling through the subgroups, are
/// replayed on the dense statevector; amplitudes, norms and all pairwise
/// inner products must agree (exactly, or within 1e-12 in float mode,
/// normalized by ⟨Ψ|Ψ⟩).
pub fn check_dense<S: Scalar>(
    group: &Arc<FiniteGroup>,
    label: &str,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<LemmaReport> {
    let start = Instant::now();
    let subs = enumerate_subgroups(group)?;
    let mut config = RunConfig::for_group(group);
    config.m = m;
    let schedule = test_schedule(group, &config.ordering);
    let mut report = LemmaReport::new("dense", label);

    for h in &subs {
        let reps: Vec<Element> = {
            let mut rng = analysis_rng(seed);
            (0..m).map(|_| rng.gen_range(0..group.order())).collect()
        };
        let states = analysis_states::<S>(h, &config, &reps)?;
        let sets: Vec<Vec<Element>> = reps.iter().map(|&a| coset(h, a)).collect();
        let mut dense = vec![dense_coset_state::<S>(group, &sets)?];
        for t in &schedule {
            let last = dense.last().unwrap();
            dense.push(if t.subgroup.is_subgroup_of(h) {
                dense_apply_pk(last, &t.subgroup)
            } else {
                dense_apply_pk_complement(last, &t.subgroup)
            });
        }
        compare(&states, &dense, h, m, label, &mut report)?;
    }

    for i in 0..trials {
        let h = &subs[i % subs.len()];
        let mut f = make_oracle_from_subgroup(h);
        let mut rng = trial_rng(seed, i as u64);
        let (result, states) = run_sampled_trial_traced::<S, _>(&mut f, &config, &schedule, Some(h), &mut rng)?;
        let sets: Vec<Vec<Element>> = result.reps.iter().map(|&a| coset(h, a)).collect();
        let mut dense = vec![dense_coset_state::<S>(group, &sets)?];
        for step in result.record.steps.iter().filter(|s| !s.skipped()) {
            let k = &schedule[step.test_index].subgroup;
            let last = dense.last().unwrap();
            dense.push(match step.outcome {
                Outcome::Plus => dense_apply_pk(last, k),
                Outcome::Minus => dense_apply_pk_complement(last, k),
            });
        }
        compare(&states, &dense, h, m, label, &mut report)?;
    }
    report.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

fn coset(h: &Subgroup, a: Element) -> Vec<Element> {
    let g = h.group();
    h.members().iter().map(|&x| g.mul(a, x)).collect()
}

fn compare<S: Scalar>(
    states: &[TensorSumState<S>],
    dense: &[DenseState<S>],
    h: &Subgroup,
    m: usize,
    label: &str,
    report: &mut LemmaReport,
) -> Result<()> {
    let group = label.to_string();
    let fail = |step: usize, expected: String, got: String, report: &mut LemmaReport| {
        report.failures.push(Failure {
            group: group.clone(),
            h: h.members().to_vec(),
            k: None,
            m,
            step: Some(step),
            expected,
            got,
        })
    };
    if states.len() != dense.len() {
        fail(0, format!("{} states", dense.len()), format!("{} states", states.len()), report);
        return Ok(());
    }
    let norm0 = dense[0].norm_sq();
    let expanded = states.iter().map(dense_from_tensor).collect::<Result<Vec<_>>>()?;
    for (i, (x, d)) in expanded.iter().zip(dense).enumerate() {
        report.cases += 1;
        let worst = x
            .amps()
            .iter()
            .zip(d.amps())
            .find(|(a, b)| !a.approx_eq(b, FLOAT_TOLERANCE));
        if let Some((a, b)) = worst {
            fail(i, b.render(), a.render(), report);
        }
    }
    for i in 0..states.len() {
        for j in i..states.len() {
            report.cases += 1;
            let structured = inner(&states[i], &states[j]) / norm0.clone();
            let literal = dense_dot(&dense[i], &dense[j]) / norm0.clone();
            if !structured.approx_eq(&literal, FLOAT_TOLERANCE) {
                fail(i, literal.render(), structured.render(), report);
            }
        }
        report.cases += 1;
        let structured = states[i].norm_sq() / norm0.clone();
        let literal = dense[i].norm_sq() / norm0.clone();
        if !structured.approx_eq(&literal, FLOAT_TOLERANCE) {
            fail(i, literal.render(), structured.render(), report);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{cyclic_subgroup, make_named, GroupSpec};

    fn group(spec: GroupSpec) -> Arc<FiniteGroup> {
        Arc::new(make_named(&spec).unwrap())
    }

    #[test]
    fn lemma1_z2_and_s3() {
        let z2 = group(GroupSpec::Cyclic(2));
        let r = check_lemma1(&z2, "Z:2", 5, 3, 1).unwrap();
        assert!(r.passed());
        assert_eq!(r.cases, 4 * 5 * 3);

        // H = ⟨3-cycle⟩, K = ⟨transposition⟩, m = 3: (1/2)^3 by closed form
        let s3 = group(GroupSpec::Symmetric(3));
        let h = cyclic_subgroup(&s3, 3);
        let k = cyclic_subgroup(&s3, 1);
        assert_eq!(h.intersection_order(&k), 1);
        let psi = tensor_coset_state::<Rational>(&h, &[0, 4, 2]);
        let ratio = inner(&psi, &apply_pk(&psi, &AveragingProjector::new(&k))) / psi.norm_sq();
        assert_eq!(ratio, Rational::from_ratio(1, 8));
        let d = dense_coset_state::<Rational>(&s3, &[coset(&h, 0), coset(&h, 4), coset(&h, 2)]).unwrap();
        assert_eq!(dense_dot(&d, &dense_apply_pk(&d, &k)) / d.norm_sq(), Rational::from_ratio(1, 8));
    }

    #[test]
    fn lemma2_examples() {
        let z2 = group(GroupSpec::Cyclic(2));
        let mut cfg = RunConfig::for_group(&z2);
        cfg.m = 4;
        let r = check_lemma2(&Subgroup::trivial(&z2), &cfg, "Z:2").unwrap();
        assert!(r.passed());
        assert_eq!(r.cases, 2);
        let s3 = group(GroupSpec::Symmetric(3));
        let r = check_lemma2(&Subgroup::whole(&s3), &RunConfig::for_group(&s3), "S:3").unwrap();
        assert!(r.passed());
    }

    #[test]
    fn bound_examples() {
        let z2 = group(GroupSpec::Cyclic(2));
        let cfg = RunConfig::for_group(&z2);
        assert_eq!(cfg.m, 6);
        let r = check_success_bound(&Subgroup::trivial(&z2), &cfg, "Z:2").unwrap();
        assert!(r.passed());
        assert_eq!(r.cases, 2);
        let s3 = group(GroupSpec::Symmetric(3));
        let cfg = RunConfig::for_group(&s3);
        assert_eq!(cfg.m, 13);
        for h in enumerate_subgroups(&s3).unwrap() {
            assert!(check_success_bound(&h, &cfg, "S:3").unwrap().passed());
        }
    }

    #[test]
    fn dense_equivalence_small() {
        let z3 = group(GroupSpec::Cyclic(3));
        let r = check_dense::<Rational>(&z3, "Z:3", 4, 6, 3).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        let r = check_dense::<f64>(&z3, "Z:3", 4, 6, 3).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
    }
}
