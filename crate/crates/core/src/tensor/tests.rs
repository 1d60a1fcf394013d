use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use super::*;
use crate::group::{enumerate_subgroups, make_named, subgroup_closure, GroupSpec};

type Q = BigRational;

fn q(n: i64, d: i64) -> Q {
    Q::from_ratio(n, d)
}

fn group(spec: GroupSpec) -> Arc<FiniteGroup> {
    Arc::new(make_named(&spec).unwrap())
}

/// Test-local dense expansion: amplitude at each m-tuple, mixed radix with
/// the first register most significant.
fn expand(x: &TensorSumState<Q>) -> Vec<Q> {
    let n = x.group().order();
    let dim = n.pow(x.m() as u32);
    (0..dim)
        .map(|mut idx| {
            let mut tuple = vec![0; x.m()];
            for j in (0..x.m()).rev() {
                tuple[j] = idx % n;
                idx /= n;
            }
            x.terms().iter().fold(Q::zero(), |acc, t| {
                acc + t
                    .factors
                    .iter()
                    .zip(&tuple)
                    .fold(t.coeff.clone(), |p, (f, &g)| p * &f.amps()[g])
            })
        })
        .collect()
}

/// Dense P_K from the span definition: the tuple-coset indicators are
/// pairwise orthogonal, so projecting means averaging over each block
/// a_1K × … × a_mK.
fn dense_pk(v: &[Q], k: &Subgroup, m: usize) -> Vec<Q> {
    let g = k.group();
    let n = g.order();
    let key = |mut idx: usize| {
        let mut out = vec![0; m];
        for j in (0..m).rev() {
            let x = idx % n;
            out[j] = k.members().iter().map(|&h| g.mul(x, h)).min().unwrap();
            idx /= n;
        }
        out
    };
    let mut sums: HashMap<Vec<usize>, Q> = HashMap::new();
    for (i, a) in v.iter().enumerate() {
        *sums.entry(key(i)).or_insert_with(Q::zero) += a;
    }
    let block = Q::from_u64(k.order().pow(m as u32) as u64);
    (0..v.len()).map(|i| sums[&key(i)].clone() / block.clone()).collect()
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |s, (x, y)| s + x * y)
}

#[test]
fn coset_state_examples() {
    let z1 = group(GroupSpec::Cyclic(1));
    let x = tensor_coset_state::<Q>(&Subgroup::trivial(&z1), &[0]);
    assert_eq!(expand(&x), vec![q(1, 1)]);

    let z2 = group(GroupSpec::Cyclic(2));
    let x = tensor_coset_state::<Q>(&Subgroup::trivial(&z2), &[0, 1]);
    // |0⟩⊗|1⟩ is index 0·2 + 1
    assert_eq!(expand(&x), vec![q(0, 1), q(1, 1), q(0, 1), q(0, 1)]);

    let d4 = group(GroupSpec::Dihedral(4));
    for k in enumerate_subgroups(&d4).unwrap() {
        let x = tensor_coset_state::<Q>(&k, &[3, 5, 0]);
        assert_eq!(x.norm_sq(), Q::from_u64((k.order() as u64).pow(3)));
    }
}

#[test]
fn inner_examples() {
    let z4 = group(GroupSpec::Cyclic(4));
    let h = subgroup_closure(&z4, &[2]);
    let z = tensor_coset_state::<Q>(&h, &[1, 2, 3]);
    assert_eq!(inner(&z, &z), q(8, 1));
    let y = tensor_coset_state::<Q>(&h, &[1, 3, 2]);
    assert!(inner(&z, &y).is_zero());

    let z2 = group(GroupSpec::Cyclic(2));
    let psi = tensor_coset_state::<Q>(&Subgroup::trivial(&z2), &[0, 0]);
    let other = tensor_coset_state::<Q>(&Subgroup::whole(&z2), &[0, 0]);
    let ip = inner(&psi, &other);
    assert_eq!(ip, q(1, 1));
    let normalized = ip.clone() * &ip / (psi.norm_sq() * other.norm_sq());
    assert_eq!(normalized, q(1, 4));
    assert_eq!(ip, dot(&expand(&psi), &expand(&other)));
}

#[test]
fn norm_examples() {
    let z2 = group(GroupSpec::Cyclic(2));
    assert!(TensorSumState::<Q>::zero(&z2, 3).norm_sq().is_zero());
    let psi = tensor_coset_state::<Q>(&Subgroup::trivial(&z2), &[1, 0, 1, 1]);
    assert_eq!(psi.norm_sq(), q(1, 1));
    let proj = AveragingProjector::new(&Subgroup::whole(&z2));
    let after = apply_pk_complement(&psi, &proj, &CompressOptions::default()).unwrap();
    // dense oracle value: 1 − (1/2)^4
    let dense = expand(&psi);
    let dense_after: Vec<Q> = dense
        .iter()
        .zip(dense_pk(&dense, &Subgroup::whole(&z2), 4))
        .map(|(a, b)| a - b)
        .collect();
    assert_eq!(dot(&dense_after, &dense_after), q(15, 16));
    assert_eq!(after.norm_sq() / psi.norm_sq(), q(15, 16));
}

#[test]
fn projection_examples() {
    let z2 = group(GroupSpec::Cyclic(2));
    let trivial = AveragingProjector::new(&Subgroup::trivial(&z2));
    let psi = tensor_coset_state::<Q>(&Subgroup::trivial(&z2), &[0, 1, 1]);
    assert_eq!(expand(&apply_pk(&psi, &trivial)), expand(&psi));

    let whole = Subgroup::whole(&z2);
    let fixed = tensor_coset_state::<Q>(&whole, &[0, 1, 1]);
    let pw = AveragingProjector::new(&whole);
    assert_eq!(expand(&apply_pk(&fixed, &pw)), expand(&fixed));

    // ⟨Ψ|P_K|Ψ⟩/⟨Ψ|Ψ⟩ for H = {0}, K = Z2, m = 3 is (1/2)^3
    let ratio = inner(&psi, &apply_pk(&psi, &pw)) / psi.norm_sq();
    assert_eq!(ratio, q(1, 8));
}

#[test]
fn complement_examples() {
    let z2 = group(GroupSpec::Cyclic(2));
    let whole = Subgroup::whole(&z2);
    let pw = AveragingProjector::new(&whole);
    let opts = CompressOptions::default();

    let inside = tensor_coset_state::<Q>(&whole, &[0, 1]);
    let c = apply_pk_complement(&inside, &pw, &opts).unwrap();
    assert!(c.is_zero_terms(), "exact cancellation leaves no terms");

    // (|0⟩ − |1⟩) ⊗ |0⟩ is orthogonal to the Z2-coset span
    let minus = FactorVector::new(vec![q(1, 1), q(-1, 1)]);
    let orth = TensorSumState::product(&z2, vec![minus, FactorVector::basis(2, 0)]);
    let c = apply_pk_complement(&orth, &pw, &opts).unwrap();
    assert_eq!(expand(&c), expand(&orth));

    let psi = tensor_coset_state::<Q>(&Subgroup::trivial(&z2), &[0, 0]);
    let c = apply_pk_complement(&psi, &pw, &opts).unwrap();
    assert_eq!(c.norm_sq() / psi.norm_sq(), q(3, 4));
}

#[test]
fn term_cap_is_enforced() {
    let z2 = group(GroupSpec::Cyclic(2));
    let psi = tensor_coset_state::<Q>(&Subgroup::trivial(&z2), &[0, 0]);
    let pw = AveragingProjector::new(&Subgroup::whole(&z2));
    let opts = CompressOptions {
        term_cap: 1,
        ..CompressOptions::default()
    };
    assert_eq!(
        apply_pk_complement(&psi, &pw, &opts).unwrap_err(),
        HspError::TermBudgetExceeded { terms: 2, cap: 1 }
    );
}

#[test]
fn compress_merges_and_drops() {
    let z4 = group(GroupSpec::Cyclic(4));
    let f = |a: usize| FactorVector::<Q>::basis(4, a);
    let mk = |c: Q, fs: Vec<FactorVector<Q>>| TensorTerm {
        coeff: c,
        factors: fs.into_iter().map(Arc::new).collect(),
    };
    let x = TensorSumState::from_terms(
        &z4,
        2,
        vec![
            mk(q(1, 2), vec![f(0), f(1)]),
            mk(Q::zero(), vec![f(2), f(2)]),
            mk(q(3, 2), vec![f(0), f(1)]),
            mk(q(1, 1), vec![f(3), f(1)]),
        ],
    );
    let c = compress(&x, &CompressOptions::default());
    assert_eq!(c.term_count(), 2);
    assert_eq!(c.terms()[0].coeff, q(2, 1));
    assert_eq!(expand(&c), expand(&x));
    assert_eq!(inner(&c, &x), inner(&x, &x));
}

/// A random S3 state with built-in linear dependencies: sums over all
/// cosets of a subgroup reproduce coarser coset vectors.
fn dependent_s3_state(seed: u64) -> TensorSumState<f64> {
    use rand::{Rng, SeedableRng};
    let s3 = group(GroupSpec::Symmetric(3));
    let subs = enumerate_subgroups(&s3).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let m = 3;
    let mut terms = Vec::new();
    for _ in 0..10 {
        let k = &subs[rng.gen_range(0..subs.len())];
        let reps: Vec<usize> = (0..m).map(|_| rng.gen_range(0..6)).collect();
        let t = tensor_coset_state::<f64>(k, &reps);
        let mut term = t.terms()[0].clone();
        term.coeff = rng.gen_range(-1.0..1.0);
        terms.push(term);
        // expand the first register over every coset of k: same vector
        // as the whole-group coset in that slot
        if rng.gen_bool(0.5) {
            for c in crate::group::left_cosets(k).cosets() {
                let mut t2 = term_with_first(&terms[terms.len() - 1], FactorVector::indicator(6, c.iter().copied()));
                t2.coeff = 0.25;
                terms.push(t2);
            }
            let mut whole = term_with_first(&terms[terms.len() - 1], FactorVector::indicator(6, 0..6));
            whole.coeff = -0.5;
            terms.push(whole);
        }
    }
    TensorSumState::from_terms(&s3, m, terms)
}

fn term_with_first(t: &TensorTerm<f64>, f: FactorVector<f64>) -> TensorTerm<f64> {
    let mut factors = t.factors.clone();
    factors[0] = Arc::new(f);
    TensorTerm {
        coeff: t.coeff,
        factors,
    }
}

#[test]
fn float_rank_reduction_preserves_norm() {
    let opts = CompressOptions {
        rank_reduction: true,
        ..CompressOptions::default()
    };
    let mut reduced_any = false;
    for seed in 0..20 {
        let x = dependent_s3_state(seed);
        let plain = compress(&x, &CompressOptions::default());
        let reduced = compress(&x, &opts);
        reduced_any |= reduced.term_count() < plain.term_count();
        let reference = x.norm_sq();
        assert!((reduced.norm_sq() - reference).abs() <= 1e-10, "seed {seed}");
        assert!((inner(&reduced, &x) - reference).abs() <= 1e-10, "seed {seed}");
    }
    assert!(reduced_any, "dependent terms should be folded");
}

#[test]
fn float_pruning_drops_tiny_terms() {
    let z2 = group(GroupSpec::Cyclic(2));
    let big = TensorTerm {
        coeff: 1.0,
        factors: vec![Arc::new(FactorVector::basis(2, 0))],
    };
    let tiny = TensorTerm {
        coeff: 1e-20,
        factors: vec![Arc::new(FactorVector::basis(2, 1))],
    };
    let x = TensorSumState::from_terms(&z2, 1, vec![big, tiny]);
    assert_eq!(compress(&x, &CompressOptions::default()).term_count(), 1);
}

#[test]
fn lemma1_closed_form_over_fleet() {
    for spec in [
        GroupSpec::Cyclic(4),
        GroupSpec::Symmetric(3),
        GroupSpec::Quaternion,
        GroupSpec::Product(vec![GroupSpec::Cyclic(2), GroupSpec::Cyclic(2)]),
    ] {
        let g = group(spec);
        let subs = enumerate_subgroups(&g).unwrap();
        for h in &subs {
            for k in &subs {
                let proj = AveragingProjector::new(k);
                for m in 1..=4usize {
                    let reps: Vec<usize> = (0..m).map(|i| (i * 5 + 1) % g.order()).collect();
                    let psi = tensor_coset_state::<Q>(h, &reps);
                    let ratio = inner(&psi, &apply_pk(&psi, &proj)) / psi.norm_sq();
                    let base = q(h.intersection_order(k) as i64, k.order() as i64);
                    assert_eq!(ratio, base.powi(m as u32));
                    if k.is_subgroup_of(h) {
                        assert!(ratio.is_one());
                    } else {
                        assert!(ratio <= q(1, 1 << m));
                    }
                }
            }
        }
    }
}

fn small_state(n: usize, m: usize) -> impl Strategy<Value = Vec<(i64, Vec<Vec<i64>>)>> {
    proptest::collection::vec(
        (-3i64..4, proptest::collection::vec(proptest::collection::vec(-2i64..3, n), m)),
        1..4,
    )
}

fn build(g: &Arc<FiniteGroup>, m: usize, spec: Vec<(i64, Vec<Vec<i64>>)>) -> TensorSumState<Q> {
    let terms = spec
        .into_iter()
        .map(|(c, fs)| TensorTerm {
            coeff: q(c, 1),
            factors: fs
                .into_iter()
                .map(|v| Arc::new(FactorVector::new(v.into_iter().map(|a| q(a, 1)).collect())))
                .collect(),
        })
        .collect();
    TensorSumState::from_terms(g, m, terms)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_projector_laws(xs in small_state(6, 3), ys in small_state(6, 3), ki in 0usize..6) {
        let s3 = group(GroupSpec::Symmetric(3));
        let k = &enumerate_subgroups(&s3).unwrap()[ki];
        let proj = AveragingProjector::new(k);
        let x = build(&s3, 3, xs);
        let y = build(&s3, 3, ys);
        let px = apply_pk(&x, &proj);
        prop_assert_eq!(expand(&apply_pk(&px, &proj)), expand(&px));
        prop_assert_eq!(inner(&px, &y), inner(&x, &apply_pk(&y, &proj)));
        let cx = apply_pk_complement(&x, &proj, &CompressOptions::default()).unwrap();
        let sum: Vec<Q> = expand(&px).iter().zip(expand(&cx)).map(|(a, b)| a + b).collect();
        prop_assert_eq!(sum, expand(&x));
        // structured P_K agrees with the span-definition projector
        prop_assert_eq!(expand(&px), dense_pk(&expand(&x), k, 3));
        prop_assert_eq!(inner(&x, &y), dot(&expand(&x), &expand(&y)));
    }

    #[test]
    fn lemma1_is_representative_independent(reps in proptest::collection::vec(0usize..8, 1..5),
                                            hi in 0usize..10, ki in 0usize..10) {
        let d4 = group(GroupSpec::Dihedral(4));
        let subs = enumerate_subgroups(&d4).unwrap();
        let (h, k) = (&subs[hi], &subs[ki]);
        let proj = AveragingProjector::new(k);
        let psi = tensor_coset_state::<Q>(h, &reps);
        let base = tensor_coset_state::<Q>(h, &vec![0; reps.len()]);
        let r1 = inner(&psi, &apply_pk(&psi, &proj)) / psi.norm_sq();
        let r0 = inner(&base, &apply_pk(&base, &proj)) / base.norm_sq();
        prop_assert_eq!(r1, r0);
    }
}
