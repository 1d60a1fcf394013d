//! Single-register linear algebra: coset indicator vectors, the
//! coset-averaging projector p_K, and inner products.
//!
//! Vectors are stored unnormalized. Anything reported to a user is a ratio
//! of squared norms, so the 1/√|K| factors cancel and exact mode stays in
//! the rationals.

use std::hash::{Hash, Hasher};

use crate::group::{left_cosets, CosetPartition, Element, Subgroup};
use crate::scalar::Scalar;

/// Real amplitudes over the elements of a group, one per element.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorVector<S> {
    amps: Vec<S>,
}

impl<S: Scalar> FactorVector<S> {
    pub fn new(amps: Vec<S>) -> Self {
        FactorVector { amps }
    }

    pub fn zeros(n: usize) -> Self {
        FactorVector {
            amps: vec![S::zero(); n],
        }
    }

    /// Indicator of a subset of the group.
    pub fn indicator(n: usize, members: impl IntoIterator<Item = Element>) -> Self {
        let mut v = Self::zeros(n);
        for x in members {
            v.amps[x] = S::one();
        }
        v
    }

    pub fn basis(n: usize, x: Element) -> Self {
        Self::indicator(n, [x])
    }

    pub fn amps(&self) -> &[S] {
        &self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sq(&self) -> S {
        factor_inner(self, self)
    }

    pub(crate) fn feed_hash<H: Hasher>(&self, state: &mut H) {
        self.amps.len().hash(state);
        for a in &self.amps {
            a.feed_hash(state);
        }
    }
}

/// Indicator of the left coset aK; its squared norm is |K|.
pub fn coset_vector<S: Scalar>(a: Element, k: &Subgroup) -> FactorVector<S> {
    let g = k.group();
    FactorVector::indicator(g.order(), k.members().iter().map(|&h| g.mul(a, h)))
}

/// Σ_g u_g v_g.
pub fn factor_inner<S: Scalar>(u: &FactorVector<S>, v: &FactorVector<S>) -> S {
    debug_assert_eq!(u.len(), v.len());
    u.amps
        .iter()
        .zip(&v.amps)
        .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b)
}

/// p_K: replaces each amplitude by the mean over its left coset of K.
#[derive(Clone, Debug)]
pub struct AveragingProjector {
    partition: CosetPartition,
}

impl AveragingProjector {
    pub fn new(k: &Subgroup) -> Self {
        AveragingProjector {
            partition: left_cosets(k),
        }
    }

    pub fn partition(&self) -> &CosetPartition {
        &self.partition
    }

    pub fn subgroup(&self) -> &Subgroup {
        self.partition.subgroup()
    }

    pub fn apply<S: Scalar>(&self, v: &FactorVector<S>) -> FactorVector<S> {
        let size = S::from_u64(self.subgroup().order() as u64);
        let mut out = FactorVector::zeros(v.len());
        for coset in self.partition.cosets() {
            let sum = coset
                .iter()
                .fold(S::zero(), |acc, &x| acc + &v.amps[x]);
            let mean = sum / size.clone();
            for &x in coset {
                out.amps[x] = mean.clone();
            }
        }
        out
    }
}

/// ⟨aH|bK⟩² for the normalized coset states, i.e. d²/(|H||K|) with
/// d = |aH ∩ bK|.
pub fn normalized_overlap_sq<S: Scalar>(a: Element, h: &Subgroup, b: Element, k: &Subgroup) -> S {
    let u = coset_vector::<S>(a, h);
    let v = coset_vector::<S>(b, k);
    let ip = factor_inner(&u, &v);
    ip.clone() * &ip / (factor_inner(&u, &u) * &factor_inner(&v, &v))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use num_rational::BigRational;
    use num_traits::Zero;
    use proptest::prelude::*;

    use super::*;
    use crate::group::{enumerate_subgroups, make_named, subgroup_closure, FiniteGroup, GroupSpec};

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    fn group(spec: GroupSpec) -> Arc<FiniteGroup> {
        Arc::new(make_named(&spec).unwrap())
    }

    /// Dense |G|×|G| matrix of p_K built from the coset relation a⁻¹b ∈ K.
    fn dense_projector(k: &Subgroup) -> Vec<Vec<Q>> {
        let g = k.group();
        let w = q(1, k.order() as i64);
        g.elements()
            .map(|a| {
                g.elements()
                    .map(|b| if k.contains(g.mul(g.inv(a), b)) { w.clone() } else { Q::zero() })
                    .collect()
            })
            .collect()
    }

    fn matvec(m: &[Vec<Q>], v: &FactorVector<Q>) -> FactorVector<Q> {
        FactorVector::new(
            m.iter()
                .map(|row| row.iter().zip(v.amps()).fold(Q::zero(), |s, (a, b)| s + a * b))
                .collect(),
        )
    }

    #[test]
    fn coset_vector_examples() {
        let z1 = group(GroupSpec::Cyclic(1));
        let e = Subgroup::trivial(&z1);
        assert_eq!(coset_vector::<Q>(0, &e), FactorVector::basis(1, 0));
        let z4 = group(GroupSpec::Cyclic(4));
        let k = subgroup_closure(&z4, &[2]);
        let v = coset_vector::<Q>(1, &k);
        assert_eq!(v.amps(), &[q(0, 1), q(1, 1), q(0, 1), q(1, 1)]);
        let s3 = group(GroupSpec::Symmetric(3));
        let k = subgroup_closure(&s3, &[s3.parse_element("(12)").unwrap()]);
        let v = coset_vector::<Q>(2, &k);
        assert_eq!(v.norm_sq(), q(2, 1));
    }

    #[test]
    fn averaging_examples() {
        let z4 = group(GroupSpec::Cyclic(4));
        let v = FactorVector::new(vec![q(3, 1), q(-1, 2), q(5, 7), q(0, 1)]);
        assert_eq!(AveragingProjector::new(&Subgroup::trivial(&z4)).apply(&v), v);

        let z2 = group(GroupSpec::Cyclic(2));
        let p = AveragingProjector::new(&Subgroup::whole(&z2));
        let out = p.apply(&FactorVector::new(vec![q(1, 1), q(0, 1)]));
        assert_eq!(out.amps(), &[q(1, 2), q(1, 2)]);

        // Z4, K = {0,2}, v = (1,1,0,0): cosets {0,2} and {1,3} both average to 1/2
        let k = subgroup_closure(&z4, &[2]);
        let v = FactorVector::new(vec![q(1, 1), q(1, 1), q(0, 1), q(0, 1)]);
        let out = AveragingProjector::new(&k).apply(&v);
        assert_eq!(out.amps(), &[q(1, 2), q(1, 2), q(1, 2), q(1, 2)]);
        assert_eq!(out, matvec(&dense_projector(&k), &v));
    }

    #[test]
    fn inner_examples() {
        let z4 = group(GroupSpec::Cyclic(4));
        let k = subgroup_closure(&z4, &[2]);
        let u = coset_vector::<Q>(0, &k);
        assert_eq!(factor_inner(&u, &u), q(2, 1));
        assert_eq!(factor_inner(&u, &coset_vector(1, &k)), Q::zero());
        assert_eq!(factor_inner(&u, &coset_vector(0, &Subgroup::whole(&z4))), q(2, 1));
    }

    #[test]
    fn overlap_examples() {
        let z4 = group(GroupSpec::Cyclic(4));
        let h = subgroup_closure(&z4, &[2]);
        assert_eq!(normalized_overlap_sq::<Q>(1, &h, 1, &h), q(1, 1));
        assert_eq!(normalized_overlap_sq::<Q>(0, &h, 0, &Subgroup::whole(&z4)), q(1, 2));
        let z2 = group(GroupSpec::Cyclic(2));
        let e = Subgroup::trivial(&z2);
        assert_eq!(normalized_overlap_sq::<Q>(0, &e, 1, &e), Q::zero());
    }

    #[test]
    fn overlap_formula_over_all_subgroup_pairs() {
        let fleet = [
            GroupSpec::Cyclic(4),
            GroupSpec::Cyclic(6),
            GroupSpec::Symmetric(3),
            GroupSpec::Dihedral(4),
            GroupSpec::Quaternion,
            GroupSpec::Product(vec![GroupSpec::Cyclic(2), GroupSpec::Cyclic(2)]),
        ];
        for spec in fleet {
            let g = group(spec);
            let subs = enumerate_subgroups(&g).unwrap();
            for h in &subs {
                for k in &subs {
                    let d = h.intersection_order(k) as i64;
                    let expected = q(d * d, (h.order() * k.order()) as i64);
                    for a in g.elements() {
                        for b in g.elements() {
                            let meet = h
                                .members()
                                .iter()
                                .filter(|&&x| k.contains(g.mul(g.inv(b), g.mul(a, x))))
                                .count();
                            let got = normalized_overlap_sq::<Q>(a, h, b, k);
                            if meet == 0 {
                                assert!(got.is_zero());
                            } else {
                                assert_eq!(meet as i64, d, "|aH ∩ bK| is 0 or |H ∩ K|");
                                assert_eq!(got, expected);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn matches_dense_projector_and_coarser_absorbs_finer() {
        let g = group(GroupSpec::Dihedral(4));
        let subs = enumerate_subgroups(&g).unwrap();
        let v = FactorVector::new((0..8).map(|i| q(i * i - 3, i + 1)).collect());
        for k in &subs {
            let p = AveragingProjector::new(k);
            assert_eq!(p.apply(&v), matvec(&dense_projector(k), &v));
            for k2 in &subs {
                if k2.is_subgroup_of(k) {
                    let fine = AveragingProjector::new(k2);
                    assert_eq!(p.apply(&fine.apply(&v)), p.apply(&v));
                }
            }
        }
    }

    fn rational_vec(n: usize) -> impl Strategy<Value = FactorVector<Q>> {
        proptest::collection::vec((-20i64..20, 1i64..9), n)
            .prop_map(|v| FactorVector::new(v.into_iter().map(|(a, b)| q(a, b)).collect()))
    }

    proptest! {
        #[test]
        fn projector_laws(gens in proptest::collection::vec(0usize..6, 0..2),
                          u in rational_vec(6), v in rational_vec(6), b in 0usize..6) {
            let s3 = group(GroupSpec::Symmetric(3));
            let k = subgroup_closure(&s3, &gens);
            let p = AveragingProjector::new(&k);
            let pu = p.apply(&u);
            prop_assert_eq!(p.apply(&pu), pu.clone());
            prop_assert_eq!(factor_inner(&pu, &v), factor_inner(&u, &p.apply(&v)));
            let c = coset_vector::<Q>(b, &k);
            prop_assert_eq!(p.apply(&c), c);
        }
    }
}
