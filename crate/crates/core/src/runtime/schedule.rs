use crate::coset::AveragingProjector;
use crate::group::{distinct_cyclic_subgroups, Element, FiniteGroup, Subgroup};

use std::sync::Arc;

/// One measurement of A_K for a nontrivial cyclic subgroup K.
///
/// Outcome +1 marks every element of K as a member of H; outcome −1 marks
/// exactly `generators` (the h with ⟨h⟩ = K) as non-members.
#[derive(Clone, Debug)]
pub struct ScheduledTest {
    pub subgroup: Subgroup,
    pub generators: Vec<Element>,
    pub projector: AveragingProjector,
}

/// Distinct nontrivial cyclic subgroups, ordered by the first position in
/// `ordering` at which one of their generators appears. ⟨e⟩ is never
/// tested: A_⟨e⟩ is the identity observable.
pub fn test_schedule(group: &Arc<FiniteGroup>, ordering: &[Element]) -> Vec<ScheduledTest> {
    let mut position = vec![usize::MAX; group.order()];
    for (i, &g) in ordering.iter().enumerate() {
        position[g] = i;
    }
    let mut classes: Vec<_> = distinct_cyclic_subgroups(group)
        .into_iter()
        .filter(|c| !c.subgroup.is_trivial())
        .collect();
    classes.sort_by_key(|c| c.generators.iter().map(|&g| position[g]).min());
    classes
        .into_iter()
        .map(|c| {
            let mut generators = c.generators;
            generators.sort_by_key(|&g| position[g]);
            ScheduledTest {
                projector: AveragingProjector::new(&c.subgroup),
                subgroup: c.subgroup,
                generators,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{make_named, GroupSpec};

    fn group(spec: GroupSpec) -> Arc<FiniteGroup> {
        Arc::new(make_named(&spec).unwrap())
    }

    fn natural(g: &FiniteGroup) -> Vec<usize> {
        g.elements().collect()
    }

    #[test]
    fn schedule_examples() {
        let z2 = group(GroupSpec::Cyclic(2));
        let s = test_schedule(&z2, &natural(&z2));
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].subgroup.members(), &[0, 1]);

        let z4 = group(GroupSpec::Cyclic(4));
        let s = test_schedule(&z4, &natural(&z4));
        let members: Vec<_> = s.iter().map(|t| t.subgroup.members().to_vec()).collect();
        assert_eq!(members, vec![vec![0, 1, 2, 3], vec![0, 2]]);
        assert_eq!(s[0].generators, vec![1, 3]);

        let s3 = group(GroupSpec::Symmetric(3));
        let s = test_schedule(&s3, &natural(&s3));
        let orders: Vec<usize> = s.iter().map(|t| t.subgroup.order()).collect();
        assert_eq!(orders.iter().filter(|&&o| o == 2).count(), 3);
        assert_eq!(orders.iter().filter(|&&o| o == 3).count(), 1);
    }

    #[test]
    fn ordering_override_reorders_tests() {
        let z4 = group(GroupSpec::Cyclic(4));
        let s = test_schedule(&z4, &[0, 2, 3, 1]);
        assert_eq!(s[0].subgroup.members(), &[0, 2]);
        assert_eq!(s[1].generators, vec![3, 1]);
    }

    #[test]
    fn generators_cover_every_nonidentity_element_once() {
        let d4 = group(GroupSpec::Dihedral(4));
        let s = test_schedule(&d4, &natural(&d4));
        assert_eq!(s.len(), 6);
        let mut all: Vec<usize> = s.iter().flat_map(|t| t.generators.clone()).collect();
        all.sort();
        assert_eq!(all, (1..8).collect::<Vec<_>>());
    }
}
