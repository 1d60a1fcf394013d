use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::{Element, FiniteGroup};
use crate::error::{HspError, Result};

/// Largest order for which the full subgroup lattice is enumerated.
pub const ENUMERATION_CAP: usize = 24;

/// A subgroup, stored as a sorted member list plus a membership mask.
#[derive(Clone)]
pub struct Subgroup {
    group: Arc<FiniteGroup>,
    members: Vec<Element>,
    mask: Vec<bool>,
}

impl Subgroup {
    /// Builds a subgroup from an explicit member set, checking closure.
    pub fn from_members(group: &Arc<FiniteGroup>, members: impl IntoIterator<Item = Element>) -> Result<Self> {
        let mut mask = vec![false; group.order()];
        for x in members {
            if x >= group.order() {
                return Err(HspError::InvalidInput(format!("element {x} out of range")));
            }
            mask[x] = true;
        }
        let sub = Self::from_mask(group, mask);
        if !sub.contains(group.identity()) {
            return Err(HspError::InvalidInput("subset does not contain the identity".into()));
        }
        for &a in &sub.members {
            if !sub.contains(group.inv(a)) {
                return Err(HspError::InvalidInput(format!("subset not closed under inverse at {a}")));
            }
            for &b in &sub.members {
                if !sub.contains(group.mul(a, b)) {
                    return Err(HspError::InvalidInput(format!(
                        "subset not closed under product at ({a}, {b})"
                    )));
                }
            }
        }
        debug_assert_eq!(group.order() % sub.order(), 0, "Lagrange");
        Ok(sub)
    }

    fn from_mask(group: &Arc<FiniteGroup>, mask: Vec<bool>) -> Self {
        let members = mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect();
        Subgroup {
            group: Arc::clone(group),
            members,
            mask,
        }
    }

    pub fn trivial(group: &Arc<FiniteGroup>) -> Self {
        let mut mask = vec![false; group.order()];
        mask[group.identity()] = true;
        Self::from_mask(group, mask)
    }

    pub fn whole(group: &Arc<FiniteGroup>) -> Self {
        Self::from_mask(group, vec![true; group.order()])
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn members(&self) -> &[Element] {
        &self.members
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn contains(&self, x: Element) -> bool {
        self.mask[x]
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.members.iter().all(|&x| other.contains(x))
    }

    pub fn intersection_order(&self, other: &Subgroup) -> usize {
        self.members.iter().filter(|&&x| other.contains(x)).count()
    }

    /// Display names of the members, in index order.
    pub fn member_names(&self) -> Vec<String> {
        self.members.iter().map(|&x| self.group.name(x).to_string()).collect()
    }
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members
    }
}

impl Eq for Subgroup {}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subgroup{:?}", self.members)
    }
}

/// ⟨g⟩ = {e, g, g², …}.
pub fn cyclic_subgroup(group: &Arc<FiniteGroup>, g: Element) -> Subgroup {
    let mut mask = vec![false; group.order()];
    let mut x = group.identity();
    loop {
        mask[x] = true;
        x = group.mul(x, g);
        if x == group.identity() {
            break;
        }
    }
    Subgroup::from_mask(group, mask)
}

/// Smallest subgroup containing `gens`, by breadth-first closure under
/// right multiplication by generators.
pub fn subgroup_closure(group: &Arc<FiniteGroup>, gens: &[Element]) -> Subgroup {
    let mut mask = vec![false; group.order()];
    let e = group.identity();
    mask[e] = true;
    let mut frontier = vec![e];
    while let Some(x) = frontier.pop() {
        for &g in gens {
            let y = group.mul(x, g);
            if !mask[y] {
                mask[y] = true;
                frontier.push(y);
            }
        }
    }
    Subgroup::from_mask(group, mask)
}

/// The left cosets aK of a subgroup K.
#[derive(Clone, Debug)]
pub struct CosetPartition {
    subgroup: Subgroup,
    coset_of: Vec<usize>,
    cosets: Vec<Vec<Element>>,
    representatives: Vec<Element>,
}

impl CosetPartition {
    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    pub fn coset_of(&self, a: Element) -> usize {
        self.coset_of[a]
    }

    pub fn cosets(&self) -> &[Vec<Element>] {
        &self.cosets
    }

    /// Minimal-index representative of each coset.
    pub fn representatives(&self) -> &[Element] {
        &self.representatives
    }

    pub fn len(&self) -> usize {
        self.cosets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cosets.is_empty()
    }
}

pub fn left_cosets(k: &Subgroup) -> CosetPartition {
    let group = k.group();
    let n = group.order();
    let mut coset_of = vec![usize::MAX; n];
    let mut cosets = Vec::with_capacity(n / k.order());
    let mut representatives = Vec::with_capacity(n / k.order());
    // Scanning upward, the first unassigned element is the minimum of its coset.
    for a in 0..n {
        if coset_of[a] != usize::MAX {
            continue;
        }
        let id = cosets.len();
        let mut coset: Vec<Element> = k.members().iter().map(|&h| group.mul(a, h)).collect();
        coset.sort_unstable();
        for &x in &coset {
            coset_of[x] = id;
        }
        representatives.push(a);
        cosets.push(coset);
    }
    CosetPartition {
        subgroup: k.clone(),
        coset_of,
        cosets,
        representatives,
    }
}

/// One distinct cyclic subgroup together with every element generating it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicClass {
    pub subgroup: Subgroup,
    pub generators: Vec<Element>,
}

/// Distinct ⟨g⟩ over all g, sorted by order then by smallest generator.
pub fn distinct_cyclic_subgroups(group: &Arc<FiniteGroup>) -> Vec<CyclicClass> {
    let mut classes: Vec<CyclicClass> = Vec::new();
    for g in group.elements() {
        let c = cyclic_subgroup(group, g);
        match classes.iter_mut().find(|cl| cl.subgroup == c) {
            Some(cl) => cl.generators.push(g),
            None => classes.push(CyclicClass {
                subgroup: c,
                generators: vec![g],
            }),
        }
    }
    classes.sort_by_key(|cl| (cl.subgroup.order(), cl.generators[0]));
    classes
}

/// Every subgroup of `group`: unions of cyclic subgroups closed to a fixed
/// point. Sorted by order, then lexicographically by members.
pub fn enumerate_subgroups(group: &Arc<FiniteGroup>) -> Result<Vec<Subgroup>> {
    if group.order() > ENUMERATION_CAP {
        return Err(HspError::VerificationScaleExceeded {
            order: group.order(),
            cap: ENUMERATION_CAP,
        });
    }
    let cyclic: Vec<Subgroup> = distinct_cyclic_subgroups(group)
        .into_iter()
        .map(|c| c.subgroup)
        .collect();
    let mut found: BTreeSet<Vec<Element>> = cyclic.iter().map(|s| s.members().to_vec()).collect();
    let mut frontier: Vec<Vec<Element>> = found.iter().cloned().collect();
    // Every subgroup is generated by its cyclic subgroups, so joining the
    // frontier with single cyclic subgroups reaches the whole lattice.
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for s in &frontier {
            for c in &cyclic {
                let mut gens = s.clone();
                gens.extend_from_slice(c.members());
                let joined = subgroup_closure(group, &gens);
                if found.insert(joined.members().to_vec()) {
                    next.push(joined.members().to_vec());
                }
            }
        }
        frontier = next;
    }
    let mut subs: Vec<Subgroup> = found
        .into_iter()
        .map(|m| {
            let mut mask = vec![false; group.order()];
            m.iter().for_each(|&x| mask[x] = true);
            Subgroup::from_mask(group, mask)
        })
        .collect();
    subs.sort_by(|a, b| (a.order(), a.members()).cmp(&(b.order(), b.members())));
    Ok(subs)
}
