use std::sync::Arc;

use rand::Rng;

use crate::error::{HspError, Result};
use crate::group::{left_cosets, Element, FiniteGroup, Subgroup};

/// A function on G given by its label table, with a call counter.
///
/// Reading `labels()` or `preimage()` is simulator bookkeeping and does not
/// count as a call; only [`OracleFunction::evaluate`] does.
#[derive(Clone, Debug)]
pub struct OracleFunction {
    group: Arc<FiniteGroup>,
    labels: Vec<u64>,
    call_count: u64,
}

impl OracleFunction {
    pub fn from_labels(group: &Arc<FiniteGroup>, labels: Vec<u64>) -> Result<Self> {
        if labels.len() != group.order() {
            return Err(HspError::InvalidInput(format!(
                "{} labels for a group of order {}",
                labels.len(),
                group.order()
            )));
        }
        Ok(OracleFunction {
            group: Arc::clone(group),
            labels,
            call_count: 0,
        })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn call_count(&self) -> u64 {
        self.call_count
    }

    pub fn reset_count(&mut self) {
        self.call_count = 0;
    }

    pub fn evaluate(&mut self, g: Element) -> u64 {
        self.call_count += 1;
        self.labels[g]
    }

    /// {g : f(g) = label}.
    pub fn preimage(&self, label: u64) -> impl Iterator<Item = Element> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter_map(move |(g, &l)| (l == label).then_some(g))
    }
}

/// f(g) = minimal-index representative of gH.
pub fn make_oracle_from_subgroup(h: &Subgroup) -> OracleFunction {
    let part = left_cosets(h);
    let labels = h
        .group()
        .elements()
        .map(|g| part.representatives()[part.coset_of(g)] as u64)
        .collect();
    OracleFunction {
        group: Arc::clone(h.group()),
        labels,
        call_count: 0,
    }
}

/// Recovers H = f⁻¹(f(e)) and checks f(a) = f(b) ⟺ a⁻¹b ∈ H.
pub fn infer_subgroup_from_oracle(f: &OracleFunction) -> Result<Subgroup> {
    let g = f.group();
    let base = f.labels[g.identity()];
    let h = Subgroup::from_members(g, f.preimage(base))
        .map_err(|e| HspError::NotStrictlyPeriodic(format!("level set of f(e) is not a subgroup: {e}")))?;
    for a in g.elements() {
        let ainv = g.inv(a);
        for b in g.elements() {
            let same_label = f.labels[a] == f.labels[b];
            if same_label != h.contains(g.mul(ainv, b)) {
                return Err(HspError::NotStrictlyPeriodic(format!(
                    "elements {a} and {b} break left-coset periodicity"
                )));
            }
        }
    }
    Ok(h)
}

/// m uniform draws a_i ∈ G, each evaluated once through the oracle. The
/// observed labels identify the cosets a_iH of the post-measurement state.
pub fn sample_coset_reps<R: Rng + ?Sized>(f: &mut OracleFunction, m: usize, rng: &mut R) -> (Vec<Element>, Vec<u64>) {
    let n = f.group.order();
    (0..m)
        .map(|_| {
            let a = rng.gen_range(0..n);
            (a, f.evaluate(a))
        })
        .unzip()
}
