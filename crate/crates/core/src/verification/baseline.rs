use crate::error::Result;
use crate::group::Subgroup;
use crate::runtime::{infer_subgroup_from_oracle, OracleFunction};

/// Deterministic classical reference: query f on every element, then read
/// H off the label table. Returns H and the number of queries made (|G|).
pub fn classical_baseline(f: &mut OracleFunction) -> Result<(Subgroup, u64)> {
    let before = f.call_count();
    let group = std::sync::Arc::clone(f.group());
    let labels: Vec<u64> = group.elements().map(|g| f.evaluate(g)).collect();
    let queried = OracleFunction::from_labels(&group, labels)?;
    let h = infer_subgroup_from_oracle(&queried)?;
    Ok((h, f.call_count() - before))
}
