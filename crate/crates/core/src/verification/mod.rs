//! Independent oracles and exhaustive checkers.
//!
//! Everything here compares the structured engine against either a closed
//! form or the literal |G|^m statevector. Lemma checks use exact rationals
//! and never a tolerance.

mod baseline;
mod dense;
mod lemmas;

pub use baseline::classical_baseline;
pub use dense::{
    dense_apply_pk, dense_apply_pk_complement, dense_coset_state, dense_dot, dense_from_tensor, DenseState,
    DENSE_CAP,
};
pub use lemmas::{check_dense, check_lemma1, check_lemma2, check_success_bound, fleet, FLEET};

use serde::Serialize;

/// One failed case.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub group: String,
    pub h: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<usize>>,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    pub expected: String,
    pub got: String,
}

/// Outcome of one checker. `failures` empty means pass.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub group: String,
    pub cases: usize,
    pub failures: Vec<Failure>,
    #[serde(skip)]
    pub elapsed_ms: u128,
}

impl LemmaReport {
    pub fn new(lemma: &str, group: &str) -> Self {
        LemmaReport {
            lemma: lemma.to_string(),
            group: group.to_string(),
            cases: 0,
            failures: Vec::new(),
            elapsed_ms: 0,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Folds `other` into `self`; used when one command covers several
    /// subgroups or groups.
    pub fn absorb(&mut self, other: LemmaReport) {
        self.cases += other.cases;
        self.failures.extend(other.failures);
        self.elapsed_ms += other.elapsed_ms;
    }
}
