//! Simulation of the sequential coset-projection algorithm for the hidden
//! subgroup problem on small finite groups.
//!
//! Given an oracle that is strictly periodic on the left cosets of an
//! unknown subgroup H, the algorithm draws m random H-coset states and
//! measures, for each cyclic subgroup K = ⟨g⟩, the two-outcome observable
//! that projects onto the span of K-coset product states. Everything is
//! simulated without materializing the |G|^m dimensional space, in exact
//! rational arithmetic by default.
//!
//! Layout:
//! - [`group`]: Cayley-table groups, subgroups, cosets.
//! - [`coset`]: single-register vectors and the averaging projector p_K.
//! - [`tensor`]: sums of product states and P_K = p_K^{⊗m}.
//! - [`runtime`]: oracle, test schedule, analysis and sampled modes.
//! - [`verification`]: dense oracle and exhaustive bound checkers.
//! - [`report`]/[`cli`]: JSON reports and the `hsp` command line.

pub mod cli;
pub mod coset;
pub mod error;
pub mod group;
pub mod report;
pub mod runtime;
pub mod scalar;
pub mod tensor;
pub mod verification;

pub use error::{HspError, Result};
pub use scalar::{Scalar, ScalarMode};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;
