//! Finite groups given by Cayley tables, their subgroups and coset
//! partitions.

mod named;
mod subgroup;

pub use named::{
    load_group_file, make_named, parse_group_spec, parse_group_string, GroupSpec, NAMED_FAMILIES,
};
pub use subgroup::{
    cyclic_subgroup, distinct_cyclic_subgroups, enumerate_subgroups, left_cosets,
    subgroup_closure, CosetPartition, CyclicClass, Subgroup, ENUMERATION_CAP,
};

use crate::error::{HspError, Result};

/// Largest group order accepted by any constructor.
pub const MAX_ORDER: usize = 128;

/// Index of an element in its group's Cayley table.
pub type Element = usize;

/// A finite group stored as a validated Cayley table.
///
/// Element indices double as the default test ordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    cayley: Vec<Element>,
    identity: Element,
    inverse: Vec<Element>,
    names: Vec<String>,
}

impl FiniteGroup {
    /// Validates `table` and builds the group. Checks that every row and
    /// column is a permutation, that a two-sided identity exists, and
    /// associativity exhaustively.
    pub fn from_cayley(table: &[Vec<Element>]) -> Result<Self> {
        let names = (0..table.len()).map(|i| i.to_string()).collect();
        Self::from_cayley_named(table, names)
    }

    pub(crate) fn from_cayley_named(table: &[Vec<Element>], names: Vec<String>) -> Result<Self> {
        let n = table.len();
        let bad = |reason: String| Err(HspError::NotAGroup { reason });
        if n == 0 {
            return bad("empty table".into());
        }
        if n > MAX_ORDER {
            return Err(HspError::UnsupportedGroup(format!(
                "order {n} exceeds the cap of {MAX_ORDER}"
            )));
        }
        for (r, row) in table.iter().enumerate() {
            if row.len() != n {
                return bad(format!("row {r} has length {}, expected {n}", row.len()));
            }
            if let Some(&x) = row.iter().find(|&&x| x >= n) {
                return bad(format!("row {r} contains out-of-range entry {x}"));
            }
        }
        for r in 0..n {
            let mut seen = vec![false; n];
            for c in 0..n {
                let x = table[r][c];
                if seen[x] {
                    return bad(format!("row {r} is not a permutation"));
                }
                seen[x] = true;
            }
        }
        for c in 0..n {
            let mut seen = vec![false; n];
            for row in table {
                let x = row[c];
                if seen[x] {
                    return bad(format!("column {c} is not a permutation"));
                }
                seen[x] = true;
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| HspError::NotAGroup {
                reason: "no two-sided identity".into(),
            })?;
        let mut inverse = vec![usize::MAX; n];
        for x in 0..n {
            match (0..n).find(|&y| table[x][y] == identity && table[y][x] == identity) {
                Some(y) => inverse[x] = y,
                None => return bad(format!("element {x} has no two-sided inverse")),
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return bad(format!("not associative at ({a}, {b}, {c})"));
                    }
                }
            }
        }
        let cayley = table.iter().flatten().copied().collect();
        Ok(FiniteGroup {
            order: n,
            cayley,
            identity,
            inverse,
            names,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> Element {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: Element, b: Element) -> Element {
        self.cayley[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, a: Element) -> Element {
        self.inverse[a]
    }

    pub fn elements(&self) -> std::ops::Range<Element> {
        0..self.order
    }

    /// Row-major Cayley table as nested rows.
    pub fn table(&self) -> Vec<Vec<Element>> {
        self.cayley.chunks(self.order).map(<[_]>::to_vec).collect()
    }

    pub fn name(&self, a: Element) -> &str {
        &self.names[a]
    }

    /// Resolves an element from its index or display name.
    pub fn parse_element(&self, token: &str) -> Result<Element> {
        let token = token.trim();
        if let Ok(i) = token.parse::<usize>() {
            if i < self.order {
                return Ok(i);
            }
            return Err(HspError::InvalidInput(format!(
                "element index {i} out of range for order {}",
                self.order
            )));
        }
        self.names
            .iter()
            .position(|n| n == token)
            .ok_or_else(|| HspError::InvalidInput(format!("unknown element name {token:?}")))
    }

    pub fn is_abelian(&self) -> bool {
        self.elements()
            .all(|a| self.elements().all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Multiplicative order of `a`.
    pub fn element_order(&self, a: Element) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }
}
