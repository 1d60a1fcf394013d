//! Built-in group families and the group spec string grammar:
//! `Z:n`, `D:n` (order 2n), `S:n` (n ≤ 5), `Q8`, products joined by `x`,
//! and `file:<path>` for a JSON Cayley table.

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use super::{Element, FiniteGroup, MAX_ORDER};
use crate::error::{HspError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    Cyclic(usize),
    /// Dihedral group of order 2n.
    Dihedral(usize),
    Symmetric(usize),
    Quaternion,
    Product(Vec<GroupSpec>),
}

/// Families understood by [`parse_group_spec`], for `groups list`.
pub const NAMED_FAMILIES: &[(&str, &str)] = &[
    ("Z:n", "cyclic group of order n (1 <= n <= 128); elements 0..n-1"),
    ("D:n", "dihedral group of order 2n (1 <= n <= 64); elements r^k s^j named r2, s, r3s, ..."),
    ("S:n", "symmetric group on n points (1 <= n <= 5); elements in cycle notation, e.g. (012)(34)"),
    ("Q8", "quaternion group; elements 1, -1, i, -i, j, -j, k, -k"),
    ("AxB", "direct product, e.g. Z:2xZ:4; elements named (a,b)"),
    ("file:<path>", "JSON document {\"order\": n, \"table\": [[...]]} with 0-based indices"),
];

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Cyclic(n) => write!(f, "Z:{n}"),
            GroupSpec::Dihedral(n) => write!(f, "D:{n}"),
            GroupSpec::Symmetric(n) => write!(f, "S:{n}"),
            GroupSpec::Quaternion => write!(f, "Q8"),
            GroupSpec::Product(parts) => {
                let s: Vec<String> = parts.iter().map(ToString::to_string).collect();
                write!(f, "{}", s.join("x"))
            }
        }
    }
}

impl GroupSpec {
    fn order(&self) -> Option<usize> {
        match self {
            GroupSpec::Cyclic(n) | GroupSpec::Dihedral(n) if *n == 0 => None,
            GroupSpec::Cyclic(n) => Some(*n),
            GroupSpec::Dihedral(n) => n.checked_mul(2),
            GroupSpec::Symmetric(n) => (1..=*n).try_fold(1usize, |a, k| a.checked_mul(k)),
            GroupSpec::Quaternion => Some(8),
            GroupSpec::Product(parts) => parts
                .iter()
                .try_fold(1usize, |a, p| p.order().and_then(|o| a.checked_mul(o))),
        }
    }
}

/// Parses one spec string without touching the filesystem. `file:` specs
/// go through [`parse_group_string`].
pub fn parse_group_spec(s: &str) -> Result<GroupSpec> {
    let s = s.trim();
    let parts: Vec<&str> = s.split('x').collect();
    if parts.len() > 1 {
        let factors = parts.iter().map(|p| parse_atom(p)).collect::<Result<Vec<_>>>()?;
        return Ok(GroupSpec::Product(factors));
    }
    parse_atom(s)
}

fn parse_atom(s: &str) -> Result<GroupSpec> {
    let s = s.trim();
    let unsupported = || HspError::UnsupportedGroup(format!("cannot parse group spec {s:?}"));
    if s == "Q8" {
        return Ok(GroupSpec::Quaternion);
    }
    let (family, arg) = s.split_once(':').ok_or_else(unsupported)?;
    let n: usize = arg.trim().parse().map_err(|_| unsupported())?;
    match family.trim() {
        "Z" => Ok(GroupSpec::Cyclic(n)),
        "D" => Ok(GroupSpec::Dihedral(n)),
        "S" => Ok(GroupSpec::Symmetric(n)),
        _ => Err(unsupported()),
    }
}

/// Resolves any CLI group string, including `file:<path>`.
pub fn parse_group_string(s: &str) -> Result<FiniteGroup> {
    match s.trim().strip_prefix("file:") {
        Some(path) => load_group_file(Path::new(path)),
        None => make_named(&parse_group_spec(s)?),
    }
}

#[derive(Deserialize)]
struct GroupFile {
    order: usize,
    table: Vec<Vec<Element>>,
}

pub fn load_group_file(path: &Path) -> Result<FiniteGroup> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HspError::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let doc: GroupFile = serde_json::from_str(&text)
        .map_err(|e| HspError::InvalidInput(format!("bad group file {}: {e}", path.display())))?;
    if doc.table.len() != doc.order {
        return Err(HspError::NotAGroup {
            reason: format!("declared order {} but table has {} rows", doc.order, doc.table.len()),
        });
    }
    FiniteGroup::from_cayley(&doc.table)
}

pub fn make_named(spec: &GroupSpec) -> Result<FiniteGroup> {
    let order = spec
        .order()
        .ok_or_else(|| HspError::UnsupportedGroup(format!("{spec}: order must be positive")))?;
    if order > MAX_ORDER {
        return Err(HspError::UnsupportedGroup(format!(
            "{spec} has order {order}, cap is {MAX_ORDER}"
        )));
    }
    let (table, names) = build(spec)?;
    FiniteGroup::from_cayley_named(&table, names)
}

type Built = (Vec<Vec<Element>>, Vec<String>);

fn build(spec: &GroupSpec) -> Result<Built> {
    match spec {
        GroupSpec::Cyclic(n) => Ok(cyclic(*n)),
        GroupSpec::Dihedral(n) => Ok(dihedral(*n)),
        GroupSpec::Symmetric(n) if *n <= 5 => Ok(symmetric(*n)),
        GroupSpec::Symmetric(n) => Err(HspError::UnsupportedGroup(format!("S:{n} (n <= 5 only)"))),
        GroupSpec::Quaternion => Ok(quaternion()),
        GroupSpec::Product(parts) => {
            let built = parts.iter().map(build).collect::<Result<Vec<_>>>()?;
            Ok(product(&built))
        }
    }
}

fn cyclic(n: usize) -> Built {
    let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    let names = (0..n).map(|a| a.to_string()).collect();
    (table, names)
}

/// Element r^k s^j lives at index k + n·j; s r s = r⁻¹.
fn dihedral(n: usize) -> Built {
    let idx = |k: usize, j: usize| k % n + n * (j % 2);
    let mut table = vec![vec![0; 2 * n]; 2 * n];
    for (a, row) in table.iter_mut().enumerate() {
        let (ka, ja) = (a % n, a / n);
        for (b, cell) in row.iter_mut().enumerate() {
            let (kb, jb) = (b % n, b / n);
            // r^ka s^ja · r^kb s^jb = r^(ka ± kb) s^(ja+jb)
            let k = if ja == 0 { ka + kb } else { ka + n - kb };
            *cell = idx(k, ja + jb);
        }
    }
    let names = (0..2 * n)
        .map(|a| {
            let (k, j) = (a % n, a / n);
            let r = match k {
                0 => String::new(),
                1 => "r".to_string(),
                _ => format!("r{k}"),
            };
            match (r.is_empty(), j) {
                (true, 0) => "e".to_string(),
                (_, 0) => r,
                _ => format!("{r}s"),
            }
        })
        .collect();
    (table, names)
}

/// Permutations in lexicographic order (identity first); (ab)(x) = a(b(x)).
fn symmetric(n: usize) -> Built {
    let mut perms: Vec<Vec<usize>> = Vec::new();
    permutations(&mut (0..n).collect(), 0, &mut perms);
    perms.sort();
    let index = |p: &[usize]| perms.binary_search_by(|q| q.as_slice().cmp(p)).unwrap();
    let table = perms
        .iter()
        .map(|a| {
            perms
                .iter()
                .map(|b| {
                    let c: Vec<usize> = (0..n).map(|x| a[b[x]]).collect();
                    index(&c)
                })
                .collect()
        })
        .collect();
    let names = perms.iter().map(|p| cycle_notation(p)).collect();
    (table, names)
}

fn permutations(cur: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == cur.len() {
        out.push(cur.clone());
        return;
    }
    for i in k..cur.len() {
        cur.swap(k, i);
        permutations(cur, k + 1, out);
        cur.swap(k, i);
    }
}

fn cycle_notation(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] == start {
            continue;
        }
        out.push('(');
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            out.push_str(&x.to_string());
            x = p[x];
        }
        out.push(')');
    }
    if out.is_empty() {
        out.push('e');
    }
    out
}

/// Units ±1, ±i, ±j, ±k stored as (sign, unit) with unit 0..4 = 1, i, j, k.
fn quaternion() -> Built {
    const ORDER: [(bool, usize); 8] = [
        (false, 0),
        (true, 0),
        (false, 1),
        (true, 1),
        (false, 2),
        (true, 2),
        (false, 3),
        (true, 3),
    ];
    // unit products: (negate, unit)
    let unit_mul = |a: usize, b: usize| -> (bool, usize) {
        match (a, b) {
            (0, x) | (x, 0) => (false, x),
            (x, y) if x == y => (true, 0),
            (1, 2) => (false, 3),
            (2, 3) => (false, 1),
            (3, 1) => (false, 2),
            (2, 1) => (true, 3),
            (3, 2) => (true, 1),
            (1, 3) => (true, 2),
            _ => unreachable!(),
        }
    };
    let table = ORDER
        .iter()
        .map(|&(sa, ua)| {
            ORDER
                .iter()
                .map(|&(sb, ub)| {
                    let (neg, u) = unit_mul(ua, ub);
                    let sign = sa ^ sb ^ neg;
                    ORDER.iter().position(|&e| e == (sign, u)).unwrap()
                })
                .collect()
        })
        .collect();
    let names = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    (table, names)
}

/// Mixed-radix direct product with the first factor most significant.
fn product(parts: &[Built]) -> Built {
    let orders: Vec<usize> = parts.iter().map(|p| p.0.len()).collect();
    let total: usize = orders.iter().product();
    let digits = |mut x: usize| -> Vec<usize> {
        let mut d = vec![0; orders.len()];
        for i in (0..orders.len()).rev() {
            d[i] = x % orders[i];
            x /= orders[i];
        }
        d
    };
    let compose = |d: &[usize]| d.iter().zip(&orders).fold(0, |acc, (&x, &o)| acc * o + x);
    let table = (0..total)
        .map(|a| {
            let da = digits(a);
            (0..total)
                .map(|b| {
                    let db = digits(b);
                    let dc: Vec<usize> = (0..orders.len()).map(|i| parts[i].0[da[i]][db[i]]).collect();
                    compose(&dc)
                })
                .collect()
        })
        .collect();
    let names = (0..total)
        .map(|a| {
            let d = digits(a);
            let inner: Vec<&str> = d.iter().enumerate().map(|(i, &x)| parts[i].1[x].as_str()).collect();
            format!("({})", inner.join(","))
        })
        .collect();
    (table, names)
}
