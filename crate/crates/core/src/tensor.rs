//! States in the m-fold tensor power of the group register, stored as
//! linear combinations of product terms ⊗_j f_j.
//!
//! The projector onto the span of all K-coset product states factors as
//! p_K^{⊗m}, so P_K acts factor by factor and never touches the |G|^m
//! dimensional space. Factor vectors are shared through `Arc`; interning in
//! [`compress`] keeps equal factors pointer-equal, which the inner product
//! exploits by caching per-position Gram tables.

use std::collections::HashMap;
use std::collections::hash_map::DefaultHasher;
use std::hash::Hasher;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::coset::{coset_vector, factor_inner, AveragingProjector, FactorVector};
use crate::error::{HspError, Result};
use crate::group::{Element, FiniteGroup, Subgroup};
use crate::scalar::{Scalar, ScalarMode};

pub const DEFAULT_TERM_CAP: usize = 4096;
pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-14;

/// Below this many term pairs the inner product runs on one thread.
const PARALLEL_PAIR_THRESHOLD: usize = 4096;

/// Term-growth controls. Pruning and rank reduction only act in float mode.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressOptions {
    pub term_cap: usize,
    /// Relative to the largest term magnitude in the state.
    pub prune_threshold: f64,
    pub rank_reduction: bool,
}

impl Default for CompressOptions {
    fn default() -> Self {
        CompressOptions {
            term_cap: DEFAULT_TERM_CAP,
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
            rank_reduction: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TensorTerm<S> {
    pub coeff: S,
    pub factors: Vec<Arc<FactorVector<S>>>,
}

/// Σ_t coeff_t ⊗_j factors_{t,j}. No terms means the zero vector.
#[derive(Clone, Debug)]
pub struct TensorSumState<S> {
    group: Arc<FiniteGroup>,
    m: usize,
    terms: Vec<TensorTerm<S>>,
    norm_sq_cache: OnceLock<S>,
}

impl<S: Scalar> TensorSumState<S> {
    pub fn zero(group: &Arc<FiniteGroup>, m: usize) -> Self {
        Self::from_terms(group, m, Vec::new())
    }

    pub fn from_terms(group: &Arc<FiniteGroup>, m: usize, terms: Vec<TensorTerm<S>>) -> Self {
        debug_assert!(terms.iter().all(|t| t.factors.len() == m));
        debug_assert!(terms
            .iter()
            .all(|t| t.factors.iter().all(|f| f.len() == group.order())));
        TensorSumState {
            group: Arc::clone(group),
            m,
            terms,
            norm_sq_cache: OnceLock::new(),
        }
    }

    /// A single product term with coefficient 1.
    pub fn product(group: &Arc<FiniteGroup>, factors: Vec<FactorVector<S>>) -> Self {
        let m = factors.len();
        let term = TensorTerm {
            coeff: S::one(),
            factors: factors.into_iter().map(Arc::new).collect(),
        };
        Self::from_terms(group, m, vec![term])
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> &[TensorTerm<S>] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero_terms(&self) -> bool {
        self.terms.is_empty()
    }

    /// ⟨self|self⟩, computed once.
    pub fn norm_sq(&self) -> S {
        self.norm_sq_cache.get_or_init(|| inner(self, self)).clone()
    }

    pub fn scaled(&self, c: &S) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| TensorTerm {
                coeff: t.coeff.clone() * c,
                factors: t.factors.clone(),
            })
            .collect();
        Self::from_terms(&self.group, self.m, terms)
    }
}

/// Unnormalized |Ψ(K,{b_i})⟩ = ⊗_i |b_i K⟩; with K = H this is |Ψ⟩.
pub fn tensor_coset_state<S: Scalar>(k: &Subgroup, reps: &[Element]) -> TensorSumState<S> {
    let mut cache: HashMap<Element, Arc<FactorVector<S>>> = HashMap::new();
    let factors = reps
        .iter()
        .map(|&b| {
            // one vector per distinct coset
            let key = left_coset_key(k, b);
            Arc::clone(cache.entry(key).or_insert_with(|| Arc::new(coset_vector(b, k))))
        })
        .collect();
    let term = TensorTerm {
        coeff: S::one(),
        factors,
    };
    TensorSumState::from_terms(k.group(), reps.len(), vec![term])
}

fn left_coset_key(k: &Subgroup, b: Element) -> Element {
    let g = k.group();
    k.members().iter().map(|&h| g.mul(b, h)).min().unwrap()
}

/// Gram table between the distinct factors of `x` and `y` at one position,
/// plus the per-term indices into it.
struct PositionGram<S> {
    x_idx: Vec<usize>,
    y_idx: Vec<usize>,
    table: Vec<S>,
    y_len: usize,
}

fn distinct_factors<S>(terms: &[TensorTerm<S>], j: usize) -> (Vec<usize>, Vec<Arc<FactorVector<S>>>) {
    let mut seen: HashMap<*const FactorVector<S>, usize> = HashMap::new();
    let mut uniq = Vec::new();
    let idx = terms
        .iter()
        .map(|t| {
            let f = &t.factors[j];
            *seen.entry(Arc::as_ptr(f)).or_insert_with(|| {
                uniq.push(Arc::clone(f));
                uniq.len() - 1
            })
        })
        .collect();
    (idx, uniq)
}

fn position_gram<S: Scalar>(x: &[TensorTerm<S>], y: &[TensorTerm<S>], j: usize) -> PositionGram<S> {
    let (x_idx, xu) = distinct_factors(x, j);
    let (y_idx, yu) = distinct_factors(y, j);
    let mut table = Vec::with_capacity(xu.len() * yu.len());
    for a in &xu {
        for b in &yu {
            table.push(if Arc::ptr_eq(a, b) {
                a.norm_sq()
            } else {
                factor_inner(a, b)
            });
        }
    }
    PositionGram {
        x_idx,
        y_idx,
        table,
        y_len: yu.len(),
    }
}

/// ⟨x|y⟩ = Σ_{s,t} c_s c_t Π_j ⟨x_{s,j}, y_{t,j}⟩.
///
/// Rows are summed independently (possibly in parallel) and then folded in
/// row order, so float results do not depend on the thread count.
pub fn inner<S: Scalar>(x: &TensorSumState<S>, y: &TensorSumState<S>) -> S {
    assert_eq!(x.m, y.m, "inner product of states with different m");
    if x.terms.is_empty() || y.terms.is_empty() {
        return S::zero();
    }
    let grams: Vec<PositionGram<S>> = (0..x.m).map(|j| position_gram(&x.terms, &y.terms, j)).collect();
    let row = |s: usize| -> S {
        let mut acc = S::zero();
        for (t, ty) in y.terms.iter().enumerate() {
            let mut prod = ty.coeff.clone();
            for g in &grams {
                let v = &g.table[g.x_idx[s] * g.y_len + g.y_idx[t]];
                if v.is_negligible(0.0) {
                    prod = S::zero();
                    break;
                }
                prod = prod * v;
            }
            acc = acc + prod;
        }
        acc * &x.terms[s].coeff
    };
    let rows: Vec<S> = if x.terms.len() * y.terms.len() >= PARALLEL_PAIR_THRESHOLD {
        (0..x.terms.len()).into_par_iter().map(row).collect()
    } else {
        (0..x.terms.len()).map(row).collect()
    };
    rows.into_iter().fold(S::zero(), |acc, r| acc + r)
}

pub fn norm_sq<S: Scalar>(x: &TensorSumState<S>) -> S {
    x.norm_sq()
}

/// P_K = p_K^{⊗m}: averages every factor of every term. Term count is
/// unchanged; shared factors are averaged once.
pub fn apply_pk<S: Scalar>(x: &TensorSumState<S>, proj: &AveragingProjector) -> TensorSumState<S> {
    let mut memo: HashMap<*const FactorVector<S>, Arc<FactorVector<S>>> = HashMap::new();
    let terms = x
        .terms
        .iter()
        .map(|t| TensorTerm {
            coeff: t.coeff.clone(),
            factors: t
                .factors
                .iter()
                .map(|f| {
                    Arc::clone(
                        memo.entry(Arc::as_ptr(f))
                            .or_insert_with(|| Arc::new(proj.apply(f))),
                    )
                })
                .collect(),
        })
        .collect();
    TensorSumState::from_terms(&x.group, x.m, terms)
}

/// P_K⊥ x = x − P_K x, compressed.
pub fn apply_pk_complement<S: Scalar>(
    x: &TensorSumState<S>,
    proj: &AveragingProjector,
    opts: &CompressOptions,
) -> Result<TensorSumState<S>> {
    difference(x, &apply_pk(x, proj), opts)
}

/// x − y, compressed.
pub fn difference<S: Scalar>(
    x: &TensorSumState<S>,
    y: &TensorSumState<S>,
    opts: &CompressOptions,
) -> Result<TensorSumState<S>> {
    assert_eq!(x.m, y.m);
    let mut terms = x.terms.clone();
    terms.extend(y.terms.iter().map(|t| TensorTerm {
        coeff: -t.coeff.clone(),
        factors: t.factors.clone(),
    }));
    let out = compress(&TensorSumState::from_terms(&x.group, x.m, terms), opts);
    if out.term_count() > opts.term_cap {
        return Err(HspError::TermBudgetExceeded {
            terms: out.term_count(),
            cap: opts.term_cap,
        });
    }
    Ok(out)
}

/// Merges terms with identical factor lists and drops zero terms. In float
/// mode also prunes negligible terms and, when enabled, folds linearly
/// dependent terms into an independent subset (see [`rank_reduce`]).
pub fn compress<S: Scalar>(x: &TensorSumState<S>, opts: &CompressOptions) -> TensorSumState<S> {
    let m = x.m;
    let mut interned: Vec<HashMap<u64, Vec<Arc<FactorVector<S>>>>> = vec![HashMap::new(); m];
    let mut merged: Vec<TensorTerm<S>> = Vec::new();
    let mut by_factors: HashMap<Vec<usize>, usize> = HashMap::new();

    for t in &x.terms {
        if t.coeff.is_negligible(0.0) || t.factors.iter().any(|f| f.amps().iter().all(|a| a.is_negligible(0.0))) {
            continue;
        }
        let factors: Vec<Arc<FactorVector<S>>> = t
            .factors
            .iter()
            .enumerate()
            .map(|(j, f)| intern(&mut interned[j], f))
            .collect();
        let key: Vec<usize> = factors.iter().map(|f| Arc::as_ptr(f) as usize).collect();
        match by_factors.get(&key) {
            Some(&i) => merged[i].coeff = merged[i].coeff.clone() + &t.coeff,
            None => {
                by_factors.insert(key, merged.len());
                merged.push(TensorTerm {
                    coeff: t.coeff.clone(),
                    factors,
                });
            }
        }
    }
    merged.retain(|t| !t.coeff.is_negligible(0.0));

    if S::MODE == ScalarMode::Float && !merged.is_empty() {
        let magnitude = |t: &TensorTerm<S>| {
            t.coeff.to_f64().abs() * t.factors.iter().map(|f| f.norm_sq().to_f64().sqrt()).product::<f64>()
        };
        let mags: Vec<f64> = merged.iter().map(magnitude).collect();
        let largest = mags.iter().cloned().fold(0.0, f64::max);
        let cut = opts.prune_threshold * largest;
        let mut k = 0;
        merged.retain(|_| {
            k += 1;
            mags[k - 1] >= cut
        });
        if opts.rank_reduction {
            merged = rank_reduce(merged, opts.prune_threshold);
        }
    }
    TensorSumState::from_terms(&x.group, m, merged)
}

fn intern<S: Scalar>(
    table: &mut HashMap<u64, Vec<Arc<FactorVector<S>>>>,
    f: &Arc<FactorVector<S>>,
) -> Arc<FactorVector<S>> {
    let mut h = DefaultHasher::new();
    f.feed_hash(&mut h);
    let bucket = table.entry(h.finish()).or_default();
    if let Some(existing) = bucket.iter().find(|g| Arc::ptr_eq(g, f) || g.amps() == f.amps()) {
        return Arc::clone(existing);
    }
    bucket.push(Arc::clone(f));
    Arc::clone(f)
}

/// Float-mode rank reduction. A pivoted Cholesky factorization of the term
/// Gram matrix picks a linearly independent subset P of the product
/// vectors; every other term t is rewritten as Σ_{p∈P} α_p v_p with
/// G_PP α = G_Pt and its coefficient folded into P. The product structure
/// of surviving terms is untouched.
fn rank_reduce<S: Scalar>(terms: Vec<TensorTerm<S>>, rel_tol: f64) -> Vec<TensorTerm<S>> {
    let n = terms.len();
    if n < 2 {
        return terms;
    }
    let gram: Vec<Vec<f64>> = (0..n)
        .map(|s| {
            (0..n)
                .map(|t| {
                    terms[s].factors.iter().zip(&terms[t].factors).fold(1.0, |acc, (a, b)| {
                        acc * if Arc::ptr_eq(a, b) { a.norm_sq().to_f64() } else { factor_inner(a, b).to_f64() }
                    })
                })
                .collect()
        })
        .collect();
    let pivots = pivoted_cholesky_pivots(&gram, rel_tol);
    if pivots.len() == n {
        return terms;
    }
    let r = pivots.len();
    let gpp: Vec<Vec<f64>> = pivots.iter().map(|&a| pivots.iter().map(|&b| gram[a][b]).collect()).collect();
    let chol = cholesky(&gpp);
    let mut coeffs: Vec<f64> = pivots.iter().map(|&p| terms[p].coeff.to_f64()).collect();
    for t in (0..n).filter(|t| !pivots.contains(t)) {
        let rhs: Vec<f64> = pivots.iter().map(|&p| gram[p][t]).collect();
        let alpha = cholesky_solve(&chol, &rhs);
        let ct = terms[t].coeff.to_f64();
        for i in 0..r {
            coeffs[i] += ct * alpha[i];
        }
    }
    pivots
        .iter()
        .zip(coeffs)
        .map(|(&p, c)| TensorTerm {
            coeff: S::from_f64_lossy(c),
            factors: terms[p].factors.clone(),
        })
        .collect()
}

/// Greedy diagonal pivoting; stops when the largest remaining Schur
/// complement diagonal drops below `rel_tol` times the largest diagonal.
/// Returned pivots are sorted so surviving terms keep their order.
fn pivoted_cholesky_pivots(gram: &[Vec<f64>], rel_tol: f64) -> Vec<usize> {
    let n = gram.len();
    let mut diag: Vec<f64> = (0..n).map(|i| gram[i][i]).collect();
    let max_diag = diag.iter().cloned().fold(0.0, f64::max);
    let mut l: Vec<Vec<f64>> = Vec::new();
    let mut pivots = Vec::new();
    let mut used = vec![false; n];
    while pivots.len() < n {
        let (p, d) = (0..n)
            .filter(|&i| !used[i])
            .map(|i| (i, diag[i]))
            .fold((usize::MAX, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });
        if d <= rel_tol * max_diag {
            break;
        }
        used[p] = true;
        let root = d.sqrt();
        let col: Vec<f64> = (0..n)
            .map(|i| {
                let s: f64 = l.iter().map(|c: &Vec<f64>| c[i] * c[p]).sum();
                (gram[i][p] - s) / root
            })
            .collect();
        for i in 0..n {
            if !used[i] {
                diag[i] -= col[i] * col[i];
            }
        }
        l.push(col);
        pivots.push(p);
    }
    pivots.sort_unstable();
    pivots
}

fn cholesky(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][i] = (a[i][i] - s).max(0.0).sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    l
}

fn cholesky_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i][k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i][i];
    }
    x
}

#[cfg(test)]
mod tests;
