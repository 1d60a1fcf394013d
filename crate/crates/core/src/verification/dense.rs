//! The literal |G|^m statevector, used only as an oracle.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{HspError, Result};
use crate::group::{Element, FiniteGroup, Subgroup};
use crate::scalar::Scalar;
use crate::tensor::TensorSumState;

/// Largest dense dimension |G|^m allowed.
pub const DENSE_CAP: usize = 1_000_000;

/// Amplitudes indexed by the mixed-radix tuple (g_1, …, g_m), first
/// register most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState<S> {
    group: Arc<FiniteGroup>,
    m: usize,
    amps: Vec<S>,
}

fn checked_dim(n: usize, m: usize) -> Result<usize> {
    let dim = (n as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if dim > DENSE_CAP as u128 {
        return Err(HspError::DenseCapExceeded { dim, cap: DENSE_CAP });
    }
    Ok(dim as usize)
}

fn tuple_of(mut idx: usize, n: usize, m: usize) -> Vec<Element> {
    let mut t = vec![0; m];
    for j in (0..m).rev() {
        t[j] = idx % n;
        idx /= n;
    }
    t
}

impl<S: Scalar> DenseState<S> {
    pub fn amps(&self) -> &[S] {
        &self.amps
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn norm_sq(&self) -> S {
        dense_dot(self, self)
    }

    pub fn sub(&self, other: &Self) -> Self {
        DenseState {
            group: Arc::clone(&self.group),
            m: self.m,
            amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }
}

/// amps[(g_1..g_m)] = Σ_t c_t Π_j f_{t,j}[g_j].
pub fn dense_from_tensor<S: Scalar>(x: &TensorSumState<S>) -> Result<DenseState<S>> {
    let n = x.group().order();
    let m = x.m();
    let dim = checked_dim(n, m)?;
    let amps = (0..dim)
        .map(|idx| {
            let t = tuple_of(idx, n, m);
            x.terms().iter().fold(S::zero(), |acc, term| {
                let mut p = term.coeff.clone();
                for (f, &g) in term.factors.iter().zip(&t) {
                    p = p * &f.amps()[g];
                }
                acc + p
            })
        })
        .collect();
    Ok(DenseState {
        group: Arc::clone(x.group()),
        m,
        amps,
    })
}

/// Unnormalized ⊗_j |S_j⟩ for arbitrary subsets S_j, built amplitude by
/// amplitude.
pub fn dense_coset_state<S: Scalar>(group: &Arc<FiniteGroup>, sets: &[Vec<Element>]) -> Result<DenseState<S>> {
    let n = group.order();
    let m = sets.len();
    let dim = checked_dim(n, m)?;
    let masks: Vec<Vec<bool>> = sets
        .iter()
        .map(|s| {
            let mut mask = vec![false; n];
            s.iter().for_each(|&x| mask[x] = true);
            mask
        })
        .collect();
    let amps = (0..dim)
        .map(|idx| {
            let t = tuple_of(idx, n, m);
            if t.iter().zip(&masks).all(|(&g, mask)| mask[g]) {
                S::one()
            } else {
                S::zero()
            }
        })
        .collect();
    Ok(DenseState {
        group: Arc::clone(group),
        m,
        amps,
    })
}

pub fn dense_dot<S: Scalar>(a: &DenseState<S>, b: &DenseState<S>) -> S {
    a.amps
        .iter()
        .zip(&b.amps)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y)
}

/// Orthogonal projection onto span{|Ψ(K,{b_i})⟩}. The spanning vectors for
/// distinct coset tuples have disjoint supports, so the projection is the
/// mean over each block b_1K × … × b_mK.
pub fn dense_apply_pk<S: Scalar>(s: &DenseState<S>, k: &Subgroup) -> DenseState<S> {
    let g = &s.group;
    let n = g.order();
    let coset_key: Vec<Element> = g
        .elements()
        .map(|x| k.members().iter().map(|&h| g.mul(x, h)).min().unwrap())
        .collect();
    let block_of = |idx: usize| -> Vec<Element> { tuple_of(idx, n, s.m).into_iter().map(|x| coset_key[x]).collect() };
    let mut sums: HashMap<Vec<Element>, S> = HashMap::new();
    for (idx, a) in s.amps.iter().enumerate() {
        let e = sums.entry(block_of(idx)).or_insert_with(S::zero);
        *e = e.clone() + a;
    }
    let block_size = S::from_u64(k.order() as u64).powi(s.m as u32);
    let amps = (0..s.amps.len())
        .map(|idx| sums[&block_of(idx)].clone() / block_size.clone())
        .collect();
    DenseState {
        group: Arc::clone(&s.group),
        m: s.m,
        amps,
    }
}

pub fn dense_apply_pk_complement<S: Scalar>(s: &DenseState<S>, k: &Subgroup) -> DenseState<S> {
    s.sub(&dense_apply_pk(s, k))
}
