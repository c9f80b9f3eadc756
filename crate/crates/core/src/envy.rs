//! Minimum `c` for which an allocation is envy-free up to `c` goods.
//!
//! For an additive non-negative valuation, the cheapest way to kill envy
//! toward a bundle is to remove its most valuable items first, so the
//! smallest removal count is found greedily. With 0/1 valuations this
//! collapses to `max(0, v(other) - v(own))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Allocation, Instance, ItemBits, Valuation};
use crate::rational::Rational;

/// Smallest removal counts for every (couple, bundle, agent) triple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvyReport {
    /// The allocation is EFc exactly for `c >= c_star`.
    pub c_star: usize,
    /// `per_pair[i][j][r]`: items agent `r` of couple `i` must remove from `S_j`.
    pub per_pair: Vec<Vec<[usize; 2]>>,
}

impl EnvyReport {
    pub fn is_efc(&self, c: usize) -> bool {
        c >= self.c_star
    }
}

/// Items of `other` to remove, most valuable first (ties to the lowest index),
/// until `v(own) >= v(other \ removed)`.
pub fn removal_set(v: &Valuation, own: &ItemBits, other: &ItemBits) -> Vec<usize> {
    let mut deficit = v.value(other) - v.value(own);
    if deficit <= Rational::ZERO {
        return Vec::new();
    }
    let mut items: Vec<usize> = other.ones().collect();
    // stable sort keeps ascending index among equal values
    items.sort_by_key(|&x| std::cmp::Reverse(v.get(x)));
    let mut removed = Vec::new();
    for x in items {
        if deficit <= Rational::ZERO {
            break;
        }
        deficit = deficit - v.get(x);
        removed.push(x);
    }
    removed
}

/// Smallest `t` such that removing `t` items from `other` leaves it worth no
/// more than `own` to `v`.
pub fn removal_count(v: &Valuation, own: &ItemBits, other: &ItemBits) -> usize {
    removal_set(v, own, other).len()
}

/// [`removal_count`] for the indicator valuation of `a`.
pub fn removal_count_binary(a: &ItemBits, own: &ItemBits, other: &ItemBits) -> usize {
    a.intersection_count(other)
        .saturating_sub(a.intersection_count(own))
}

/// The smallest `c` such that `alloc` is EFc for `inst`, with per-pair detail.
pub fn min_efc(inst: &Instance, alloc: &Allocation) -> Result<EnvyReport> {
    check_dims(inst, alloc)?;
    let n = inst.n();
    let mut per_pair = vec![vec![[0usize; 2]; n]; n];
    if inst.is_binary() {
        let counts = binary_bundle_values(inst, alloc);
        for i in 0..n {
            for j in 0..n {
                for r in 0..2 {
                    per_pair[i][j][r] = counts[i][r][j].saturating_sub(counts[i][r][i]);
                }
            }
        }
    } else {
        let bundles = alloc.bundles();
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                let couple = inst.couple(i);
                per_pair[i][j] =
                    [0, 1].map(|r| removal_count(couple.agent(r), &bundles[i], &bundles[j]));
            }
        }
    }
    let c_star = per_pair
        .iter()
        .flatten()
        .flatten()
        .copied()
        .max()
        .unwrap_or(0);
    Ok(EnvyReport { c_star, per_pair })
}

pub(crate) fn check_dims(inst: &Instance, alloc: &Allocation) -> Result<()> {
    if inst.m() != alloc.m() {
        return Err(Error::DimensionMismatch(format!(
            "instance has m = {} items but the allocation covers {}",
            inst.m(),
            alloc.m()
        )));
    }
    if inst.n() != alloc.n() {
        return Err(Error::DimensionMismatch(format!(
            "instance has n = {} couples but the allocation has {}",
            inst.n(),
            alloc.n()
        )));
    }
    Ok(())
}

/// `out[i][r][j] = v_i^r(S_j)` for a binary instance.
pub(crate) fn binary_bundle_values(inst: &Instance, alloc: &Allocation) -> Vec<[Vec<usize>; 2]> {
    let n = inst.n();
    let mut out = vec![[vec![0usize; n], vec![0usize; n]]; n];
    for (x, &j) in alloc.owner().iter().enumerate() {
        for (i, couple) in inst.couples().iter().enumerate() {
            if couple.agent1.get(x).is_one() {
                out[i][0][j] += 1;
            }
            if couple.agent2.get(x).is_one() {
                out[i][1][j] += 1;
            }
        }
    }
    out
}
