//! Exact search for an allocation with the smallest EFc level, and a
//! round-robin baseline.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::discrepancy::SearchConfig;
use crate::envy::min_efc;
use crate::error::{Error, Result};
use crate::model::{Allocation, Instance};
use crate::search::{self, SearchNode};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub best_c: usize,
    pub best_alloc: Allocation,
    pub nodes: u64,
    /// True when no allocation has a smaller `c_star` than `best_c`.
    pub exhaustive: bool,
}

/// Each couple in `order` (cycled) takes the remaining item its first agent
/// values most, lowest index on ties.
pub fn round_robin(inst: &Instance, order: &[usize]) -> Result<Allocation> {
    if order.is_empty() && inst.m() > 0 {
        return Err(Error::InvalidArgument(
            "pick order must not be empty".into(),
        ));
    }
    if let Some(&bad) = order.iter().find(|&&i| i >= inst.n()) {
        return Err(Error::IndexOutOfRange {
            what: "couple",
            index: bad,
            len: inst.n(),
        });
    }
    let mut owner = vec![usize::MAX; inst.m()];
    for (turn, &i) in order.iter().cycle().take(inst.m()).enumerate() {
        let v = &inst.couple(i).agent1;
        let pick = (0..inst.m())
            .filter(|&x| owner[x] == usize::MAX)
            .fold(None, |best: Option<usize>, x| match best {
                Some(b) if v.get(b) >= v.get(x) => Some(b),
                _ => Some(x),
            })
            .unwrap_or_else(|| unreachable!("turn {turn} has an item left"));
        owner[pick] = i;
    }
    Ok(Allocation::new(inst.n(), owner)?)
}

/// Valuations rescaled by the common denominator: `w[i][r][x]`.
fn integer_weights(inst: &Instance) -> Result<Vec<[Vec<i64>; 2]>> {
    let overflow = || Error::InvalidArgument("valuation denominators overflow i64".into());
    let mut scale = 1i64;
    for c in inst.couples() {
        for v in [&c.agent1, &c.agent2] {
            for q in v.values() {
                scale = scale.lcm(&q.denom());
                if scale > i64::MAX / 1024 {
                    return Err(overflow());
                }
            }
        }
    }
    inst.couples()
        .iter()
        .map(|c| {
            let row = |v: &crate::model::Valuation| -> Result<Vec<i64>> {
                v.values()
                    .iter()
                    .map(|q| {
                        q.numer()
                            .checked_mul(scale / q.denom())
                            .ok_or_else(overflow)
                    })
                    .collect()
            };
            Ok([row(&c.agent1)?, row(&c.agent2)?])
        })
        .collect()
}

const FREE: usize = usize::MAX;

/// Partial allocation. Items are assigned in `order`; couples that are
/// identical as valuation pairs receive their first item in index order.
#[derive(Clone)]
struct AllocNode<'a> {
    n: usize,
    binary: bool,
    w: &'a [[Vec<i64>; 2]],
    order: &'a [usize],
    class_prev: &'a [Option<usize>],
    owner: Vec<usize>,
    depth: usize,
    /// `vals[(i * 2 + r) * n + j] = v_i^r(S_j)`
    vals: Vec<i64>,
    /// `rest[i * 2 + r]` = value of the unassigned items to agent r of couple i
    rest: Vec<i64>,
    sizes: Vec<usize>,
}

impl<'a> AllocNode<'a> {
    fn new(
        n: usize,
        binary: bool,
        w: &'a [[Vec<i64>; 2]],
        order: &'a [usize],
        class_prev: &'a [Option<usize>],
    ) -> Self {
        let rest = w
            .iter()
            .flat_map(|c| [c[0].iter().sum(), c[1].iter().sum()])
            .collect();
        AllocNode {
            n,
            binary,
            w,
            order,
            class_prev,
            owner: vec![FREE; order.len()],
            depth: 0,
            vals: vec![0; n * 2 * n],
            rest,
            sizes: vec![0; n],
        }
    }

    fn removal_bound(&self, i: usize, r: usize, j: usize) -> u64 {
        let n = self.n;
        let base = (i * 2 + r) * n;
        let deficit = self.vals[base + j] - self.vals[base + i] - self.rest[i * 2 + r];
        if deficit <= 0 {
            return 0;
        }
        if self.binary {
            return deficit as u64;
        }
        let mut items: Vec<i64> = (0..self.owner.len())
            .filter(|&x| self.owner[x] == j)
            .map(|x| self.w[i][r][x])
            .collect();
        items.sort_unstable_by(|a, b| b.cmp(a));
        let mut left = deficit;
        let mut t = 0;
        for v in items {
            if left <= 0 {
                break;
            }
            left -= v;
            t += 1;
        }
        t
    }
}

impl SearchNode for AllocNode<'_> {
    fn is_complete(&self) -> bool {
        self.depth == self.order.len()
    }

    fn children(&self, out: &mut Vec<usize>) {
        out.clear();
        out.extend((0..self.n).filter(|&j| self.class_prev[j].is_none_or(|p| self.sizes[p] > 0)));
        let n = self.n;
        let own = |j: usize| self.vals[(j * 2) * n + j] + self.vals[(j * 2 + 1) * n + j];
        out.sort_by_key(|&j| (own(j), j));
    }

    fn push(&mut self, j: usize) {
        let x = self.order[self.depth];
        self.owner[x] = j;
        self.sizes[j] += 1;
        for i in 0..self.n {
            for r in 0..2 {
                let v = self.w[i][r][x];
                self.vals[(i * 2 + r) * self.n + j] += v;
                self.rest[i * 2 + r] -= v;
            }
        }
        self.depth += 1;
    }

    fn pop(&mut self) {
        self.depth -= 1;
        let x = self.order[self.depth];
        let j = self.owner[x];
        self.owner[x] = FREE;
        self.sizes[j] -= 1;
        for i in 0..self.n {
            for r in 0..2 {
                let v = self.w[i][r][x];
                self.vals[(i * 2 + r) * self.n + j] -= v;
                self.rest[i * 2 + r] += v;
            }
        }
    }

    fn lower_bound(&self) -> u64 {
        let mut bound = 0;
        for i in 0..self.n {
            for j in (0..self.n).filter(|&j| j != i) {
                for r in 0..2 {
                    bound = bound.max(self.removal_bound(i, r, j));
                }
            }
        }
        bound
    }

    fn labels(&self) -> Vec<usize> {
        self.owner.clone()
    }
}

/// Allocation minimizing `c_star` over all `n^m` allocations, within a node budget.
pub fn solve_min_efc(inst: &Instance, config: SearchConfig) -> Result<SolveResult> {
    let n = inst.n();
    let m = inst.m();
    let w = integer_weights(inst)?;

    let mut order: Vec<usize> = (0..m).collect();
    let total = |x: usize| -> i64 { w.iter().map(|c| c[0][x] + c[1][x]).sum() };
    order.sort_by_key(|&x| (std::cmp::Reverse(total(x)), x));

    let class_prev: Vec<Option<usize>> = (0..n)
        .map(|j| (0..j).rev().find(|&p| inst.couple(p) == inst.couple(j)))
        .collect();

    let start = round_robin(inst, &(0..n).collect::<Vec<_>>())?;
    let start_c = min_efc(inst, &start)?.c_star;

    let root = AllocNode::new(n, inst.is_binary(), &w, &order, &class_prev);
    let out = search::minimize(
        root,
        (start_c as u64, start.owner().to_vec()),
        config.limits(),
    );
    let best_alloc = Allocation::new(n, out.labels)?;
    debug_assert_eq!(min_efc(inst, &best_alloc)?.c_star as u64, out.score);
    Ok(SolveResult {
        best_c: out.score as usize,
        best_alloc,
        nodes: out.nodes,
        exhaustive: out.exhaustive,
    })
}
