//! Depth-first branch and bound over label assignments.
//!
//! Both exact solvers (minimum-discrepancy coloring and minimum-EFc
//! allocation) assign one label per item, score complete assignments with a
//! non-negative integer and know a sound lower bound for every partial one.
//! This module owns the shared search loop: node budget, incumbent tracking
//! and the optional split of the tree across worker threads.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;

/// A partial assignment that can be extended and retracted one item at a time.
pub(crate) trait SearchNode: Clone + Send {
    fn is_complete(&self) -> bool;
    /// Labels to try for the next item, in preferred order.
    fn children(&self, out: &mut Vec<usize>);
    fn push(&mut self, label: usize);
    fn pop(&mut self);
    /// Lower bound on the score of every completion; the exact score once complete.
    fn lower_bound(&self) -> u64;
    /// The current (complete) assignment in item order.
    fn labels(&self) -> Vec<usize>;
}

#[derive(Clone, Debug)]
pub(crate) struct Outcome {
    pub score: u64,
    pub labels: Vec<usize>,
    pub nodes: u64,
    pub exhaustive: bool,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Limits {
    pub budget: u64,
    pub threads: usize,
}

struct Shared {
    best: AtomicU64,
    nodes: AtomicU64,
    aborted: AtomicBool,
    budget: u64,
    floor: u64,
}

struct Local {
    score: u64,
    labels: Option<Vec<usize>>,
}

/// Minimizes the score over all completions of `root`, starting from a known
/// feasible `incumbent`.
pub(crate) fn minimize<N: SearchNode>(
    root: N,
    incumbent: (u64, Vec<usize>),
    limits: Limits,
) -> Outcome {
    let floor = root.lower_bound();
    let shared = Shared {
        best: AtomicU64::new(incumbent.0),
        nodes: AtomicU64::new(0),
        aborted: AtomicBool::new(false),
        budget: limits.budget,
        floor,
    };

    let mut winner = incumbent;
    if limits.threads <= 1 {
        let mut local = Local {
            score: winner.0,
            labels: None,
        };
        let mut node = root;
        dfs(&mut node, &shared, &mut local);
        if let Some(labels) = local.labels {
            winner = (local.score, labels);
        }
    } else {
        let frontier = split(root, &shared, limits.threads * 8);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(limits.threads)
            .build()
            .expect("thread pool");
        let results: Vec<Local> = pool.install(|| {
            frontier
                .into_par_iter()
                .map(|mut node| {
                    let mut local = Local {
                        score: u64::MAX,
                        labels: None,
                    };
                    dfs(&mut node, &shared, &mut local);
                    local
                })
                .collect()
        });
        // ties go to the earliest subtree
        for local in results {
            if let Some(labels) = local.labels {
                if local.score < winner.0 {
                    winner = (local.score, labels);
                }
            }
        }
    }

    Outcome {
        score: winner.0,
        labels: winner.1,
        nodes: shared.nodes.load(Ordering::Relaxed),
        exhaustive: !shared.aborted.load(Ordering::Relaxed),
    }
}

/// Expands the shallowest nodes until there are at least `target` open subtrees.
fn split<N: SearchNode>(root: N, shared: &Shared, target: usize) -> Vec<N> {
    let mut frontier = vec![root];
    let mut kids = Vec::new();
    while frontier.len() < target && frontier.iter().all(|n| !n.is_complete()) {
        let mut next = Vec::new();
        for node in frontier {
            shared.nodes.fetch_add(1, Ordering::Relaxed);
            node.children(&mut kids);
            for &label in &kids {
                let mut child = node.clone();
                child.push(label);
                next.push(child);
            }
        }
        if next.is_empty() {
            return next;
        }
        frontier = next;
    }
    frontier
}

fn dfs<N: SearchNode>(node: &mut N, shared: &Shared, local: &mut Local) {
    if shared.aborted.load(Ordering::Relaxed) {
        return;
    }
    let visited = shared.nodes.fetch_add(1, Ordering::Relaxed) + 1;
    if visited > shared.budget {
        shared.aborted.store(true, Ordering::Relaxed);
        return;
    }
    let best = shared.best.load(Ordering::Relaxed);
    if best <= shared.floor {
        return;
    }
    let bound = node.lower_bound();
    if bound >= best {
        return;
    }
    if node.is_complete() {
        // incumbents only ever improve
        assert!(bound < local.score, "incumbent must strictly improve");
        local.score = bound;
        local.labels = Some(node.labels());
        shared.best.fetch_min(bound, Ordering::Relaxed);
        return;
    }
    let mut kids = Vec::new();
    node.children(&mut kids);
    for label in kids {
        node.push(label);
        dfs(node, shared, local);
        node.pop();
        if shared.aborted.load(Ordering::Relaxed) {
            return;
        }
    }
}
