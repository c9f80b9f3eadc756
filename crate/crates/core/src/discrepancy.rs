//! Multicolor discrepancy of set families.
//!
//! For a k-coloring, the imbalance of set `A_i` in color `l` is
//! `| |A_i|/k - |A_i ∩ class(l)| |`. All of these are multiples of `1/k`,
//! so internally they are kept as integer numerators `| |A_i| - k·count |`
//! and only turned into [`Rational`]s at the boundary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Coloring, SetFamily};
use crate::rational::Rational;
use crate::search::{self, Limits, SearchNode};

/// Largest `n·m` for which every family is enumerated.
pub const MAX_EXHAUSTIVE_FAMILY_BITS: usize = 16;

/// Node budget and worker count shared by the exact searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub budget: u64,
    pub threads: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: 10_000_000,
            threads: 1,
        }
    }
}

impl SearchConfig {
    pub fn with_budget(budget: u64) -> Self {
        SearchConfig {
            budget,
            ..Default::default()
        }
    }

    pub(crate) fn limits(&self) -> Limits {
        Limits {
            budget: self.budget,
            threads: self.threads,
        }
    }
}

/// A discrepancy value with the (set, color) pair that attains it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscrepancyValue {
    pub value: Rational,
    pub witness_set: usize,
    pub witness_color: usize,
}

/// Result of a discrepancy search: the best coloring found and its value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscSolution {
    pub value: DiscrepancyValue,
    pub coloring: Coloring,
    pub nodes: u64,
    /// True when the search proved `value` minimal.
    pub exhaustive: bool,
}

/// Worst imbalance of `chi` over all sets and colors.
pub fn coloring_disc(fam: &SetFamily, chi: &Coloring) -> Result<DiscrepancyValue> {
    if fam.m() != chi.m() {
        return Err(Error::DimensionMismatch(format!(
            "family is over m = {} items but the coloring colors {}",
            fam.m(),
            chi.m()
        )));
    }
    let k = chi.k();
    let counts = class_counts(&fam.incidence(), fam.n(), k, chi.colors());
    let (numer, i, l) = worst(&sizes(fam), k, &counts);
    Ok(to_value(numer, k, i, l))
}

fn sizes(fam: &SetFamily) -> Vec<i64> {
    (0..fam.n()).map(|i| fam.size(i) as i64).collect()
}

/// `counts[i * k + l] = |A_i ∩ class(l)|`
fn class_counts(incidence: &[Vec<usize>], n: usize, k: usize, colors: &[usize]) -> Vec<i64> {
    let mut counts = vec![0i64; n * k];
    for (x, &l) in colors.iter().enumerate() {
        for &i in &incidence[x] {
            counts[i * k + l] += 1;
        }
    }
    counts
}

/// Largest numerator `| |A_i| - k·count |` and its lexicographically first (i, l).
fn worst(sizes: &[i64], k: usize, counts: &[i64]) -> (u64, usize, usize) {
    let mut best = (0u64, 0usize, 0usize);
    for (i, &a) in sizes.iter().enumerate() {
        for l in 0..k {
            let d = (a - k as i64 * counts[i * k + l]).unsigned_abs();
            if d > best.0 {
                best = (d, i, l);
            }
        }
    }
    best
}

fn to_value(numer: u64, k: usize, i: usize, l: usize) -> DiscrepancyValue {
    DiscrepancyValue {
        value: Rational::new(numer as i64, k as i64),
        witness_set: i,
        witness_color: l,
    }
}

/// Smallest `| a - k·f |` over integers `f` in `[lo, hi]`.
fn nearest_gap(a: i64, k: i64, lo: i64, hi: i64) -> u64 {
    let below = a.div_euclid(k);
    [below, below + 1]
        .into_iter()
        .map(|f| (a - k * f.clamp(lo, hi)).unsigned_abs())
        .min()
        .unwrap()
}

/// Colors items in index order. Color `l + 1` may appear only after color
/// `l` has, which removes the `k!` relabelings of each coloring.
#[derive(Clone)]
struct ColoringNode<'a> {
    k: usize,
    sizes: &'a [i64],
    incidence: &'a [Vec<usize>],
    counts: Vec<i64>,
    remaining: Vec<i64>,
    colors: Vec<usize>,
    used: Vec<usize>,
}

impl<'a> ColoringNode<'a> {
    fn new(k: usize, sizes: &'a [i64], incidence: &'a [Vec<usize>]) -> Self {
        ColoringNode {
            k,
            sizes,
            incidence,
            counts: vec![0; sizes.len() * k],
            remaining: sizes.to_vec(),
            colors: Vec::with_capacity(incidence.len()),
            used: vec![0],
        }
    }
}

impl SearchNode for ColoringNode<'_> {
    fn is_complete(&self) -> bool {
        self.colors.len() == self.incidence.len()
    }

    fn children(&self, out: &mut Vec<usize>) {
        out.clear();
        let used = *self.used.last().unwrap();
        out.extend(0..(used + 1).min(self.k));
    }

    fn push(&mut self, l: usize) {
        let x = self.colors.len();
        for &i in &self.incidence[x] {
            self.counts[i * self.k + l] += 1;
            self.remaining[i] -= 1;
        }
        self.colors.push(l);
        let used = *self.used.last().unwrap();
        self.used.push(used.max(l + 1));
    }

    fn pop(&mut self) {
        let l = self.colors.pop().unwrap();
        let x = self.colors.len();
        for &i in &self.incidence[x] {
            self.counts[i * self.k + l] -= 1;
            self.remaining[i] += 1;
        }
        self.used.pop();
    }

    fn lower_bound(&self) -> u64 {
        let k = self.k as i64;
        let mut bound = 0;
        for (i, &a) in self.sizes.iter().enumerate() {
            let r = self.remaining[i];
            for l in 0..self.k {
                let c = self.counts[i * self.k + l];
                bound = bound.max(nearest_gap(a, k, c, c + r));
            }
        }
        bound
    }

    fn labels(&self) -> Vec<usize> {
        self.colors.clone()
    }
}

/// Minimum discrepancy over all k-colorings, with a node budget.
pub fn exact_disc(fam: &SetFamily, k: usize, budget: u64) -> Result<DiscSolution> {
    exact_disc_with(fam, k, SearchConfig::with_budget(budget))
}

pub fn exact_disc_with(fam: &SetFamily, k: usize, config: SearchConfig) -> Result<DiscSolution> {
    if k == 0 {
        return Err(Error::InvalidColorCount(k));
    }
    let sizes = sizes(fam);
    let incidence = fam.incidence();
    let start = vec![0; fam.m()];
    let start_score = worst(&sizes, k, &class_counts(&incidence, fam.n(), k, &start)).0;
    let root = ColoringNode::new(k, &sizes, &incidence);
    let out = search::minimize(root, (start_score, start), config.limits());
    let coloring = Coloring::new(k, out.labels).expect("search emits valid colors");
    let value = coloring_disc(fam, &coloring)?;
    debug_assert_eq!(value.value, Rational::new(out.score as i64, k as i64));
    Ok(DiscSolution {
        value,
        coloring,
        nodes: out.nodes,
        exhaustive: out.exhaustive,
    })
}

/// Upper bound on the discrepancy by random restarts and single-item recoloring.
///
/// A move is taken only if it strictly lowers (worst numerator, sum of squared
/// numerators). `nodes` in the result counts evaluated moves.
pub fn heuristic_disc(
    fam: &SetFamily,
    k: usize,
    seed: u64,
    restarts: usize,
) -> Result<DiscSolution> {
    if k == 0 {
        return Err(Error::InvalidColorCount(k));
    }
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let sizes = sizes(fam);
    let incidence = fam.incidence();
    let n = fam.n();
    let kk = k as i64;
    let objective = |counts: &[i64]| -> (u64, u64) {
        let mut worst = 0u64;
        let mut squares = 0u64;
        for (i, &a) in sizes.iter().enumerate() {
            for l in 0..k {
                let d = (a - kk * counts[i * k + l]).unsigned_abs();
                worst = worst.max(d);
                squares += d * d;
            }
        }
        (worst, squares)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<((u64, u64), Vec<usize>)> = None;
    let mut moves = 0u64;
    for _ in 0..restarts {
        let mut colors: Vec<usize> = (0..fam.m()).map(|_| rng.gen_range(0..k)).collect();
        let mut counts = class_counts(&incidence, n, k, &colors);
        let mut current = objective(&counts);
        loop {
            let mut step: Option<((u64, u64), usize, usize)> = None;
            for x in 0..fam.m() {
                let from = colors[x];
                for to in (0..k).filter(|&to| to != from) {
                    moves += 1;
                    for &i in &incidence[x] {
                        counts[i * k + from] -= 1;
                        counts[i * k + to] += 1;
                    }
                    let score = objective(&counts);
                    for &i in &incidence[x] {
                        counts[i * k + from] += 1;
                        counts[i * k + to] -= 1;
                    }
                    if score < step.map_or(current, |s| s.0) {
                        step = Some((score, x, to));
                    }
                }
            }
            let Some((score, x, to)) = step else { break };
            for &i in &incidence[x] {
                counts[i * k + colors[x]] -= 1;
                counts[i * k + to] += 1;
            }
            colors[x] = to;
            current = score;
        }
        if best.as_ref().is_none_or(|b| current < b.0) {
            best = Some((current, colors));
        }
    }
    let (_, colors) = best.expect("at least one restart");
    let coloring = Coloring::new(k, colors).expect("valid colors");
    let value = coloring_disc(fam, &coloring)?;
    Ok(DiscSolution {
        value,
        coloring,
        nodes: moves,
        exhaustive: false,
    })
}

/// How [`max_disc_search`] chooses the families it examines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum FamilySource {
    /// Every family of `n` subsets of `[m]`; requires `n·m <= 16`.
    Exhaustive,
    /// `samples` families with independent fair bits per (set, item).
    Sampled { samples: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxDiscResult {
    pub family: SetFamily,
    pub value: DiscrepancyValue,
    pub families: u64,
    pub nodes: u64,
    /// All families enumerated and every discrepancy solved to optimality.
    pub exhaustive: bool,
}

/// Family of `n` subsets of `[m]` with the largest exact k-color discrepancy
/// among those examined. Ties go to the first family examined.
pub fn max_disc_search(
    n: usize,
    m: usize,
    k: usize,
    source: FamilySource,
    config: SearchConfig,
) -> Result<MaxDiscResult> {
    if k == 0 {
        return Err(Error::InvalidColorCount(k));
    }
    if n == 0 {
        return Err(Error::InvalidArgument(
            "family size n must be at least 1".into(),
        ));
    }
    let families: Vec<SetFamily> = match source {
        FamilySource::Exhaustive => {
            if n * m > MAX_EXHAUSTIVE_FAMILY_BITS {
                return Err(Error::Infeasible(format!(
                    "n·m = {} exceeds {MAX_EXHAUSTIVE_FAMILY_BITS}; use sampled mode",
                    n * m
                )));
            }
            (0..1u64 << (n * m))
                .map(|code| SetFamily::from_code(n, m, code))
                .collect()
        }
        FamilySource::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidArgument("samples must be at least 1".into()));
            }
            sample_families(n, m, samples, seed)
        }
    };

    let inner = SearchConfig {
        threads: 1,
        ..config
    };
    let solve = |fam: &SetFamily| exact_disc_with(fam, k, inner);
    let solutions: Vec<DiscSolution> = if config.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .expect("thread pool");
        pool.install(|| families.par_iter().map(solve).collect::<Result<_>>())?
    } else {
        families.iter().map(solve).collect::<Result<_>>()?
    };

    let mut best = 0;
    for (idx, sol) in solutions.iter().enumerate() {
        if sol.value.value > solutions[best].value.value {
            best = idx;
        }
    }
    let exhaustive =
        matches!(source, FamilySource::Exhaustive) && solutions.iter().all(|s| s.exhaustive);
    Ok(MaxDiscResult {
        value: solutions[best].value,
        family: families.into_iter().nth(best).unwrap(),
        families: solutions.len() as u64,
        nodes: solutions.iter().map(|s| s.nodes).sum(),
        exhaustive,
    })
}

fn sample_families(n: usize, m: usize, samples: u64, seed: u64) -> Vec<SetFamily> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let sets = (0..n)
                .map(|_| (0..m).filter(|_| rng.gen::<bool>()).collect::<Vec<_>>())
                .collect::<Vec<_>>();
            SetFamily::new(m, &sets).expect("sampled items are in range")
        })
        .collect()
}
