//! Sweeps over (n, m): find a family with large n-color discrepancy, solve
//! its couples instance exactly, and record both next to the reference
//! curves `sqrt(n-1)/96` and `sqrt(n-1)/16`.

use std::io::{Read, Write};
use std::ops::RangeInclusive;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrepancy::{max_disc_search, FamilySource, SearchConfig, MAX_EXHAUSTIVE_FAMILY_BITS};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::reduction::theorem_gap;

pub const CSV_COLUMNS: [&str; 12] = [
    "n",
    "m",
    "disc_p",
    "disc_q",
    "disc_dec",
    "c_min",
    "ratio_dec",
    "bound_thm",
    "bound_lem2",
    "exhaustive",
    "seed",
    "budget",
];

const DECIMAL_PLACES: u32 = 6;

/// `sqrt(n-1)/96`
pub fn theorem_bound(n: usize) -> f64 {
    ((n.max(1) - 1) as f64).sqrt() / 96.0
}

/// `sqrt(n-1)/16`
pub fn discrepancy_bound(n: usize) -> f64 {
    ((n.max(1) - 1) as f64).sqrt() / 16.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepConfig {
    pub n_range: RangeInclusive<usize>,
    pub m_range: RangeInclusive<usize>,
    pub mode: SweepMode,
    pub seed: u64,
    /// Node budget for each exact search.
    pub budget: u64,
    /// Families drawn per cell in sampled mode.
    pub samples: u64,
    pub threads: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n_range: 1..=3,
            m_range: 1..=4,
            mode: SweepMode::Exhaustive,
            seed: 0,
            budget: SearchConfig::default().budget,
            samples: 64,
            threads: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: usize,
    pub m: usize,
    pub disc_exact: Rational,
    pub c_min: usize,
    /// `6 · c_min / disc_exact` when the discrepancy is positive.
    pub ratio: Option<Rational>,
    pub bound_thm: f64,
    pub bound_lem2: f64,
    /// Every family examined and both exact searches completed.
    pub exhaustive: bool,
    pub seed: u64,
    pub budget: u64,
}

/// An ordered, resumable sweep over the `(n, m)` grid.
#[derive(Clone, Debug)]
pub struct Sweep {
    config: SweepConfig,
}

impl Sweep {
    pub fn new(config: SweepConfig) -> Result<Self> {
        if config.n_range.is_empty() || config.m_range.is_empty() {
            return Err(Error::InvalidArgument(
                "sweep ranges must be nonempty".into(),
            ));
        }
        if *config.n_range.start() == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if config.mode == SweepMode::Exhaustive {
            let worst = config.n_range.end() * config.m_range.end();
            if worst > MAX_EXHAUSTIVE_FAMILY_BITS {
                return Err(Error::Infeasible(format!(
                    "exhaustive sweep reaches n·m = {worst} > {MAX_EXHAUSTIVE_FAMILY_BITS}; use sampled mode"
                )));
            }
        }
        if config.mode == SweepMode::Sampled && config.samples == 0 {
            return Err(Error::InvalidArgument("samples must be at least 1".into()));
        }
        Ok(Sweep { config })
    }

    pub fn config(&self) -> &SweepConfig {
        &self.config
    }

    /// Grid cells in emission order (n major, m minor).
    pub fn cells(&self) -> Vec<(usize, usize)> {
        self.config
            .n_range
            .clone()
            .flat_map(|n| self.config.m_range.clone().map(move |m| (n, m)))
            .collect()
    }

    /// Cells strictly after `after`, or all of them.
    pub fn cells_after(&self, after: Option<(usize, usize)>) -> Vec<(usize, usize)> {
        self.cells()
            .into_iter()
            .filter(|&cell| after.is_none_or(|a| cell > a))
            .collect()
    }

    /// Computes one cell. Depends only on the configuration and `(n, m)`.
    pub fn run_cell(&self, n: usize, m: usize) -> Result<SweepRecord> {
        let cfg = &self.config;
        let search = SearchConfig {
            budget: cfg.budget,
            threads: 1,
        };
        let source = match cfg.mode {
            SweepMode::Exhaustive => FamilySource::Exhaustive,
            SweepMode::Sampled => FamilySource::Sampled {
                samples: cfg.samples,
                seed: cell_seed(cfg.seed, n, m),
            },
        };
        let best = max_disc_search(n, m, n, source, search)?;
        let gap = theorem_gap(&best.family, search)?;
        Ok(SweepRecord {
            n,
            m,
            disc_exact: gap.disc_exact,
            c_min: gap.c_min,
            ratio: gap.ratio(),
            bound_thm: theorem_bound(n),
            bound_lem2: discrepancy_bound(n),
            exhaustive: best.exhaustive && gap.exhaustive,
            seed: cfg.seed,
            budget: cfg.budget,
        })
    }

    /// Lazily computes cells after `after` in order.
    pub fn iter_from(
        &self,
        after: Option<(usize, usize)>,
    ) -> impl Iterator<Item = Result<SweepRecord>> + '_ {
        self.cells_after(after)
            .into_iter()
            .map(move |(n, m)| self.run_cell(n, m))
    }

    /// Computes cells after `after`, in parallel when configured; output order is fixed.
    pub fn run_from(&self, after: Option<(usize, usize)>) -> Result<Vec<SweepRecord>> {
        let cells = self.cells_after(after);
        if self.config.threads <= 1 {
            return cells
                .into_iter()
                .map(|(n, m)| self.run_cell(n, m))
                .collect();
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.threads)
            .build()
            .expect("thread pool");
        pool.install(|| {
            cells
                .into_par_iter()
                .map(|(n, m)| self.run_cell(n, m))
                .collect()
        })
    }
}

/// Runs the whole grid.
pub fn sweep(config: SweepConfig) -> Result<Vec<SweepRecord>> {
    Sweep::new(config)?.run_from(None)
}

fn cell_seed(seed: u64, n: usize, m: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | m as u64);
    rng.next_u64()
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    n: usize,
    m: usize,
    disc_p: i64,
    disc_q: i64,
    disc_dec: String,
    c_min: usize,
    ratio_dec: String,
    bound_thm: f64,
    bound_lem2: f64,
    exhaustive: bool,
    seed: u64,
    budget: u64,
}

/// Writes the header and one row per record.
pub fn emit_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.serialize(CsvRow {
            n: r.n,
            m: r.m,
            disc_p: r.disc_exact.numer(),
            disc_q: r.disc_exact.denom(),
            disc_dec: r.disc_exact.to_decimal(DECIMAL_PLACES),
            c_min: r.c_min,
            ratio_dec: r
                .ratio
                .map(|q| q.to_decimal(DECIMAL_PLACES))
                .unwrap_or_default(),
            bound_thm: r.bound_thm,
            bound_lem2: r.bound_lem2,
            exhaustive: r.exhaustive,
            seed: r.seed,
            budget: r.budget,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads records written by [`emit_csv`]; `ratio` is rebuilt from the exact columns.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
    if header != CSV_COLUMNS {
        return Err(Error::InvalidArgument(format!(
            "unexpected CSV header {header:?}"
        )));
    }
    rdr.deserialize()
        .map(|row| {
            let row: CsvRow = row?;
            if row.disc_q <= 0 {
                return Err(Error::InvalidArgument(format!(
                    "bad denominator {}",
                    row.disc_q
                )));
            }
            let disc_exact = Rational::new(row.disc_p, row.disc_q);
            let ratio = (!disc_exact.is_zero()).then(|| {
                Rational::from_integer(6 * row.c_min as i64)
                    * Rational::new(disc_exact.denom(), disc_exact.numer())
            });
            Ok(SweepRecord {
                n: row.n,
                m: row.m,
                disc_exact,
                c_min: row.c_min,
                ratio,
                bound_thm: row.bound_thm,
                bound_lem2: row.bound_lem2,
                exhaustive: row.exhaustive,
                seed: row.seed,
                budget: row.budget,
            })
        })
        .collect()
}

/// One JSON object per record and line.
pub fn emit_jsonl<W: Write>(records: &[SweepRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
