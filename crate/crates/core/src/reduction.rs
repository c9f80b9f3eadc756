//! From set families to couples.
//!
//! Couple `i` gets one agent valuing exactly the items of `A_i` and one
//! valuing exactly the items outside it. Any allocation that is EFc for such
//! an instance, read as an n-coloring, has discrepancy at most `6c` on the
//! family. [`verify_lemma`] recomputes every intermediate inequality of that
//! argument for a concrete (family, allocation) pair and reports a
//! [`TheoremViolation`] if any of them fails.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::discrepancy::{coloring_disc, exact_disc_with, DiscrepancyValue, SearchConfig};
use crate::envy::{binary_bundle_values, min_efc};
use crate::error::{Error, Result};
use crate::model::{Allocation, Coloring, Couple, Instance, SetFamily, Valuation};
use crate::rational::Rational;
use crate::solvers::solve_min_efc;

/// Couple `i` = (indicator of `A_i`, indicator of `M \ A_i`).
pub fn build_instance(fam: &SetFamily) -> Instance {
    let m = fam.m();
    let couples = (0..fam.n())
        .map(|i| {
            Couple::new(
                Valuation::indicator(fam.set(i), m),
                Valuation::indicator(&fam.complement(i), m),
            )
        })
        .collect();
    Instance::new(m, couples).expect("indicator valuations are valid")
}

/// Bundle `S_j` becomes color class `j`; `k = n`.
pub fn allocation_to_coloring(alloc: &Allocation) -> Coloring {
    Coloring::new(alloc.n(), alloc.owner().to_vec()).expect("owners are below n")
}

pub fn coloring_to_allocation(chi: &Coloring) -> Allocation {
    Allocation::new(chi.k(), chi.colors().to_vec()).expect("colors are below k")
}

/// Outcome of each inequality in the chain, evaluated at a given `c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimChecks {
    /// `v_i^r(S_j) <= v_i^r(S_i) + c` for all i, j, r.
    pub claim1: bool,
    /// `| |S_i| - |S_j| | <= 2c` for all i, j.
    pub claim2_spread: bool,
    /// `m/n - 2c <= |S_i| <= m/n + 2c` for all i.
    pub claim2_average: bool,
    /// Some bundle is worth at least the average to each agent.
    pub averaging: bool,
    /// `| |A_i|/n - |A_i ∩ S_j| | <= 6c` for all i, j.
    pub per_pair_6c: bool,
    /// Discrepancy of the induced coloring is at most `6c`.
    pub coloring_6c: bool,
}

impl ClaimChecks {
    pub fn all_pass(&self) -> bool {
        self.failed().is_empty()
    }

    pub fn failed(&self) -> Vec<&'static str> {
        [
            (self.claim1, "claim1"),
            (self.claim2_spread, "claim2_spread"),
            (self.claim2_average, "claim2_average"),
            (self.averaging, "averaging"),
            (self.per_pair_6c, "per_pair_6c"),
            (self.coloring_6c, "coloring_6c"),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| name)
        .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionCertificate {
    pub family: SetFamily,
    pub instance: Instance,
    pub allocation: Allocation,
    pub c_star: usize,
    pub coloring_value: DiscrepancyValue,
    pub bound_6c: Rational,
    pub claims: ClaimChecks,
}

/// A proven inequality failed: the inputs are fine, the code is not.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremViolation {
    pub failed: Vec<String>,
    pub certificate: ReductionCertificate,
}

impl fmt::Display for TheoremViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "theorem violation: {} failed at c = {} (allocation {:?})",
            self.failed.join(", "),
            self.certificate.c_star,
            self.certificate.allocation.owner()
        )
    }
}

impl std::error::Error for TheoremViolation {}

/// A family together with its couples instance, for checking many allocations.
#[derive(Clone, Debug)]
pub struct Reduction {
    family: SetFamily,
    instance: Instance,
}

impl Reduction {
    pub fn new(family: SetFamily) -> Self {
        let instance = build_instance(&family);
        Reduction { family, instance }
    }

    pub fn family(&self) -> &SetFamily {
        &self.family
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    /// Evaluates every inequality of the chain for `alloc` at level `c`.
    pub fn check_at(&self, alloc: &Allocation, c: usize) -> Result<ClaimChecks> {
        self.check_dims(alloc)?;
        let fam = &self.family;
        let (n, m) = (fam.n() as i64, fam.m() as i64);
        let c = c as i64;
        let sizes: Vec<i64> = alloc.bundle_sizes().into_iter().map(|s| s as i64).collect();
        let vals = binary_bundle_values(&self.instance, alloc);
        let set_sizes: Vec<i64> = (0..fam.n()).map(|i| fam.size(i) as i64).collect();

        let claim1 = (0..fam.n()).all(|i| {
            (0..2).all(|r| (0..fam.n()).all(|j| vals[i][r][j] as i64 <= vals[i][r][i] as i64 + c))
        });
        let claim2_spread = sizes
            .iter()
            .all(|&a| sizes.iter().all(|&b| (a - b).abs() <= 2 * c));
        let claim2_average = sizes
            .iter()
            .all(|&s| m - 2 * c * n <= n * s && n * s <= m + 2 * c * n);
        let averaging = (0..fam.n()).all(|i| {
            let a = set_sizes[i];
            (0..fam.n()).any(|l| n * vals[i][0][l] as i64 >= a)
                && (0..fam.n()).any(|l| n * vals[i][1][l] as i64 >= m - a)
        });

        let mut hits = vec![vec![0i64; fam.n()]; fam.n()];
        for (x, &j) in alloc.owner().iter().enumerate() {
            for (i, row) in hits.iter_mut().enumerate() {
                if fam.contains(i, x) {
                    row[j] += 1;
                }
            }
        }
        let per_pair_6c = (0..fam.n())
            .all(|i| (0..fam.n()).all(|j| (set_sizes[i] - n * hits[i][j]).abs() <= 6 * c * n));

        let value = coloring_disc(fam, &allocation_to_coloring(alloc))?.value;
        let coloring_6c = value <= Rational::from_integer(6 * c);

        Ok(ClaimChecks {
            claim1,
            claim2_spread,
            claim2_average,
            averaging,
            per_pair_6c,
            coloring_6c,
        })
    }

    /// Certificate for `alloc` at its own `c_star`; any failed check is a
    /// [`TheoremViolation`].
    pub fn verify(&self, alloc: &Allocation) -> Result<ReductionCertificate> {
        self.check_dims(alloc)?;
        let c_star = min_efc(&self.instance, alloc)?.c_star;
        let coloring_value = coloring_disc(&self.family, &allocation_to_coloring(alloc))?;
        let claims = self.check_at(alloc, c_star)?;
        let cert = ReductionCertificate {
            family: self.family.clone(),
            instance: self.instance.clone(),
            allocation: alloc.clone(),
            c_star,
            coloring_value,
            bound_6c: Rational::from_integer(6 * c_star as i64),
            claims,
        };
        if !claims.all_pass() {
            let failed = claims.failed().into_iter().map(String::from).collect();
            return Err(Error::TheoremViolation(Box::new(TheoremViolation {
                failed,
                certificate: cert,
            })));
        }
        Ok(cert)
    }

    fn check_dims(&self, alloc: &Allocation) -> Result<()> {
        if alloc.m() != self.family.m() || alloc.n() != self.family.n() {
            return Err(Error::DimensionMismatch(format!(
                "family has n = {}, m = {} but the allocation has n = {}, m = {}",
                self.family.n(),
                self.family.m(),
                alloc.n(),
                alloc.m()
            )));
        }
        Ok(())
    }
}

/// Builds the instance for `fam` and certifies `alloc` against it.
pub fn verify_lemma(fam: &SetFamily, alloc: &Allocation) -> Result<ReductionCertificate> {
    Reduction::new(fam.clone()).verify(alloc)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapResult {
    /// Smallest `c_star` over all allocations of the family's instance.
    pub c_min: usize,
    /// Exact n-color discrepancy of the family.
    pub disc_exact: Rational,
    /// `c_min >= disc_exact / 6`.
    pub ratio_ok: bool,
    /// Both searches completed; otherwise `c_min` and `disc_exact` are upper bounds.
    pub exhaustive: bool,
    pub best_alloc: Allocation,
    pub best_coloring: Coloring,
    pub nodes: u64,
}

impl GapResult {
    /// `6 · c_min / disc_exact`, when the discrepancy is positive.
    pub fn ratio(&self) -> Option<Rational> {
        (!self.disc_exact.is_zero())
            .then(|| Rational::from_integer(6 * self.c_min as i64) * reciprocal(self.disc_exact))
    }
}

fn reciprocal(r: Rational) -> Rational {
    Rational::new(r.denom(), r.numer())
}

/// Compares the best achievable EFc level of the family's instance with
/// the family's n-color discrepancy.
pub fn theorem_gap(fam: &SetFamily, config: SearchConfig) -> Result<GapResult> {
    let inst = build_instance(fam);
    let solve = solve_min_efc(&inst, config)?;
    let disc = exact_disc_with(fam, fam.n(), config)?;
    let disc_exact = disc.value.value;
    Ok(GapResult {
        c_min: solve.best_c,
        disc_exact,
        ratio_ok: Rational::from_integer(6 * solve.best_c as i64) >= disc_exact,
        exhaustive: solve.exhaustive && disc.exhaustive,
        best_alloc: solve.best_alloc,
        best_coloring: disc.coloring,
        nodes: solve.nodes + disc.nodes,
    })
}
