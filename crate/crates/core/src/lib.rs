//! Fair division of indivisible goods among couples, multicolor discrepancy
//! of set families, and the reduction that turns discrepancy lower bounds
//! into lower bounds on envy-freeness up to `c` goods.
//!
//! All quantities are exact: valuations and discrepancy values are
//! [`Rational`]s and every comparison is done in integer arithmetic.

pub mod cli;
pub mod discrepancy;
pub mod envy;
pub mod error;
pub mod experiments;
pub mod model;
pub mod rational;
pub mod reduction;
mod search;
pub mod solvers;

pub use discrepancy::{
    coloring_disc, exact_disc, exact_disc_with, heuristic_disc, max_disc_search, DiscSolution,
    DiscrepancyValue, FamilySource, MaxDiscResult, SearchConfig,
};
pub use envy::{min_efc, removal_count, removal_count_binary, removal_set, EnvyReport};
pub use error::{Error, Result, Violation};
pub use experiments::{emit_csv, read_csv, sweep, Sweep, SweepConfig, SweepMode, SweepRecord};
pub use model::{
    bits_from, validate, value, Allocation, Coloring, Couple, Instance, ItemBits, SetFamily,
    Validate, Valuation,
};
pub use rational::Rational;
pub use reduction::{
    allocation_to_coloring, build_instance, coloring_to_allocation, theorem_gap, verify_lemma,
    ClaimChecks, GapResult, Reduction, ReductionCertificate, TheoremViolation,
};
pub use solvers::{round_robin, solve_min_efc, SolveResult};
