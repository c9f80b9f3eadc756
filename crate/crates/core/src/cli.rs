//! Command-line front end. Every subcommand reads JSON files (or `-` for
//! stdin), calls one library operation and writes its result as JSON (CSV
//! for `sweep`). Data goes to stdout or `--out`, diagnostics to stderr.
//!
//! Exit codes: 0 success, 1 bad input or usage, 2 node budget exhausted
//! (partial result still written), 3 a proven inequality failed.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::discrepancy::{
    coloring_disc, exact_disc_with, heuristic_disc, DiscSolution, SearchConfig,
};
use crate::envy::min_efc;
use crate::error::Error;
use crate::experiments::{emit_csv, emit_jsonl, Sweep, SweepConfig, SweepMode};
use crate::model::{
    AllocationFile, Coloring, ColoringFile, FamilyFile, Instance, InstanceFile, SetFamily, Validate,
};
use crate::rational::Rational;
use crate::reduction::{build_instance, theorem_gap, Reduction};
use crate::solvers::solve_min_efc;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_THEOREM: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "couplediv",
    version,
    about = "Envy-freeness for couples and multicolor discrepancy"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    /// Node budget for exact searches.
    #[arg(long, default_value_t = SearchConfig::default().budget)]
    pub budget: u64,
    /// Worker threads for exact searches.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

impl SearchArgs {
    fn config(&self) -> SearchConfig {
        SearchConfig {
            budget: self.budget,
            threads: self.threads.max(1),
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check an instance, set family, allocation or coloring file.
    Validate {
        input: String,
        /// Couple count to check an allocation against.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Build the couples instance of a set family.
    Build {
        family: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smallest c for which an allocation is EFc.
    Envy {
        instance: String,
        #[arg(long)]
        alloc: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Discrepancy of a set family: exact, heuristic, or of a given coloring.
    Disc {
        family: String,
        /// Number of colors; defaults to the number of sets.
        #[arg(long)]
        k: Option<usize>,
        /// Evaluate this coloring instead of searching.
        #[arg(long, conflicts_with = "heuristic")]
        coloring: Option<String>,
        /// Local search instead of branch and bound.
        #[arg(long)]
        heuristic: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Allocation with the smallest EFc level.
    Solve {
        instance: String,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify the discrepancy bound for a family and an allocation.
    Verify {
        family: String,
        #[arg(long)]
        alloc: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the best EFc level with the exact discrepancy of a family.
    Gap {
        family: String,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep an (n, m) grid and write CSV.
    Sweep {
        /// Couple counts, `A` or `A-B` (inclusive).
        #[arg(long, value_parser = parse_range)]
        n: RangeInclusive<usize>,
        /// Item counts, `A` or `A-B` (inclusive).
        #[arg(long, value_parser = parse_range)]
        m: RangeInclusive<usize>,
        #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Families drawn per cell in sampled mode.
        #[arg(long, default_value_t = 64)]
        samples: u64,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write one JSON object per record to this file.
        #[arg(long)]
        jsonl: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Exhaustive,
    Sampled,
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let bad = || format!("expected A or A-B, got {s:?}");
    let (a, b) = s.split_once('-').unwrap_or((s, s));
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok(a..=b)
}

/// Output of `disc`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscReport {
    pub family: SetFamily,
    pub k: usize,
    pub method: String,
    #[serde(flatten)]
    pub solution: DiscSolution,
}

/// Output of `validate`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub kind: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<String>,
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Io<'_> {
    fn read(&mut self, path: &str) -> Result<String, Error> {
        let mut s = String::new();
        if path == "-" {
            self.stdin.read_to_string(&mut s)?;
        } else {
            File::open(path)?.read_to_string(&mut s)?;
        }
        Ok(s)
    }

    fn json<T: for<'de> Deserialize<'de>>(&mut self, path: &str) -> Result<T, Error> {
        let text = self.read(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    fn emit(
        &mut self,
        out: &Option<PathBuf>,
        write: impl FnOnce(&mut dyn Write) -> Result<(), Error>,
    ) -> Result<(), Error> {
        match out {
            Some(p) if p.as_os_str() != "-" => {
                let mut w = BufWriter::new(File::create(p)?);
                write(&mut w)?;
                w.flush()?;
            }
            _ => {
                write(self.stdout)?;
                self.stdout.flush()?;
            }
        }
        Ok(())
    }

    fn emit_json<T: Serialize>(&mut self, out: &Option<PathBuf>, value: &T) -> Result<(), Error> {
        self.emit(out, |w| {
            serde_json::to_writer(&mut *w, value)?;
            w.write_all(b"\n")?;
            Ok(())
        })
    }

    fn note(&mut self, msg: impl std::fmt::Display) {
        let _ = writeln!(self.stderr, "{msg}");
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(
    argv: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_DATA
                }
            };
        }
    };
    let mut io = Io {
        stdin,
        stdout,
        stderr,
    };
    match execute(cli.command, &mut io) {
        Ok(code) => code,
        Err(e) => {
            io.note(format!("error: {e}"));
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::TheoremViolation(_) => EXIT_THEOREM,
        _ => EXIT_DATA,
    }
}

fn budget_code(exhaustive: bool) -> i32 {
    if exhaustive {
        EXIT_OK
    } else {
        EXIT_BUDGET
    }
}

fn execute(command: Command, io: &mut Io<'_>) -> Result<i32, Error> {
    match command {
        Command::Validate { input, n } => validate_file(io, &input, n),
        Command::Build { family, out } => {
            let fam: SetFamily = io.json(&family)?;
            io.emit_json(&out, &build_instance(&fam))?;
            Ok(EXIT_OK)
        }
        Command::Envy {
            instance,
            alloc,
            out,
        } => {
            let inst: Instance = io.json(&instance)?;
            let file: AllocationFile = io.json(&alloc)?;
            let alloc = file.with_couples(inst.n())?;
            io.emit_json(&out, &min_efc(&inst, &alloc)?)?;
            Ok(EXIT_OK)
        }
        Command::Disc {
            family,
            k,
            coloring,
            heuristic,
            seed,
            restarts,
            search,
            out,
        } => {
            let fam: SetFamily = io.json(&family)?;
            let k = k.unwrap_or(fam.n());
            let (method, solution) = if let Some(path) = coloring {
                let file: ColoringFile = io.json(&path)?;
                if file.k != k {
                    return Err(Error::DimensionMismatch(format!(
                        "coloring has k = {} but --k is {k}",
                        file.k
                    )));
                }
                let chi = Coloring::try_from(file)?;
                let value = coloring_disc(&fam, &chi)?;
                (
                    "coloring",
                    DiscSolution {
                        value,
                        coloring: chi,
                        nodes: 0,
                        exhaustive: true,
                    },
                )
            } else if heuristic {
                ("heuristic", heuristic_disc(&fam, k, seed, restarts)?)
            } else {
                ("exact", exact_disc_with(&fam, k, search.config())?)
            };
            io.note(format!("nodes: {}", solution.nodes));
            let complete = method == "heuristic" || solution.exhaustive;
            let report = DiscReport {
                family: fam,
                k,
                method: method.into(),
                solution,
            };
            io.emit_json(&out, &report)?;
            Ok(budget_code(complete))
        }
        Command::Solve {
            instance,
            search,
            out,
        } => {
            let inst: Instance = io.json(&instance)?;
            let result = solve_min_efc(&inst, search.config())?;
            io.note(format!("nodes: {}", result.nodes));
            io.emit_json(&out, &result)?;
            Ok(budget_code(result.exhaustive))
        }
        Command::Verify { family, alloc, out } => {
            let fam: SetFamily = io.json(&family)?;
            let file: AllocationFile = io.json(&alloc)?;
            let alloc = file.with_couples(fam.n())?;
            match Reduction::new(fam).verify(&alloc) {
                Ok(cert) => {
                    io.emit_json(&out, &cert)?;
                    Ok(EXIT_OK)
                }
                Err(Error::TheoremViolation(v)) => {
                    io.emit_json(&out, &*v)?;
                    Err(Error::TheoremViolation(v))
                }
                Err(e) => Err(e),
            }
        }
        Command::Gap {
            family,
            search,
            out,
        } => {
            let fam: SetFamily = io.json(&family)?;
            let gap = theorem_gap(&fam, search.config())?;
            io.note(format!("nodes: {}", gap.nodes));
            io.emit_json(&out, &gap)?;
            if gap.exhaustive && !gap.ratio_ok {
                io.note("error: theorem violation: c_min < disc/6");
                return Ok(EXIT_THEOREM);
            }
            Ok(budget_code(gap.exhaustive))
        }
        Command::Sweep {
            n,
            m,
            mode,
            seed,
            samples,
            search,
            out,
            jsonl,
        } => {
            let mode = match mode {
                ModeArg::Exhaustive => SweepMode::Exhaustive,
                ModeArg::Sampled => SweepMode::Sampled,
            };
            let config = SweepConfig {
                n_range: n,
                m_range: m,
                mode,
                seed,
                budget: search.budget,
                samples,
                threads: search.threads.max(1),
            };
            let records = Sweep::new(config)?.run_from(None)?;
            io.emit(&out, |w| emit_csv(&records, w))?;
            if let Some(path) = jsonl {
                emit_jsonl(&records, BufWriter::new(File::create(path)?))?;
            }
            let violated = records
                .iter()
                .any(|r| r.exhaustive && Rational::from_integer(6 * r.c_min as i64) < r.disc_exact);
            if violated {
                io.note("error: theorem violation: c_min < disc/6 in an exhaustive cell");
                return Ok(EXIT_THEOREM);
            }
            let complete = mode == SweepMode::Sampled || records.iter().all(|r| r.exhaustive);
            Ok(budget_code(complete))
        }
    }
}

fn validate_file(io: &mut Io<'_>, input: &str, n: Option<usize>) -> Result<i32, Error> {
    let text = io.read(input)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let has = |key: &str| value.get(key).is_some();
    let (kind, result) = if has("couples") {
        (
            "instance",
            serde_json::from_value::<InstanceFile>(value)?.validate(),
        )
    } else if has("sets") {
        (
            "family",
            serde_json::from_value::<FamilyFile>(value)?.validate(),
        )
    } else if has("owner") {
        let mut file: AllocationFile = serde_json::from_value(value)?;
        if file.n.is_none() {
            file.n = n;
        }
        ("allocation", file.validate())
    } else if has("color") {
        (
            "coloring",
            serde_json::from_value::<ColoringFile>(value)?.validate(),
        )
    } else {
        return Err(Error::InvalidArgument(
            "cannot tell the file kind: expected one of the keys couples, sets, owner, color"
                .into(),
        ));
    };
    let report = ValidationReport {
        kind: kind.into(),
        ok: result.is_ok(),
        violation: result.as_ref().err().map(|v| v.to_string()),
    };
    io.emit_json(&None, &report)?;
    match result {
        Ok(()) => Ok(EXIT_OK),
        Err(v) => {
            io.note(format!("error: {v}"));
            Ok(EXIT_DATA)
        }
    }
}

/// Runs with the process's standard streams.
pub fn main_with_std_io() -> i32 {
    let stdin = io::stdin();
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(
        std::env::args_os(),
        &mut stdin.lock(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("3").unwrap(), 3..=3);
        assert_eq!(parse_range("1-4").unwrap(), 1..=4);
        assert!(parse_range("4-1").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::InvalidArgument("x".into())), EXIT_DATA);
        let red = Reduction::new(SetFamily::new(1, &[vec![0]]).unwrap());
        let cert = red
            .verify(&crate::model::Allocation::new(1, vec![0]).unwrap())
            .unwrap();
        let v = crate::reduction::TheoremViolation {
            failed: vec!["claim1".into()],
            certificate: cert,
        };
        assert_eq!(
            exit_code(&Error::TheoremViolation(Box::new(v))),
            EXIT_THEOREM
        );
    }
}
