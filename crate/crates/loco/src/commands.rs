//! The four pipeline commands. Each stage short-circuits with its own exit
//! status, so `solve` never runs on a spec `check` would refuse.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use loco_core::{
    admissibility, brute_force_solve, check_model, ground, parse_named, propagate, solve, CountStrategy, Diagnostic,
    Document, Limit, Outcome, RejectCertificate, Severity, SolveError, SolveOptions, SolveOutcome, ORACLE_MAX_CAP,
};

use crate::document::{spec_hash, BoundsReport, SolutionDocument};

/// Process exit status. The numbers are part of the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Invalid = 1,
    Rejected = 2,
    Unsat = 3,
    FuelExhausted = 4,
    Usage = 5,
    /// A produced configuration failed the independent model check.
    Internal = 6,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Output streams of one invocation.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
    /// ANSI styling on the error stream.
    pub color: bool,
}

impl Io<'_> {
    fn styled(&self, text: &str, code: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }

    fn diagnostic(&mut self, file: &str, d: &Diagnostic) -> io::Result<()> {
        let severity = match d.severity {
            Severity::Error => self.styled(d.severity.as_str(), "1;31"),
            Severity::Warning => self.styled(d.severity.as_str(), "1;33"),
        };
        let at = match &d.span {
            Some(s) => format!("{}:{}:{}", s.file, s.line, s.column),
            None => format!("{file}:1:1"),
        };
        writeln!(self.err, "{severity} {} {at} {}", d.code, d.message)
    }

    fn failure(&mut self, label: &str, message: impl fmt::Display) -> io::Result<()> {
        let label = self.styled(label, "1;31");
        writeln!(self.err, "{label}: {message}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundsFormat {
    Table,
    Report,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveArgs {
    pub max: usize,
    pub fuel: u64,
    pub seed: u64,
    pub count: CountStrategy,
    pub out: Option<PathBuf>,
}

impl Default for SolveArgs {
    fn default() -> Self {
        let d = SolveOptions::default();
        SolveArgs { max: d.max_solutions, fuel: d.fuel, seed: d.seed, count: d.count, out: None }
    }
}

/// Parses `sweep`, `n` or `K=n,L=m`.
pub fn parse_count(text: &str) -> Result<CountStrategy, String> {
    let text = text.trim();
    if text == "sweep" {
        return Ok(CountStrategy::SweepUp);
    }
    if let Ok(n) = text.parse::<u64>() {
        return Ok(CountStrategy::Uniform(n));
    }
    let mut fixed = BTreeMap::new();
    for part in text.split(',') {
        let (kind, n) = part.split_once('=').ok_or_else(|| format!("expected `sweep`, `n` or `K=n,...`, got `{part}`"))?;
        let n = n.trim().parse::<u64>().map_err(|_| format!("`{}` is not a count", n.trim()))?;
        if fixed.insert(kind.trim().to_string(), n).is_some() {
            return Err(format!("`{}` is given twice", kind.trim()));
        }
    }
    Ok(CountStrategy::Fixed(fixed))
}

type Stage<T> = io::Result<Result<T, ExitStatus>>;

/// Reads, parses and checks admissibility, printing every diagnostic.
fn load(path: &Path, io: &mut Io<'_>) -> Stage<Document> {
    let file = path.display().to_string();
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            io.failure("error", format_args!("cannot read {file}: {e}"))?;
            return Ok(Err(ExitStatus::Usage));
        }
    };
    let doc = match parse_named(&file, &text) {
        Ok(doc) => doc,
        Err(diags) => {
            for d in &diags {
                io.diagnostic(&file, d)?;
            }
            return Ok(Err(ExitStatus::Invalid));
        }
    };
    let diags = doc.locate(admissibility(&doc.problem, Some(&doc.instance)));
    for d in &diags {
        io.diagnostic(&file, d)?;
    }
    if diags.iter().any(|d| d.severity == Severity::Error) {
        return Ok(Err(ExitStatus::Invalid));
    }
    Ok(Ok(doc))
}

fn print_certificate(io: &mut Io<'_>, cert: &RejectCertificate) -> io::Result<()> {
    let label = io.styled("REJECT", "1;31");
    writeln!(io.out, "{label} {}: lb {} > ub {}", cert.kind, cert.lb, cert.ub)?;
    for step in &cert.provenance {
        writeln!(
            io.out,
            "  {} gives {} {}, now {}",
            step.connection, step.target, step.contributed, step.result
        )?;
    }
    Ok(())
}

/// Bounds stage shared by `bounds` and `solve`.
fn bounds_stage(doc: &Document, io: &mut Io<'_>) -> Stage<Outcome> {
    match propagate(&doc.problem, &doc.instance) {
        Ok(p) => Ok(Ok(p.outcome)),
        Err(e) => {
            io.failure("internal error", e)?;
            Ok(Err(ExitStatus::Internal))
        }
    }
}

pub fn check(path: &Path, io: &mut Io<'_>) -> ExitStatus {
    run(io, |io| {
        Ok(match load(path, io)? {
            Ok(_) => {
                writeln!(io.out, "ok {}", path.display())?;
                ExitStatus::Success
            }
            Err(status) => status,
        })
    })
}

pub fn bounds(path: &Path, format: BoundsFormat, io: &mut Io<'_>) -> ExitStatus {
    run(io, |io| {
        let doc = match load(path, io)? {
            Ok(doc) => doc,
            Err(status) => return Ok(status),
        };
        let outcome = match bounds_stage(&doc, io)? {
            Ok(o) => o,
            Err(status) => return Ok(status),
        };
        let hash = spec_hash(&doc.problem, &doc.instance);
        match (&outcome, format) {
            (Outcome::Accept(map), BoundsFormat::Table) => {
                for e in map.iter() {
                    writeln!(io.out, "{} {} {}", e.kind, e.bound, e.class.as_str())?;
                }
            }
            (Outcome::Reject(cert), BoundsFormat::Table) => print_certificate(io, cert)?,
            (Outcome::Accept(map), BoundsFormat::Report) => {
                write_json(io.out, &BoundsReport::accepted(hash, map))?;
            }
            (Outcome::Reject(cert), BoundsFormat::Report) => {
                write_json(io.out, &BoundsReport::rejected(hash, cert))?;
            }
        }
        Ok(match outcome {
            Outcome::Accept(_) => ExitStatus::Success,
            Outcome::Reject(_) => ExitStatus::Rejected,
        })
    })
}

pub fn solve_file(path: &Path, args: &SolveArgs, io: &mut Io<'_>) -> ExitStatus {
    run(io, |io| {
        let doc = match load(path, io)? {
            Ok(doc) => doc,
            Err(status) => return Ok(status),
        };
        let map = match bounds_stage(&doc, io)? {
            Ok(Outcome::Accept(map)) => map,
            Ok(Outcome::Reject(cert)) => {
                print_certificate(io, &cert)?;
                return Ok(ExitStatus::Rejected);
            }
            Err(status) => return Ok(status),
        };
        let opts = SolveOptions { max_solutions: args.max, fuel: args.fuel, seed: args.seed, count: args.count.clone() };
        let outcome = ground(&doc.problem, &doc.instance, &map).and_then(|gp| solve(&gp, &opts));
        let configs = match outcome {
            Ok(SolveOutcome::Solutions(configs)) => configs,
            Ok(SolveOutcome::Unsat) => {
                io.failure("UNSAT", "no configuration exists within the bounds")?;
                return Ok(ExitStatus::Unsat);
            }
            Ok(SolveOutcome::FuelExhausted) => {
                io.failure("FUEL", format_args!("search budget of {} nodes exhausted", args.fuel))?;
                return Ok(ExitStatus::FuelExhausted);
            }
            Err(e @ (SolveError::UnknownKind(_) | SolveError::CountOutOfBounds { .. })) => {
                io.failure("error", e)?;
                return Ok(ExitStatus::Usage);
            }
            Err(e) => {
                io.failure("internal error", e)?;
                return Ok(ExitStatus::Internal);
            }
        };
        for (i, config) in configs.iter().enumerate() {
            let verdict = check_model(&doc.problem, &doc.instance, config);
            if !verdict.accepted() {
                for v in &verdict.violations {
                    io.failure("internal error", format_args!("configuration {i}: {v}"))?;
                }
                return Ok(ExitStatus::Internal);
            }
        }
        let document = SolutionDocument::new(spec_hash(&doc.problem, &doc.instance), &doc.problem, &map, &configs);
        match &args.out {
            None => write_json(io.out, &document)?,
            Some(path) => {
                let mut text = serde_json::to_string_pretty(&document).map_err(io::Error::other)?;
                text.push('\n');
                if let Err(e) = std::fs::write(path, text) {
                    io.failure("error", format_args!("cannot write {}: {e}", path.display()))?;
                    return Ok(ExitStatus::Usage);
                }
            }
        }
        Ok(ExitStatus::Success)
    })
}

/// `K: {1,2}` for one generated kind, `(K, L): {(1,2)}` otherwise.
pub fn format_vectors(kinds: &[String], vectors: &[Vec<u64>]) -> String {
    let tuple = |items: Vec<String>| format!("({})", items.join(", "));
    let head = if kinds.len() == 1 { kinds[0].clone() } else { tuple(kinds.to_vec()) };
    let body: Vec<String> = vectors
        .iter()
        .map(|v| {
            let items: Vec<String> = v.iter().map(u64::to_string).collect();
            if kinds.len() == 1 {
                items.join("")
            } else {
                tuple(items)
            }
        })
        .collect();
    format!("{head}: {{{}}}", body.join(","))
}

pub fn oracle(path: &Path, cap: u64, io: &mut Io<'_>) -> ExitStatus {
    run(io, |io| {
        if cap > ORACLE_MAX_CAP {
            io.failure("error", format_args!("--cap {cap} exceeds the oracle limit of {ORACLE_MAX_CAP}"))?;
            return Ok(ExitStatus::Usage);
        }
        let doc = match load(path, io)? {
            Ok(doc) => doc,
            Err(status) => return Ok(status),
        };
        if let Ok(p) = propagate(&doc.problem, &doc.instance) {
            if let Outcome::Accept(map) = p.outcome {
                for e in map.generated().filter(|e| e.bound.ub > Limit::Finite(cap)) {
                    writeln!(io.err, "WARNING `{}` may exceed the cap: bounds {}; listing is partial", e.kind, e.bound)?;
                }
            }
        }
        let feasible = match brute_force_solve(&doc.problem, &doc.instance, cap) {
            Ok(f) => f,
            Err(e) => {
                io.failure("error", e)?;
                return Ok(ExitStatus::Usage);
            }
        };
        let classes = loco_core::effective_classes(&doc.problem, Some(&doc.instance)).unwrap_or_default();
        let kinds: Vec<String> = doc
            .problem
            .kinds
            .iter()
            .filter(|k| classes.get(&k.name) == Some(&loco_core::EffectiveClass::Generated))
            .map(|k| k.name.clone())
            .collect();
        let vectors: Vec<Vec<u64>> = feasible.into_iter().collect();
        writeln!(io.out, "{}", format_vectors(&kinds, &vectors))?;
        Ok(ExitStatus::Success)
    })
}

fn write_json<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(io::Error::other)?;
    writeln!(out)
}

/// Output failures (a closed pipe, a full disk) end the run as IO errors.
fn run(io: &mut Io<'_>, body: impl FnOnce(&mut Io<'_>) -> io::Result<ExitStatus>) -> ExitStatus {
    body(io).unwrap_or(ExitStatus::Usage)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_arguments() {
        assert_eq!(parse_count("sweep"), Ok(CountStrategy::SweepUp));
        assert_eq!(parse_count("3"), Ok(CountStrategy::Uniform(3)));
        let fixed = parse_count("Bin=2, Box=1").unwrap();
        assert_eq!(fixed, CountStrategy::Fixed([("Bin".into(), 2), ("Box".into(), 1)].into_iter().collect()));
        assert!(parse_count("Bin").is_err());
        assert!(parse_count("Bin=x").is_err());
        assert!(parse_count("Bin=1,Bin=2").is_err());
    }

    #[test]
    fn vector_listing() {
        assert_eq!(format_vectors(&["Bin".into()], &[vec![1], vec![2]]), "Bin: {1,2}");
        assert_eq!(format_vectors(&["Bin".into()], &[]), "Bin: {}");
        assert_eq!(format_vectors(&[], &[vec![]]), "(): {()}");
        assert_eq!(format_vectors(&["A".into(), "B".into()], &[vec![1, 2]]), "(A, B): {(1, 2)}");
    }
}
