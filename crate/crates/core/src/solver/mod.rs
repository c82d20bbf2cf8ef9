//! Finite model construction.
//!
//! `ground` turns a problem with accepted bounds into a finite search space:
//! a pool of candidate ids per kind and an edge variable per compatible pair.
//! `solve` searches it, `check_model` re-checks a configuration against the
//! axioms from scratch, and `brute_force_solve` is an exhaustive oracle for
//! small problems.

mod check;
mod formula;
mod ground;
mod oracle;
mod search;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use check::check_model;
pub use ground::{ground, Candidate, GroundConnection, GroundKind, GroundProblem};
pub use oracle::{brute_force_solve, OracleError, ORACLE_MAX_CAP};
pub use search::solve;

use crate::model::{Bound, Configuration};

/// How generated-kind counts are chosen.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum CountStrategy {
    /// Every count vector inside the bounds, smallest total first.
    #[default]
    SweepUp,
    /// The same count for every generated kind.
    Uniform(u64),
    /// Fixed counts for the named kinds; the others are swept.
    Fixed(BTreeMap<String, u64>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    pub max_solutions: usize,
    /// Budget of search-node expansions.
    pub fuel: u64,
    /// 0 keeps the natural candidate order.
    pub seed: u64,
    pub count: CountStrategy,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_solutions: 1, fuel: 10_000_000, seed: 0, count: CountStrategy::SweepUp }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    /// At least one configuration, at most `max_solutions`.
    Solutions(Vec<Configuration>),
    /// The search space holds no configuration.
    Unsat,
    /// The budget ran out before any configuration was found.
    FuelExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("no bounds for component kind `{0}`")]
    MissingBounds(String),
    #[error("generated kind `{0}` has no finite upper bound")]
    UnboundedKind(String),
    #[error("unknown component kind `{0}` in --count")]
    UnknownKind(String),
    #[error("count {count} for `{kind}` lies outside its bounds {bound}")]
    CountOutOfBounds { kind: String, count: u64, bound: Bound },
    #[error("constraint of `{0}` does not resolve against its kinds")]
    BadConstraint(String),
}

/// Axiom families a configuration is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AxiomKind {
    Cardinality,
    ConstraintFormula,
    Catalogue,
    Key,
    OneToMany,
    Literal,
    Domain,
    Structure,
}

impl AxiomKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AxiomKind::Cardinality => "cardinality",
            AxiomKind::ConstraintFormula => "constraint-formula",
            AxiomKind::Catalogue => "catalogue",
            AxiomKind::Key => "key",
            AxiomKind::OneToMany => "one-to-many",
            AxiomKind::Literal => "literal",
            AxiomKind::Domain => "domain",
            AxiomKind::Structure => "structure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub axiom: AxiomKind,
    pub entity: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.axiom.as_str(), self.entity, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn accepted(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, axiom: AxiomKind) -> bool {
        self.violations.iter().any(|v| v.axiom == axiom)
    }
}
