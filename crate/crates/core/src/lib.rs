//! Core of the LoCo configuration toolkit.
//!
//! A configuration problem is a set of component kinds with typed attributes,
//! binary connections carrying counting-quantifier cardinalities in both
//! directions, and one-to-many connections. This crate parses the textual
//! form, checks that every admissible problem can only have finite models,
//! derives per-kind count bounds by worklist propagation and searches for
//! concrete configurations.
//!
//! The crate is `no_std` and only needs `alloc`; file IO, report formats and
//! the command-line driver live in the `loco` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bounds;
pub mod diag;
pub mod expr;
pub mod model;
pub mod solver;
pub mod syntax;
pub mod validate;
pub mod wellformed;

#[cfg(any(test, feature = "testkit"))]
pub mod testkit;

pub use bounds::{
    binary_bound_step, one_to_many_bound_step, propagate, propagate_with, update_bounds,
    BoundsMap, ContractError, KindBounds, Outcome, PropagateOptions, Propagation,
    ProvenanceStep, RejectCertificate, WorklistOrder,
};
pub use diag::{Code, Diagnostic, Entity, Severity, SourceSpan};
pub use expr::{eval_constraint, ArithOp, AttrRef, Binding, CmpOp, ConstraintExpr, EvalError, Side};
pub use model::{
    AttributeDecl, AttributeTypeDef, Bound, Catalogue, CatalogueRow, Cardinality,
    BinaryConnectionDef, ComponentClass, ComponentInstance, ComponentKindDef, Configuration,
    ConnectionLiteral, Direction, DirectionRule, EffectiveClass, Incidence, InputDomain,
    InstanceSpec, Limit, ModelError, OneToManyConnectionDef, Orientation, Polarity,
    ProblemSpec, RequiredAtom, Value,
};
pub use solver::{
    brute_force_solve, check_model, ground, solve, AxiomKind, CountStrategy, GroundProblem,
    OracleError, SolveError, ORACLE_MAX_CAP, SolveOptions, SolveOutcome, Verdict, Violation,
};
pub use syntax::{parse, parse_named, serialize, Document};
pub use validate::{
    admissibility, check_zero_lower_bound_rule, compute_level_mapping, compute_level_mapping_with,
    effective_classes, is_level_mapping, validate_instance, Classes, LevelMapping, Unleveled,
};
pub use wellformed::well_formed;
