//! Structural well-formedness of a [`ProblemSpec`].
//!
//! Every invariant of the model types is checked here and reported as a
//! diagnostic naming the offending entity; nothing is rejected by panicking.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::diag::{Code, Diagnostic, Entity};
use crate::expr::{ConstraintExpr, Side};
use crate::model::{
    BinaryConnectionDef, Cardinality, Catalogue, ComponentClass, ComponentKindDef, Direction,
    Limit, ProblemSpec,
};

struct Sink(Vec<Diagnostic>);

impl Sink {
    fn push(&mut self, code: Code, entity: Entity, message: String) {
        self.0.push(Diagnostic::error(code, Some(entity), message));
    }
}

/// Returns an empty list iff every structural invariant holds.
pub fn well_formed(spec: &ProblemSpec) -> Vec<Diagnostic> {
    let mut sink = Sink(Vec::new());
    check_types(spec, &mut sink);
    check_kinds(spec, &mut sink);
    check_binary(spec, &mut sink);
    check_one_to_many(spec, &mut sink);
    if !spec.kinds.iter().any(|k| matches!(k.class, ComponentClass::Input | ComponentClass::Both)) {
        // Attached to the first kind so the parser has a span to point at.
        let entity = spec
            .kinds
            .iter()
            .map(|k| Entity::Kind(k.name.clone()))
            .min()
            .unwrap_or(Entity::Kind(String::new()));
        sink.push(Code::NoInputKind, entity, "no component kind of class input or both".into());
    }
    sink.0
}

fn check_types(spec: &ProblemSpec, sink: &mut Sink) {
    let mut seen = BTreeSet::new();
    for ty in &spec.attribute_types {
        let entity = || Entity::AttributeType(ty.name.clone());
        if !seen.insert(ty.name.as_str()) {
            sink.push(Code::DuplicateName, entity(), format!("type `{}` declared twice", ty.name));
        }
        if ty.values.is_empty() {
            sink.push(Code::EmptyType, entity(), format!("type `{}` has no values", ty.name));
        }
        let mut values = BTreeSet::new();
        for v in &ty.values {
            if !values.insert(v) {
                sink.push(Code::DuplicateValue, entity(), format!("type `{}` lists `{v}` twice", ty.name));
            }
        }
    }
}

fn check_kinds(spec: &ProblemSpec, sink: &mut Sink) {
    let mut seen = BTreeSet::new();
    for kind in &spec.kinds {
        let entity = || Entity::Kind(kind.name.clone());
        if !seen.insert(kind.name.as_str()) {
            sink.push(Code::DuplicateName, entity(), format!("component `{}` declared twice", kind.name));
        }
        let mut attrs = BTreeSet::new();
        for a in &kind.attributes {
            if !attrs.insert(a.name.as_str()) {
                sink.push(
                    Code::DuplicateAttribute,
                    entity(),
                    format!("attribute `{}` declared twice on `{}`", a.name, kind.name),
                );
            }
            if spec.attribute_type(&a.type_name).is_none() {
                sink.push(
                    Code::UnresolvedRef,
                    entity(),
                    format!("attribute `{}` of `{}` has unknown type `{}`", a.name, kind.name, a.type_name),
                );
            }
        }
        check_catalogue(spec, kind, sink);
    }
}

fn check_catalogue(spec: &ProblemSpec, kind: &ComponentKindDef, sink: &mut Sink) {
    let Catalogue::Rows(rows) = &kind.catalogue else { return };
    if rows.is_empty() {
        sink.push(
            Code::EmptyCatalogue,
            Entity::Kind(kind.name.clone()),
            format!("catalogue of `{}` is empty", kind.name),
        );
    }
    let types = spec.attribute_types_of(kind);
    let mut seen = BTreeSet::new();
    for (i, row) in rows.iter().enumerate() {
        let entity = || Entity::CatalogueRow { kind: kind.name.clone(), row: i };
        if row.0.len() != kind.attributes.len() {
            sink.push(
                Code::CatalogueArity,
                entity(),
                format!(
                    "catalogue row of `{}` has {} values, expected {}",
                    kind.name,
                    row.0.len(),
                    kind.attributes.len()
                ),
            );
            continue;
        }
        for ((value, ty), decl) in row.0.iter().zip(&types).zip(&kind.attributes) {
            if let Some(ty) = ty {
                if !ty.contains(value) {
                    sink.push(
                        Code::CatalogueValue,
                        entity(),
                        format!("`{value}` is not a value of type `{}` (attribute `{}`)", ty.name, decl.name),
                    );
                }
            }
        }
        if !seen.insert(row) {
            sink.push(Code::DuplicateRow, entity(), format!("catalogue of `{}` repeats a row", kind.name));
        }
    }
}

fn check_card(card: &Cardinality, entity: &Entity, allow_unbounded: bool, sink: &mut Sink) {
    match card.upper {
        Limit::Finite(u) => {
            if u == 0 {
                sink.push(Code::CardZeroUpper, entity.clone(), "cardinality upper bound must be at least 1".into());
            }
            if card.lower > u {
                sink.push(
                    Code::CardOrder,
                    entity.clone(),
                    format!("cardinality lower bound {} exceeds upper bound {u}", card.lower),
                );
            }
        }
        Limit::Unbounded if !allow_unbounded => {
            sink.push(
                Code::CardUnbounded,
                entity.clone(),
                "binary connection cardinalities need a finite upper bound".into(),
            );
        }
        Limit::Unbounded => {}
    }
}

fn check_binary(spec: &ProblemSpec, sink: &mut Sink) {
    let mut names = BTreeSet::new();
    let mut pairs = BTreeSet::new();
    for conn in &spec.binary_connections {
        let entity = || Entity::Connection(conn.name.clone());
        if !names.insert(conn.name.as_str()) {
            sink.push(Code::DuplicateName, entity(), format!("connection `{}` declared twice", conn.name));
        }
        let pair = if conn.left <= conn.right {
            (conn.left.as_str(), conn.right.as_str())
        } else {
            (conn.right.as_str(), conn.left.as_str())
        };
        if !pairs.insert(pair) {
            sink.push(
                Code::DuplicateConnection,
                entity(),
                format!("more than one connection between `{}` and `{}`", pair.0, pair.1),
            );
        }
        let left = spec.kind(&conn.left);
        let right = spec.kind(&conn.right);
        for (name, k) in [(&conn.left, left), (&conn.right, right)] {
            if k.is_none() {
                sink.push(Code::UnresolvedRef, entity(), format!("unknown component kind `{name}`"));
            }
        }
        let declared = conn.forward.is_some() as usize + conn.backward.is_some() as usize;
        if conn.is_self_loop() {
            if declared != 1 {
                sink.push(
                    Code::SelfLoopDirections,
                    entity(),
                    format!("self-loop `{}` must declare exactly one direction", conn.name),
                );
            }
        } else if declared != 2 {
            sink.push(
                Code::MissingDirection,
                entity(),
                format!("connection `{}` must declare both forward and backward", conn.name),
            );
        }
        for direction in [Direction::Forward, Direction::Backward] {
            let Some(rule) = conn.rule(direction) else { continue };
            let card_entity = Entity::Cardinality { connection: conn.name.clone(), direction };
            check_card(&rule.card, &card_entity, false, sink);
            if let (Some(expr), Some(l), Some(r)) = (&rule.constraint, left, right) {
                let entity = Entity::Constraint { connection: conn.name.clone(), direction };
                check_constraint(spec, conn, direction, expr, l, r, &entity, sink);
            }
        }
    }
}

fn check_one_to_many(spec: &ProblemSpec, sink: &mut Sink) {
    let mut seen = BTreeSet::new();
    for otm in &spec.one_to_many {
        let entity = || Entity::OneToMany(otm.name());
        let mut rights: Vec<&str> = otm.rights.iter().map(String::as_str).collect();
        rights.sort_unstable();
        if !seen.insert((otm.left.as_str(), rights.clone())) {
            sink.push(Code::DuplicateConnection, entity(), format!("`{}` declared twice", otm.name()));
        }
        rights.dedup();
        if rights.len() != otm.rights.len() || rights.len() < 2 {
            sink.push(
                Code::OtmRights,
                entity(),
                format!("`{}` needs at least two distinct kinds on the right", otm.name()),
            );
        }
        if spec.kind(&otm.left).is_none() {
            sink.push(Code::UnresolvedRef, entity(), format!("unknown component kind `{}`", otm.left));
        }
        if otm.rights.contains(&otm.left) {
            sink.push(
                Code::OtmSelf,
                entity(),
                format!("`{}` may not appear in its own one-to-many set", otm.left),
            );
        }
        if otm.card.lower == 0 {
            sink.push(Code::OtmLower, entity(), "one-to-many lower bound must be at least 1".into());
        }
        check_card(&otm.card, &entity(), true, sink);
        for right in &otm.rights {
            if spec.kind(right).is_none() {
                sink.push(Code::UnresolvedRef, entity(), format!("unknown component kind `{right}`"));
            } else if *right != otm.left && spec.connection_between(&otm.left, right).is_none() {
                sink.push(
                    Code::OtmMissingBinary,
                    entity(),
                    format!("`{}` has no binary connection to `{right}`", otm.left),
                );
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Int,
    Sym,
    /// A value whose attribute type mixes integers and symbols.
    Any,
    Bool,
}

struct ExprCtx<'a> {
    spec: &'a ProblemSpec,
    left: &'a ComponentKindDef,
    right: &'a ComponentKindDef,
    partner_side: Side,
    entity: &'a Entity,
    where_: String,
}

#[allow(clippy::too_many_arguments)]
fn check_constraint(
    spec: &ProblemSpec,
    conn: &BinaryConnectionDef,
    direction: Direction,
    expr: &ConstraintExpr,
    left: &ComponentKindDef,
    right: &ComponentKindDef,
    entity: &Entity,
    sink: &mut Sink,
) {
    let partner_side = match direction {
        Direction::Forward => Side::Right,
        Direction::Backward => Side::Left,
    };
    let ctx = ExprCtx {
        spec,
        left,
        right,
        partner_side,
        entity,
        where_: format!("{} constraint of `{}`", direction.as_str(), conn.name),
    };
    match type_of(&ctx, expr, false, sink) {
        Some(Ty::Bool) | None => {}
        Some(_) => sink.push(Code::ExprType, entity.clone(), format!("{} is not a formula", ctx.where_)),
    }
}

/// Types `expr`, reporting problems. `None` means an error was already reported.
fn type_of(ctx: &ExprCtx<'_>, expr: &ConstraintExpr, under_compare: bool, sink: &mut Sink) -> Option<Ty> {
    let entity = ctx.entity;
    match expr {
        ConstraintExpr::Int(_) => Some(Ty::Int),
        ConstraintExpr::Sym(_) => Some(Ty::Sym),
        ConstraintExpr::Attr(r) => attr_type(ctx, &r.attr, r.side, sink),
        ConstraintExpr::Sum(r) => {
            if !under_compare {
                sink.push(
                    Code::ExprAggregate,
                    entity.clone(),
                    format!("{}: `sum` must be an operand of a comparison", ctx.where_),
                );
                return None;
            }
            if r.side != ctx.partner_side {
                sink.push(
                    Code::ExprAggregate,
                    entity.clone(),
                    format!(
                        "{}: `sum` must range over the partners ({}), not `{}`",
                        ctx.where_,
                        ctx.partner_side.as_str(),
                        r.side.as_str()
                    ),
                );
                return None;
            }
            match attr_type(ctx, &r.attr, r.side, sink)? {
                Ty::Int => Some(Ty::Int),
                _ => {
                    sink.push(
                        Code::ExprType,
                        entity.clone(),
                        format!("{}: `sum` needs an integer attribute, `{}` is not", ctx.where_, r.attr),
                    );
                    None
                }
            }
        }
        ConstraintExpr::Arith { lhs, rhs, .. } => {
            let a = type_of(ctx, lhs, false, sink);
            let b = type_of(ctx, rhs, false, sink);
            for t in [a, b].into_iter().flatten() {
                if t != Ty::Int {
                    sink.push(
                        Code::ExprType,
                        entity.clone(),
                        format!("{}: arithmetic needs integer operands", ctx.where_),
                    );
                    return None;
                }
            }
            a.and(b)
        }
        ConstraintExpr::Compare { op, lhs, rhs } => {
            let a = type_of(ctx, lhs, true, sink);
            let b = type_of(ctx, rhs, true, sink);
            let (a, b) = (a?, b?);
            let ok = match (a, b) {
                (Ty::Bool, _) | (_, Ty::Bool) => false,
                (Ty::Int, Ty::Int) => true,
                (Ty::Sym, Ty::Sym) | (Ty::Any, _) | (_, Ty::Any) => !op.is_ordering(),
                _ => false,
            };
            if ok {
                Some(Ty::Bool)
            } else {
                sink.push(
                    Code::ExprType,
                    entity.clone(),
                    format!("{}: `{}` cannot compare these operands", ctx.where_, op.as_str()),
                );
                None
            }
        }
        ConstraintExpr::And(a, b) | ConstraintExpr::Or(a, b) => {
            let ta = type_of(ctx, a, false, sink);
            let tb = type_of(ctx, b, false, sink);
            for t in [ta, tb].into_iter().flatten() {
                if t != Ty::Bool {
                    sink.push(
                        Code::ExprType,
                        entity.clone(),
                        format!("{}: `and`/`or` need formulas on both sides", ctx.where_),
                    );
                    return None;
                }
            }
            Some(Ty::Bool)
        }
    }
}

fn attr_type(ctx: &ExprCtx<'_>, attr: &str, side: Side, sink: &mut Sink) -> Option<Ty> {
    let kind = match side {
        Side::Left => ctx.left,
        Side::Right => ctx.right,
    };
    let Some(decl) = kind.attributes.iter().find(|a| a.name == attr) else {
        sink.push(
            Code::UnresolvedRef,
            ctx.entity.clone(),
            format!("{}: `{}` has no attribute `{attr}`", ctx.where_, kind.name),
        );
        return None;
    };
    // An unresolved attribute type is reported with the kind.
    let ty = ctx.spec.attribute_type(&decl.type_name)?;
    Some(if ty.is_integer() {
        Ty::Int
    } else if ty.values.iter().all(|v| matches!(v, crate::model::Value::Sym(_))) {
        Ty::Sym
    } else {
        Ty::Any
    })
}
