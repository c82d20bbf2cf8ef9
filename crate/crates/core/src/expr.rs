//! Constraint formulas attached to connection directions.
//!
//! A formula is evaluated for one component (the side that owns the
//! direction) against its set of connected partners. Attribute references
//! name a side of the connection; `sum(side.attr)` aggregates over every
//! partner. If the formula reads a partner attribute outside an aggregate it
//! must hold for each partner edge; otherwise it is evaluated once.

use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use crate::model::{CatalogueRow, ComponentKindDef, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AttrRef {
    pub side: Side,
    pub attr: String,
}

impl AttrRef {
    pub fn new(side: Side, attr: &str) -> Self {
        AttrRef { side, attr: attr.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Le,
    Lt,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    pub fn is_ordering(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }

    pub fn holds<T: Ord>(self, a: &T, b: &T) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Le => a <= b,
            CmpOp::Lt => a < b,
            CmpOp::Ge => a >= b,
            CmpOp::Gt => a > b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ConstraintExpr {
    Int(i64),
    Sym(String),
    Attr(AttrRef),
    Sum(AttrRef),
    Arith { op: ArithOp, lhs: Box<ConstraintExpr>, rhs: Box<ConstraintExpr> },
    Compare { op: CmpOp, lhs: Box<ConstraintExpr>, rhs: Box<ConstraintExpr> },
    And(Box<ConstraintExpr>, Box<ConstraintExpr>),
    Or(Box<ConstraintExpr>, Box<ConstraintExpr>),
}

impl ConstraintExpr {
    pub fn attr(side: Side, attr: &str) -> Self {
        ConstraintExpr::Attr(AttrRef::new(side, attr))
    }

    pub fn sum(side: Side, attr: &str) -> Self {
        ConstraintExpr::Sum(AttrRef::new(side, attr))
    }

    pub fn compare(op: CmpOp, lhs: ConstraintExpr, rhs: ConstraintExpr) -> Self {
        ConstraintExpr::Compare { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn arith(op: ArithOp, lhs: ConstraintExpr, rhs: ConstraintExpr) -> Self {
        ConstraintExpr::Arith { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn and(lhs: ConstraintExpr, rhs: ConstraintExpr) -> Self {
        ConstraintExpr::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: ConstraintExpr, rhs: ConstraintExpr) -> Self {
        ConstraintExpr::Or(Box::new(lhs), Box::new(rhs))
    }

    pub fn is_boolean(&self) -> bool {
        matches!(self, ConstraintExpr::Compare { .. } | ConstraintExpr::And(..) | ConstraintExpr::Or(..))
    }

    /// Calls `f` on every node, parents before children.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a ConstraintExpr)) {
        f(self);
        match self {
            ConstraintExpr::Arith { lhs, rhs, .. }
            | ConstraintExpr::Compare { lhs, rhs, .. }
            | ConstraintExpr::And(lhs, rhs)
            | ConstraintExpr::Or(lhs, rhs) => {
                lhs.visit(f);
                rhs.visit(f);
            }
            _ => {}
        }
    }

    /// True if the formula reads an attribute of the partner on `partner_side`
    /// outside an aggregate, i.e. it has to be evaluated per edge.
    pub fn reads_partner(&self, partner_side: Side) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if let ConstraintExpr::Attr(r) = e {
                found |= r.side == partner_side;
            }
        });
        found
    }

    fn precedence(&self) -> u8 {
        match self {
            ConstraintExpr::Or(..) => 1,
            ConstraintExpr::And(..) => 2,
            ConstraintExpr::Compare { .. } => 3,
            ConstraintExpr::Arith { op: ArithOp::Add | ArithOp::Sub, .. } => 4,
            ConstraintExpr::Arith { op: ArithOp::Mul, .. } => 5,
            ConstraintExpr::Int(n) if *n < 0 => 6,
            _ => 7,
        }
    }
}

fn write_operand(
    f: &mut fmt::Formatter<'_>,
    e: &ConstraintExpr,
    min_prec: u8,
) -> fmt::Result {
    if e.precedence() < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Canonical concrete syntax; left-associative operators, parentheses only
/// where needed to reparse the same tree.
impl fmt::Display for ConstraintExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintExpr::Int(n) => write!(f, "{n}"),
            ConstraintExpr::Sym(s) => f.write_str(s),
            ConstraintExpr::Attr(r) => write!(f, "{}.{}", r.side.as_str(), r.attr),
            ConstraintExpr::Sum(r) => write!(f, "sum({}.{})", r.side.as_str(), r.attr),
            ConstraintExpr::Arith { op, lhs, rhs } => {
                let (sym, p) = match op {
                    ArithOp::Add => ("+", 4),
                    ArithOp::Sub => ("-", 4),
                    ArithOp::Mul => ("*", 5),
                };
                write_operand(f, lhs, p)?;
                write!(f, " {sym} ")?;
                write_operand(f, rhs, p + 1)
            }
            ConstraintExpr::Compare { op, lhs, rhs } => {
                write_operand(f, lhs, 4)?;
                write!(f, " {} ", op.as_str())?;
                write_operand(f, rhs, 4)
            }
            ConstraintExpr::And(lhs, rhs) => {
                write_operand(f, lhs, 2)?;
                f.write_str(" and ")?;
                write_operand(f, rhs, 3)
            }
            ConstraintExpr::Or(lhs, rhs) => {
                write_operand(f, lhs, 1)?;
                f.write_str(" or ")?;
                write_operand(f, rhs, 2)
            }
        }
    }
}

/// The attribute row of one component, readable by attribute name.
#[derive(Debug, Clone, Copy)]
pub struct Binding<'a> {
    pub kind: &'a ComponentKindDef,
    pub row: &'a CatalogueRow,
}

impl<'a> Binding<'a> {
    pub fn new(kind: &'a ComponentKindDef, row: &'a CatalogueRow) -> Self {
        Binding { kind, row }
    }

    pub fn get(&self, attr: &str) -> Option<&'a Value> {
        self.row.0.get(self.kind.attribute_index(attr)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("attribute `{}.{}` does not resolve", .0.side.as_str(), .0.attr)]
    Unresolved(AttrRef),
    #[error("aggregate or partner reference used where no partner is in scope")]
    NoPartner,
    #[error("arithmetic on a non-integer value")]
    NotAnInteger,
    #[error("comparison between incompatible values")]
    TypeMismatch,
    #[error("expected a boolean formula")]
    NotBoolean,
    #[error("expected a value, found a formula")]
    NotAValue,
    #[error("integer overflow")]
    Overflow,
}

struct Scope<'s, 'a> {
    self_side: Side,
    this: &'s Binding<'a>,
    partner: Option<&'s Binding<'a>>,
    partners: &'s [Binding<'a>],
}

/// Evaluates `expr` for the component `this` sitting on `self_side` of its
/// connection, with `partners` the components it is connected to.
pub fn eval_constraint(
    expr: &ConstraintExpr,
    self_side: Side,
    this: &Binding<'_>,
    partners: &[Binding<'_>],
) -> Result<bool, EvalError> {
    if expr.reads_partner(self_side.opposite()) {
        for p in partners {
            let scope = Scope { self_side, this, partner: Some(p), partners };
            if !eval_bool(expr, &scope)? {
                return Ok(false);
            }
        }
        Ok(true)
    } else {
        eval_bool(expr, &Scope { self_side, this, partner: None, partners })
    }
}

fn eval_bool(expr: &ConstraintExpr, scope: &Scope<'_, '_>) -> Result<bool, EvalError> {
    match expr {
        ConstraintExpr::And(a, b) => Ok(eval_bool(a, scope)? && eval_bool(b, scope)?),
        ConstraintExpr::Or(a, b) => Ok(eval_bool(a, scope)? || eval_bool(b, scope)?),
        ConstraintExpr::Compare { op, lhs, rhs } => {
            let a = eval_value(lhs, scope)?;
            let b = eval_value(rhs, scope)?;
            match (&a, &b) {
                (Value::Int(x), Value::Int(y)) => Ok(op.holds(x, y)),
                (Value::Sym(x), Value::Sym(y)) if !op.is_ordering() => Ok(op.holds(x, y)),
                _ => Err(EvalError::TypeMismatch),
            }
        }
        _ => Err(EvalError::NotBoolean),
    }
}

fn int_of(v: &Value) -> Result<i64, EvalError> {
    v.as_int().ok_or(EvalError::NotAnInteger)
}

fn eval_value(expr: &ConstraintExpr, scope: &Scope<'_, '_>) -> Result<Value, EvalError> {
    match expr {
        ConstraintExpr::Int(n) => Ok(Value::Int(*n)),
        ConstraintExpr::Sym(s) => Ok(Value::Sym(s.clone())),
        ConstraintExpr::Attr(r) => {
            let binding = if r.side == scope.self_side {
                scope.this
            } else {
                scope.partner.ok_or(EvalError::NoPartner)?
            };
            binding.get(&r.attr).cloned().ok_or_else(|| EvalError::Unresolved(r.clone()))
        }
        ConstraintExpr::Sum(r) => {
            if r.side == scope.self_side {
                return Err(EvalError::NoPartner);
            }
            let mut total: i64 = 0;
            for p in scope.partners {
                let v = p.get(&r.attr).ok_or_else(|| EvalError::Unresolved(r.clone()))?;
                total = total.checked_add(int_of(v)?).ok_or(EvalError::Overflow)?;
            }
            Ok(Value::Int(total))
        }
        ConstraintExpr::Arith { op, lhs, rhs } => {
            let a = int_of(&eval_value(lhs, scope)?)?;
            let b = int_of(&eval_value(rhs, scope)?)?;
            let r = match op {
                ArithOp::Add => a.checked_add(b),
                ArithOp::Sub => a.checked_sub(b),
                ArithOp::Mul => a.checked_mul(b),
            };
            r.map(Value::Int).ok_or(EvalError::Overflow)
        }
        _ => Err(EvalError::NotAValue),
    }
}
