//! Constraint formulas compiled against attribute positions.
//!
//! The search and its final verification evaluate these instead of the AST,
//! so that `check_model` (which uses the AST evaluator) stays an independent
//! judge of every emitted configuration.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::expr::{ArithOp, CmpOp, ConstraintExpr, Side};
use crate::model::{CatalogueRow, ComponentKindDef, Value};

#[derive(Debug, Clone)]
enum Node {
    Const(Value),
    Own(usize),
    Partner(usize),
    Sum(usize),
    Arith(ArithOp, Box<Node>, Box<Node>),
    Cmp(CmpOp, Box<Node>, Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
}

/// `sum(partner.attr) <= rhs` (or `<`) with `rhs` reading only the owner.
#[derive(Debug, Clone)]
struct SumCap {
    attr: usize,
    strict: bool,
    rhs: Node,
}

#[derive(Debug, Clone)]
pub(crate) struct Formula {
    root: Node,
    per_edge: bool,
    edge_conjuncts: Vec<Node>,
    caps: Vec<SumCap>,
}

struct Env<'r> {
    own: &'r CatalogueRow,
    partner: Option<&'r CatalogueRow>,
    partners: &'r [&'r CatalogueRow],
}

fn compile_node(e: &ConstraintExpr, own_side: Side, own: &ComponentKindDef, partner: &ComponentKindDef) -> Option<Node> {
    let sub = |x: &ConstraintExpr| compile_node(x, own_side, own, partner).map(Box::new);
    Some(match e {
        ConstraintExpr::Int(n) => Node::Const(Value::Int(*n)),
        ConstraintExpr::Sym(s) => Node::Const(Value::Sym(s.clone())),
        ConstraintExpr::Attr(r) if r.side == own_side => Node::Own(own.attribute_index(&r.attr)?),
        ConstraintExpr::Attr(r) => Node::Partner(partner.attribute_index(&r.attr)?),
        ConstraintExpr::Sum(r) if r.side != own_side => Node::Sum(partner.attribute_index(&r.attr)?),
        ConstraintExpr::Sum(_) => return None,
        ConstraintExpr::Arith { op, lhs, rhs } => Node::Arith(*op, sub(lhs)?, sub(rhs)?),
        ConstraintExpr::Compare { op, lhs, rhs } => Node::Cmp(*op, sub(lhs)?, sub(rhs)?),
        ConstraintExpr::And(a, b) => Node::And(sub(a)?, sub(b)?),
        ConstraintExpr::Or(a, b) => Node::Or(sub(a)?, sub(b)?),
    })
}

fn reads(node: &Node, pred: &dyn Fn(&Node) -> bool) -> bool {
    pred(node)
        || match node {
            Node::Arith(_, a, b) | Node::Cmp(_, a, b) | Node::And(a, b) | Node::Or(a, b) => {
                reads(a, pred) || reads(b, pred)
            }
            _ => false,
        }
}

fn conjuncts<'n>(node: &'n Node, out: &mut Vec<&'n Node>) {
    match node {
        Node::And(a, b) => {
            conjuncts(a, out);
            conjuncts(b, out);
        }
        other => out.push(other),
    }
}

impl Formula {
    /// Compiles `expr` for the component on `own_side`. `partner_nonnegative`
    /// says whether every partner row holds non-negative values, per attribute.
    pub fn compile(
        expr: &ConstraintExpr,
        own_side: Side,
        own: &ComponentKindDef,
        partner: &ComponentKindDef,
        partner_nonnegative: &[bool],
    ) -> Option<Formula> {
        let root = compile_node(expr, own_side, own, partner)?;
        let per_edge = reads(&root, &|n| matches!(n, Node::Partner(_)));
        let mut parts = Vec::new();
        conjuncts(&root, &mut parts);
        let mut edge_conjuncts = Vec::new();
        let mut caps = Vec::new();
        for part in parts {
            let has_sum = reads(part, &|n| matches!(n, Node::Sum(_)));
            if per_edge && !has_sum {
                edge_conjuncts.push(part.clone());
            }
            let Node::Cmp(op, lhs, rhs) = part else { continue };
            let (sum, bound, strict) = match (op, &**lhs, &**rhs) {
                (CmpOp::Le, Node::Sum(a), r) | (CmpOp::Ge, r, Node::Sum(a)) => (*a, r, false),
                (CmpOp::Lt, Node::Sum(a), r) | (CmpOp::Gt, r, Node::Sum(a)) => (*a, r, true),
                _ => continue,
            };
            let self_only = !reads(bound, &|n| matches!(n, Node::Partner(_) | Node::Sum(_)));
            if self_only && partner_nonnegative.get(sum).copied().unwrap_or(false) {
                caps.push(SumCap { attr: sum, strict, rhs: bound.clone() });
            }
        }
        Some(Formula { root, per_edge, edge_conjuncts, caps })
    }

    /// Full evaluation over the final partner set.
    pub fn holds(&self, own: &CatalogueRow, partners: &[&CatalogueRow]) -> bool {
        if self.per_edge {
            partners
                .iter()
                .all(|p| eval_bool(&self.root, &Env { own, partner: Some(p), partners }).unwrap_or(false))
        } else {
            eval_bool(&self.root, &Env { own, partner: None, partners }).unwrap_or(false)
        }
    }

    /// Conjuncts that must hold on every single edge, whatever the other partners.
    pub fn edge_ok(&self, own: &CatalogueRow, partner: &CatalogueRow) -> bool {
        let env = Env { own, partner: Some(partner), partners: &[] };
        self.edge_conjuncts.iter().all(|c| eval_bool(c, &env).unwrap_or(false))
    }

    /// False once a partial partner set already exceeds a capped sum.
    pub fn caps_ok(&self, own: &CatalogueRow, partners: &[&CatalogueRow]) -> bool {
        if partners.is_empty() {
            return true;
        }
        let env = Env { own, partner: None, partners };
        self.caps.iter().all(|cap| {
            let Ok(Value::Int(rhs)) = eval_value(&cap.rhs, &env) else { return true };
            let mut total: i64 = 0;
            for p in partners {
                let Some(Value::Int(v)) = p.0.get(cap.attr) else { return true };
                let Some(t) = total.checked_add(*v) else { return true };
                total = t;
            }
            if cap.strict {
                total < rhs
            } else {
                total <= rhs
            }
        })
    }
}

fn eval_bool(node: &Node, env: &Env<'_>) -> Option<bool> {
    match node {
        Node::And(a, b) => Some(eval_bool(a, env)? && eval_bool(b, env)?),
        Node::Or(a, b) => Some(eval_bool(a, env)? || eval_bool(b, env)?),
        Node::Cmp(op, a, b) => match (eval_value(a, env).ok()?, eval_value(b, env).ok()?) {
            (Value::Int(x), Value::Int(y)) => Some(op.holds(&x, &y)),
            (Value::Sym(x), Value::Sym(y)) if !op.is_ordering() => Some(op.holds(&x, &y)),
            _ => None,
        },
        _ => None,
    }
}

fn eval_value(node: &Node, env: &Env<'_>) -> Result<Value, ()> {
    let int = |n: &Node| match eval_value(n, env)? {
        Value::Int(i) => Ok(i),
        Value::Sym(_) => Err(()),
    };
    match node {
        Node::Const(v) => Ok(v.clone()),
        Node::Own(i) => env.own.0.get(*i).cloned().ok_or(()),
        Node::Partner(i) => env.partner.and_then(|p| p.0.get(*i)).cloned().ok_or(()),
        Node::Sum(i) => {
            let mut total: i64 = 0;
            for p in env.partners {
                match p.0.get(*i) {
                    Some(Value::Int(v)) => total = total.checked_add(*v).ok_or(())?,
                    _ => return Err(()),
                }
            }
            Ok(Value::Int(total))
        }
        Node::Arith(op, a, b) => {
            let (x, y) = (int(a)?, int(b)?);
            let r = match op {
                ArithOp::Add => x.checked_add(y),
                ArithOp::Sub => x.checked_sub(y),
                ArithOp::Mul => x.checked_mul(y),
            };
            r.map(Value::Int).ok_or(())
        }
        _ => Err(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AttributeDecl, Catalogue, ComponentClass};
    use alloc::string::ToString;

    fn kind(name: &str, attrs: &[&str]) -> ComponentKindDef {
        ComponentKindDef {
            name: name.to_string(),
            class: ComponentClass::Input,
            attributes: attrs.iter().map(|a| AttributeDecl { name: a.to_string(), type_name: "T".into() }).collect(),
            catalogue: Catalogue::Unrestricted,
        }
    }

    fn row(v: &[i64]) -> CatalogueRow {
        CatalogueRow(v.iter().map(|x| Value::Int(*x)).collect())
    }

    #[test]
    fn capacity_formula() {
        let bin = kind("Bin", &["cap"]);
        let thing = kind("Thing", &["size"]);
        // sum(left.size) <= right.cap, owned by the bin on the right.
        let e = ConstraintExpr::compare(CmpOp::Le, ConstraintExpr::sum(Side::Left, "size"), ConstraintExpr::attr(Side::Right, "cap"));
        let f = Formula::compile(&e, Side::Right, &bin, &thing, &[true]).unwrap();
        let (a, b) = (row(&[2]), row(&[3]));
        assert!(f.holds(&row(&[5]), &[&a, &b]));
        assert!(!f.holds(&row(&[4]), &[&a, &b]));
        assert!(f.caps_ok(&row(&[4]), &[&a]));
        assert!(!f.caps_ok(&row(&[4]), &[&a, &b]));
        assert!(f.holds(&row(&[0]), &[]));
    }

    #[test]
    fn per_edge_conjuncts() {
        let k = kind("K", &["x"]);
        let e = ConstraintExpr::and(
            ConstraintExpr::compare(CmpOp::Eq, ConstraintExpr::attr(Side::Left, "x"), ConstraintExpr::attr(Side::Right, "x")),
            ConstraintExpr::compare(CmpOp::Le, ConstraintExpr::sum(Side::Right, "x"), ConstraintExpr::Int(3)),
        );
        let f = Formula::compile(&e, Side::Left, &k, &k, &[true]).unwrap();
        assert!(f.edge_ok(&row(&[1]), &row(&[1])));
        assert!(!f.edge_ok(&row(&[1]), &row(&[2])));
        assert!(f.holds(&row(&[1]), &[]));
        let one = row(&[1]);
        assert!(!f.holds(&row(&[1]), &[&one, &one, &one, &one]));
        assert_eq!(f.caps.len(), 1);
    }
}
