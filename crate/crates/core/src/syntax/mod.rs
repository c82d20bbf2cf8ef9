//! Text form of a configuration problem.
//!
//! ```text
//! type Size = {1,2,3,4,5}
//! component ThingA class input attributes (size: Size)
//! component Bin class generated
//! connect ThingA - Bin forward [1,1] backward [0,5] where sum(left.size) <= 5
//! instance { input ThingA = 20 }
//! ```
//!
//! `serialize` emits a canonical form: `parse(serialize(d))` reproduces the
//! same problem and instance, and serializing again is byte-identical.

mod lexer;
mod parser;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::diag::{Diagnostic, Entity, SourceSpan};
use crate::model::{Catalogue, EffectiveClass, InstanceSpec, Polarity, ProblemSpec, Value};

/// A parsed file: the problem, its instance knowledge and declaration spans.
#[derive(Debug, Clone)]
pub struct Document {
    pub file: String,
    pub problem: ProblemSpec,
    pub instance: InstanceSpec,
    pub spans: SpanIndex,
}

impl Document {
    /// Attaches a source span to diagnostics that only name an entity.
    pub fn locate(&self, mut diagnostics: Vec<Diagnostic>) -> Vec<Diagnostic> {
        for d in &mut diagnostics {
            if d.span.is_none() {
                d.span = d.entity.as_ref().and_then(|e| self.spans.lookup(e, false)).cloned();
            }
        }
        diagnostics
    }
}

/// Every source span at which an entity was declared, in source order.
#[derive(Debug, Clone, Default)]
pub struct SpanIndex(BTreeMap<Entity, Vec<SourceSpan>>);

impl SpanIndex {
    pub fn insert(&mut self, entity: Entity, span: SourceSpan) {
        self.0.entry(entity).or_default().push(span);
    }

    /// First declaration, or the last one when reporting a duplicate.
    pub fn lookup(&self, entity: &Entity, duplicate: bool) -> Option<&SourceSpan> {
        let spans = self.0.get(entity)?;
        if duplicate {
            spans.last()
        } else {
            spans.first()
        }
    }
}

pub fn parse(text: &str) -> Result<Document, Vec<Diagnostic>> {
    parse_named("<input>", text)
}

pub fn parse_named(file: &str, text: &str) -> Result<Document, Vec<Diagnostic>> {
    parser::parse_document(file, text)
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

fn value(v: &Value) -> String {
    alloc::format!("{v}")
}

/// Canonical text of a problem and its instance knowledge.
pub fn serialize(problem: &ProblemSpec, instance: &InstanceSpec) -> String {
    let mut out = String::new();
    for ty in &problem.attribute_types {
        let _ = writeln!(out, "type {} = {{{}}}", ty.name, join(&ty.values, value));
    }
    for kind in &problem.kinds {
        let _ = write!(out, "component {} class {}", kind.name, kind.class.as_str());
        if !kind.attributes.is_empty() {
            let attrs = join(&kind.attributes, |a| alloc::format!("{}: {}", a.name, a.type_name));
            let _ = write!(out, " attributes ({attrs})");
        }
        out.push('\n');
    }
    for kind in &problem.kinds {
        if let Catalogue::Rows(rows) = &kind.catalogue {
            let rows: Vec<String> = rows.iter().map(|r| alloc::format!("({})", join(&r.0, value))).collect();
            let _ = writeln!(out, "catalogue {} {{{}}}", kind.name, rows.join("; "));
        }
    }
    for conn in &problem.binary_connections {
        let _ = write!(out, "connect {} - {}", conn.left, conn.right);
        for (word, rule) in [("forward", &conn.forward), ("backward", &conn.backward)] {
            let Some(rule) = rule else { continue };
            let _ = write!(out, " {word} [{}, {}]", rule.card.lower, rule.card.upper);
            if let Some(expr) = &rule.constraint {
                let _ = write!(out, " where {expr}");
            }
        }
        out.push('\n');
    }
    for otm in &problem.one_to_many {
        let _ = writeln!(
            out,
            "connect-one-to-many {} -> {{{}}} [{}, {}] {}",
            otm.left,
            otm.rights.join(", "),
            otm.card.lower,
            otm.card.upper,
            if otm.exclusive { "exclusive" } else { "inclusive" },
        );
    }
    if !instance.is_empty() {
        out.push_str("instance {\n");
        for (kind, class) in &instance.both_assignments {
            if *class == EffectiveClass::Generated {
                let _ = writeln!(out, "  generated {kind}");
            }
        }
        for d in &instance.input_domains {
            if d.is_counted() {
                let _ = writeln!(out, "  input {} = {}", d.kind, d.ids.len());
            } else {
                let _ = writeln!(out, "  input {} = {{{}}}", d.kind, d.ids.join(", "));
            }
        }
        for atom in &instance.required {
            let _ = write!(out, "  require {}({}", atom.kind, atom.id);
            for b in &atom.bindings {
                match b {
                    Some(v) => {
                        let _ = write!(out, ", {v}");
                    }
                    None => out.push_str(", _"),
                }
            }
            out.push_str(")\n");
        }
        for lit in &instance.literals {
            let word = match lit.polarity {
                Polarity::Positive => "assert",
                Polarity::Negative => "deny",
            };
            let _ = writeln!(out, "  {word} {}({}, {})", lit.connection, lit.left_id, lit.right_id);
        }
        out.push_str("}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::Code;
    use crate::testkit::BIN_PACKING;

    fn codes(text: &str) -> Vec<Code> {
        parse(text).unwrap_err().into_iter().map(|d| d.code).collect()
    }

    #[test]
    fn bin_packing_shape() {
        let doc = parse(BIN_PACKING).unwrap();
        assert_eq!(doc.problem.kinds.len(), 3);
        assert_eq!(doc.problem.binary_connections.len(), 2);
        assert_eq!(doc.problem.one_to_many.len(), 1);
        assert_eq!(doc.instance.domain("ThingB").unwrap().ids.len(), 20);
    }

    #[test]
    fn empty_input() {
        assert_eq!(codes(""), [Code::SyntaxEmpty]);
        assert_eq!(codes("  # only a comment\n"), [Code::SyntaxEmpty]);
    }

    #[test]
    fn card_order_points_at_bracket() {
        let text = "component A class input\ncomponent B class generated\n\
                    connect A - B forward [2,1] backward [1,1]\n";
        let errs = parse(text).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].code, Code::CardOrder);
        let span = errs[0].span.as_ref().unwrap();
        assert_eq!((span.line, span.column, span.length), (3, 23, 5));
    }

    #[test]
    fn syntax_and_reference_errors() {
        assert_eq!(codes("component A class nope"), [Code::Syntax]);
        assert_eq!(codes("component A class input\ncatalogue Z {(1)}"), [Code::UnresolvedRef]);
        assert_eq!(codes("type T = {1}\ncomponent A class input attributes (x: T)\nconnect A - A forward [0,2] where max(right.x) <= 1"), [Code::Syntax]);
        assert_eq!(codes("component A class input\ncomponent A class input"), [Code::DuplicateName]);
        assert_eq!(codes("type T = {1, 2\n"), [Code::Syntax]);
    }

    #[test]
    fn duplicate_points_at_second_declaration() {
        let errs = parse("component A class input\ncomponent A class input").unwrap_err();
        assert_eq!(errs[0].span.as_ref().unwrap().line, 2);
    }

    #[test]
    fn instance_statements() {
        let doc = parse(
            "type C = {red, blue}\n\
             component A class input attributes (c: C)\n\
             component B class both\ncomponent G class both\n\
             connect A - B forward [1,1] backward [0,3] where left.c != blue\n\
             connect A - G forward [0,1] backward [1,1]\n\
             instance { input A = {a1, a2} input B = 2 generated G\n\
               require A(a1, red) require G(g1) assert A2B(a1, B_1) deny A2G(a2, g1) }",
        )
        .unwrap();
        let inst = &doc.instance;
        assert_eq!(inst.both_assignment("G"), Some(EffectiveClass::Generated));
        assert_eq!(inst.both_assignment("B"), Some(EffectiveClass::Input));
        assert_eq!(inst.required[0].bindings, [Some(Value::Sym("red".into()))]);
        assert_eq!(inst.literals[1].polarity, Polarity::Negative);
        assert!(inst.domain("B").unwrap().is_counted());
    }

    #[test]
    fn round_trip_is_canonical() {
        let doc = parse(BIN_PACKING).unwrap();
        let once = serialize(&doc.problem, &doc.instance);
        let again = parse(&once).unwrap();
        assert_eq!(again.problem, doc.problem);
        assert_eq!(again.instance, doc.instance);
        assert_eq!(serialize(&again.problem, &again.instance), once);
    }

    #[test]
    fn minimal_spec_round_trips() {
        let doc = parse(
            "component I class input component G class generated \
             connect I - G forward [1,1] backward [1,2] where (right.x = 1 or 2 * left.x >= -3) and sum(left.x) < 9",
        );
        // `x` is not declared on either side.
        assert!(doc.is_err());
        let doc = parse(
            "type X = {-1, 0, 1}\ncomponent I class input attributes (x: X)\n\
             component G class generated attributes (x: X)\ncatalogue G {(0); (1)}\n\
             connect I - G forward [1,1] backward [1,2] where (right.x = 1 or 2 * left.x >= -3) and sum(left.x) < 9\n\
             instance { input I = 3 }",
        )
        .unwrap();
        let text = serialize(&doc.problem, &doc.instance);
        let again = parse(&text).unwrap();
        assert_eq!(again.problem, doc.problem);
        assert_eq!(again.instance, doc.instance);
    }

    #[test]
    fn spans_lie_inside_the_text() {
        let text = "component A class input\nconnect A - B forward [1,1] backward [1,1]\n";
        for d in parse(text).unwrap_err() {
            let span = d.span.unwrap();
            let line = text.lines().nth(span.line as usize - 1).unwrap();
            assert!((span.column + span.length - 1) as usize <= line.len());
        }
    }
}
