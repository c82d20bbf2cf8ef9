use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{AxiomKind, Verdict, Violation};
use crate::expr::{eval_constraint, Binding, Side};
use crate::model::{
    ComponentClass, ComponentInstance, Configuration, EffectiveClass, InstanceSpec, Polarity, ProblemSpec,
};

struct Report(Vec<Violation>);

impl Report {
    fn push(&mut self, axiom: AxiomKind, entity: impl Into<String>, message: String) {
        self.0.push(Violation { axiom, entity: entity.into(), message });
    }
}

/// Re-checks every axiom of the problem and the instance knowledge against
/// `config`, sharing no code with the search.
pub fn check_model(spec: &ProblemSpec, inst: &InstanceSpec, config: &Configuration) -> Verdict {
    let mut out = Report(Vec::new());
    let empty = Vec::new();
    let no_edges = Vec::new();
    let instances = |kind: &str| config.instances.get(kind).unwrap_or(&empty);

    for kind in config.instances.keys() {
        if spec.kind(kind).is_none() {
            out.push(AxiomKind::Structure, kind.as_str(), format!("unknown component kind `{kind}`"));
        }
    }
    for conn in config.edges.keys() {
        if spec.connection(conn).is_none() {
            out.push(AxiomKind::Structure, conn.as_str(), format!("unknown connection `{conn}`"));
        }
    }

    // Key and catalogue axioms.
    let mut lookup: BTreeMap<(&str, &str), &ComponentInstance> = BTreeMap::new();
    for kind in &spec.kinds {
        for c in instances(&kind.name) {
            if lookup.insert((&kind.name, &c.id), c).is_some() {
                out.push(AxiomKind::Key, format!("{}({})", kind.name, c.id), "id used by two components".to_string());
            }
            if !spec.catalogue_contains(kind, &c.row) {
                out.push(
                    AxiomKind::Catalogue,
                    format!("{}({})", kind.name, c.id),
                    "attribute values are not a catalogue row".to_string(),
                );
            }
        }
    }

    // Domain closure of input kinds.
    for kind in &spec.kinds {
        let input = match kind.class {
            ComponentClass::Input => true,
            ComponentClass::Generated => false,
            ComponentClass::Both => inst.both_assignment(&kind.name) == Some(EffectiveClass::Input),
        };
        if !input {
            continue;
        }
        let have: BTreeSet<&str> = instances(&kind.name).iter().map(|c| c.id.as_str()).collect();
        let want: BTreeSet<&str> = inst.domain(&kind.name).map(|d| d.ids.iter().map(String::as_str).collect()).unwrap_or_default();
        if have != want {
            out.push(AxiomKind::Domain, kind.name.as_str(), "components differ from the input domain".to_string());
        }
    }

    // Edges, degrees and constraint formulas per connection.
    let mut partners: BTreeMap<(&str, &str), BTreeMap<&str, usize>> = BTreeMap::new();
    for conn in &spec.binary_connections {
        let edges = config.edges.get(&conn.name).unwrap_or(&no_edges);
        let mut seen = BTreeSet::new();
        let mut out_adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        let mut in_adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (l, r) in edges {
            let entity = format!("{}({l}, {r})", conn.name);
            if !seen.insert((l.as_str(), r.as_str())) {
                out.push(AxiomKind::Structure, entity.as_str(), "edge listed twice".to_string());
                continue;
            }
            if !lookup.contains_key(&(conn.left.as_str(), l.as_str())) || !lookup.contains_key(&(conn.right.as_str(), r.as_str())) {
                out.push(AxiomKind::Structure, entity, "edge endpoint is not a component".to_string());
                continue;
            }
            if conn.is_self_loop() && l == r {
                out.push(AxiomKind::Structure, entity, "component connected to itself".to_string());
                continue;
            }
            out_adj.entry(l).or_default().push(r);
            in_adj.entry(r).or_default().push(l);
            *partners.entry((conn.left.as_str(), l.as_str())).or_default().entry(conn.right.as_str()).or_default() += 1;
            if !conn.is_self_loop() {
                *partners.entry((conn.right.as_str(), r.as_str())).or_default().entry(conn.left.as_str()).or_default() += 1;
            }
        }
        let sides = [
            (&conn.forward, &conn.left, &conn.right, Side::Left, &out_adj),
            (&conn.backward, &conn.right, &conn.left, Side::Right, &in_adj),
        ];
        for (rule, own, other, own_side, adj) in sides {
            let Some(rule) = rule else { continue };
            let (Some(own_def), Some(other_def)) = (spec.kind(own), spec.kind(other)) else { continue };
            for c in instances(own) {
                let ids = adj.get(c.id.as_str()).map_or(&[][..], Vec::as_slice);
                let entity = format!("{}({})", conn.name, c.id);
                if !rule.card.admits(ids.len() as u64) {
                    out.push(
                        AxiomKind::Cardinality,
                        entity.as_str(),
                        format!("{} partners, expected {}", ids.len(), rule.card),
                    );
                }
                let Some(expr) = &rule.constraint else { continue };
                let this = Binding::new(own_def, &c.row);
                let bindings: Vec<Binding<'_>> = ids
                    .iter()
                    .filter_map(|id| lookup.get(&(other.as_str(), *id)))
                    .map(|p| Binding::new(other_def, &p.row))
                    .collect();
                match eval_constraint(expr, own_side, &this, &bindings) {
                    Ok(true) => {}
                    Ok(false) => out.push(AxiomKind::ConstraintFormula, entity, format!("`{expr}` does not hold")),
                    Err(e) => out.push(AxiomKind::ConstraintFormula, entity, format!("`{expr}` cannot be evaluated: {e}")),
                }
            }
        }
    }

    for otm in &spec.one_to_many {
        for c in instances(&otm.left) {
            let counts = partners.get(&(otm.left.as_str(), c.id.as_str()));
            let per_kind: Vec<usize> =
                otm.rights.iter().map(|r| counts.and_then(|m| m.get(r.as_str())).copied().unwrap_or(0)).collect();
            let total: usize = per_kind.iter().sum();
            let entity = format!("{}({})", otm.name(), c.id);
            if !otm.card.admits(total as u64) {
                out.push(AxiomKind::OneToMany, entity.as_str(), format!("{total} partners, expected {}", otm.card));
            }
            if otm.exclusive && per_kind.iter().filter(|n| **n > 0).count() > 1 {
                out.push(AxiomKind::OneToMany, entity, "partners from more than one kind".to_string());
            }
        }
    }

    for atom in &inst.required {
        let entity = format!("{}({})", atom.kind, atom.id);
        match lookup.get(&(atom.kind.as_str(), atom.id.as_str())) {
            None => out.push(AxiomKind::Literal, entity, "required component is missing".to_string()),
            Some(c) => {
                let ok = atom.bindings.iter().zip(&c.row.0).all(|(b, v)| b.as_ref().is_none_or(|b| b == v));
                if !ok {
                    out.push(AxiomKind::Literal, entity, "required attribute values differ".to_string());
                }
            }
        }
    }
    for lit in &inst.literals {
        let present = config
            .edges
            .get(&lit.connection)
            .is_some_and(|es| es.iter().any(|(l, r)| *l == lit.left_id && *r == lit.right_id));
        let wanted = lit.polarity == Polarity::Positive;
        if present != wanted {
            out.push(
                AxiomKind::Literal,
                format!("{}({}, {})", lit.connection, lit.left_id, lit.right_id),
                if wanted { "asserted edge is missing" } else { "denied edge is present" }.to_string(),
            );
        }
    }
    Verdict { violations: out.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CatalogueRow, Value};
    use crate::syntax::parse;
    use alloc::vec;

    const SMALL: &str = "type Size = {1,2,3,4,5}\n\
        component ThingA class input attributes (size: Size)\n\
        component ThingB class input attributes (size: Size)\n\
        component Bin class generated\n\
        connect ThingA - Bin forward [1,1] backward [0,5] where sum(left.size) <= 5\n\
        connect ThingB - Bin forward [1,1] backward [0,2] where sum(left.size) <= 2\n\
        connect-one-to-many Bin -> {ThingA, ThingB} [1,*] inclusive\n\
        instance { input ThingA = 20  input ThingB = 20 }";

    fn ten_bins() -> Configuration {
        let one = CatalogueRow(vec![Value::Int(1)]);
        let mut config = Configuration::default();
        for kind in ["ThingA", "ThingB"] {
            let things = (1..=20).map(|i| ComponentInstance { id: format!("{kind}_{i}"), row: one.clone() }).collect();
            config.instances.insert(kind.into(), things);
            let edges = (1..=20).map(|i| (format!("{kind}_{i}"), format!("b{}", (i - 1) / 2 + 1))).collect();
            config.edges.insert(format!("{kind}2Bin"), edges);
        }
        let bins = (1..=10).map(|i| ComponentInstance { id: format!("b{i}"), row: CatalogueRow::empty() }).collect();
        config.instances.insert("Bin".into(), bins);
        config
    }

    #[test]
    fn ten_bin_configuration_is_a_model() {
        let doc = parse(SMALL).unwrap();
        let v = check_model(&doc.problem, &doc.instance, &ten_bins());
        assert!(v.accepted(), "{:?}", v.violations);
    }

    #[test]
    fn thing_in_two_bins() {
        let doc = parse(SMALL).unwrap();
        let mut config = ten_bins();
        config.edges.get_mut("ThingA2Bin").unwrap().push(("ThingA_1".into(), "b9".into()));
        let v = check_model(&doc.problem, &doc.instance, &config);
        assert!(v.has(AxiomKind::Cardinality));
        assert!(!v.has(AxiomKind::Key));
    }

    #[test]
    fn shared_id_breaks_the_key() {
        let doc = parse(SMALL).unwrap();
        let mut config = ten_bins();
        config.instances.get_mut("Bin").unwrap().push(ComponentInstance { id: "b1".into(), row: CatalogueRow::empty() });
        assert!(check_model(&doc.problem, &doc.instance, &config).has(AxiomKind::Key));
    }

    #[test]
    fn overfull_bin_breaks_the_formula() {
        let doc = parse(SMALL).unwrap();
        let mut config = ten_bins();
        config.instances.get_mut("ThingB").unwrap()[0].row = CatalogueRow(vec![Value::Int(2)]);
        let v = check_model(&doc.problem, &doc.instance, &config);
        assert_eq!(v.violations.len(), 1);
        assert_eq!(v.violations[0].axiom, AxiomKind::ConstraintFormula);
    }

    #[test]
    fn catalogue_domain_and_otm() {
        let doc = parse(SMALL).unwrap();
        let mut config = ten_bins();
        config.instances.get_mut("ThingA").unwrap()[0].row = CatalogueRow(vec![Value::Int(9)]);
        config.instances.get_mut("ThingB").unwrap().pop();
        config.edges.get_mut("ThingB2Bin").unwrap().pop();
        config.instances.get_mut("Bin").unwrap().push(ComponentInstance { id: "b11".into(), row: CatalogueRow::empty() });
        let v = check_model(&doc.problem, &doc.instance, &config);
        for axiom in [AxiomKind::Catalogue, AxiomKind::Domain, AxiomKind::OneToMany] {
            assert!(v.has(axiom), "{axiom:?} missing from {:?}", v.violations);
        }
    }
}
