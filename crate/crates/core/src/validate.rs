//! Admissibility of a problem: the zero-lower-bound rule, the level mapping
//! that witnesses finite models, and consistency of the instance knowledge.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::diag::{Code, Diagnostic, Entity};
use crate::model::{
    ComponentClass, EffectiveClass, InstanceSpec, Orientation, Polarity, ProblemSpec,
};

pub type Classes = BTreeMap<String, EffectiveClass>;

/// Resolves `both` kinds. Without instance knowledge every `both` kind is
/// treated as generated (the worst case).
pub fn effective_classes(
    spec: &ProblemSpec,
    inst: Option<&InstanceSpec>,
) -> Result<Classes, Vec<Diagnostic>> {
    let mut classes = Classes::new();
    let mut missing = Vec::new();
    for kind in &spec.kinds {
        let class = match (kind.class, inst) {
            (ComponentClass::Input, _) => EffectiveClass::Input,
            (ComponentClass::Generated, _) | (ComponentClass::Both, None) => EffectiveClass::Generated,
            (ComponentClass::Both, Some(inst)) => match inst.both_assignment(&kind.name) {
                Some(c) => c,
                None => {
                    missing.push(Diagnostic::error(
                        Code::MissingBothAssignment,
                        Some(Entity::Kind(kind.name.clone())),
                        format!("`{}` is declared `both` but the instance assigns it no class", kind.name),
                    ));
                    continue;
                }
            },
        };
        classes.insert(kind.name.clone(), class);
    }
    if missing.is_empty() {
        Ok(classes)
    } else {
        Err(missing)
    }
}

/// Every kind with a zero-lower-bound direction counted from it must be
/// input (worst case) or have another direction or one-to-many from it with
/// a positive lower bound.
pub fn check_zero_lower_bound_rule(spec: &ProblemSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for kind in &spec.kinds {
        if kind.class == ComponentClass::Input {
            continue;
        }
        let Ok(incidences) = spec.incident_connections(&kind.name) else { continue };
        let lowers: Vec<(&str, u64)> = incidences
            .iter()
            .filter_map(|inc| {
                let rule = match inc.orientation {
                    Orientation::SelfLoop => inc.connection.forward.as_ref().or(inc.connection.backward.as_ref()),
                    _ => inc.per_self(),
                };
                rule.map(|r| (inc.connection.name.as_str(), r.card.lower))
            })
            .collect();
        let zero: Vec<&str> = lowers.iter().filter(|(_, l)| *l == 0).map(|(n, _)| *n).collect();
        if zero.is_empty() {
            continue;
        }
        let grounded = lowers.iter().any(|(_, l)| *l > 0)
            || spec.one_to_many.iter().any(|o| o.left == kind.name && o.card.lower > 0);
        if !grounded {
            out.push(Diagnostic::error(
                Code::ZeroLbRule,
                Some(Entity::Kind(kind.name.clone())),
                format!(
                    "`{}` is not input and has lower bound 0 in {} with no other connection from it with a positive lower bound",
                    kind.name,
                    zero.join(", ")
                ),
            ));
        }
    }
    out
}

/// Level of every kind: 0 for input kinds, `n + 1` for a generated kind
/// first grounded in kinds of level at most `n`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LevelMapping {
    pub levels: BTreeMap<String, u32>,
}

impl LevelMapping {
    pub fn level(&self, kind: &str) -> Option<u32> {
        self.levels.get(kind).copied()
    }
}

/// Generated kinds that no level can be assigned to.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no level mapping: {} never grounded in input kinds", kinds.join(", "))]
pub struct Unleveled {
    pub kinds: Vec<String>,
}

impl Unleveled {
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        self.kinds
            .iter()
            .map(|k| {
                Diagnostic::error(
                    Code::Unleveled,
                    Some(Entity::Kind(k.clone())),
                    format!("generated kind `{k}` is not grounded in input kinds; its count is unbounded"),
                )
            })
            .collect()
    }
}

/// Level mapping under worst-case classes.
pub fn compute_level_mapping(spec: &ProblemSpec) -> Result<LevelMapping, Unleveled> {
    let classes = effective_classes(spec, None).unwrap_or_default();
    compute_level_mapping_with(spec, &classes)
}

/// True when `kind` is justified by kinds satisfying `below`.
fn grounded_by(spec: &ProblemSpec, kind: &str, below: impl Fn(&str) -> bool) -> bool {
    let binary = spec.binary_connections.iter().any(|c| {
        if c.is_self_loop() {
            return false;
        }
        let (rule, partner) = if c.left == kind {
            (c.forward.as_ref(), c.right.as_str())
        } else if c.right == kind {
            (c.backward.as_ref(), c.left.as_str())
        } else {
            return false;
        };
        rule.is_some_and(|r| r.card.lower > 0) && below(partner)
    });
    binary
        || spec
            .one_to_many
            .iter()
            .any(|o| o.left == kind && o.card.lower > 0 && o.rights.iter().all(|r| below(r)))
}

pub fn compute_level_mapping_with(spec: &ProblemSpec, classes: &Classes) -> Result<LevelMapping, Unleveled> {
    let mut levels: BTreeMap<String, u32> = classes
        .iter()
        .filter(|(_, c)| **c == EffectiveClass::Input)
        .map(|(k, _)| (k.clone(), 0))
        .collect();
    let mut level = 0;
    loop {
        level += 1;
        let fresh: Vec<String> = spec
            .kinds
            .iter()
            .filter(|k| !levels.contains_key(&k.name))
            .filter(|k| grounded_by(spec, &k.name, |p| levels.get(p).is_some_and(|l| *l < level)))
            .map(|k| k.name.clone())
            .collect();
        if fresh.is_empty() {
            break;
        }
        for k in fresh {
            levels.insert(k, level);
        }
    }
    let unleveled: Vec<String> =
        spec.kinds.iter().filter(|k| !levels.contains_key(&k.name)).map(|k| k.name.clone()).collect();
    if unleveled.is_empty() {
        Ok(LevelMapping { levels })
    } else {
        Err(Unleveled { kinds: unleveled })
    }
}

/// Checks that `mapping` is a level mapping: inputs at 0, every generated kind
/// at a level `n >= 1` justified by kinds of level below `n`.
pub fn is_level_mapping(spec: &ProblemSpec, classes: &Classes, mapping: &LevelMapping) -> bool {
    spec.kinds.iter().all(|k| {
        let Some(n) = mapping.level(&k.name) else { return false };
        match classes.get(&k.name) {
            Some(EffectiveClass::Input) => n == 0,
            Some(EffectiveClass::Generated) => {
                n >= 1 && grounded_by(spec, &k.name, |p| mapping.level(p).is_some_and(|l| l < n))
            }
            None => false,
        }
    })
}

/// Every admissibility check in order: the zero-lower-bound rule and the
/// level mapping under worst-case classes, then the instance knowledge.
pub fn admissibility(spec: &ProblemSpec, inst: Option<&InstanceSpec>) -> Vec<Diagnostic> {
    let mut out = check_zero_lower_bound_rule(spec);
    if let Err(unleveled) = compute_level_mapping(spec) {
        out.extend(unleveled.diagnostics());
    }
    if let Some(inst) = inst {
        out.extend(validate_instance(spec, inst));
    }
    out
}

/// Consistency of the instance knowledge with the problem.
pub fn validate_instance(spec: &ProblemSpec, inst: &InstanceSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut err = |code, entity, message: String| out.push(Diagnostic::error(code, Some(entity), message));

    let mut assigned = BTreeSet::new();
    for (kind, _) in &inst.both_assignments {
        let entity = Entity::BothAssignment(kind.clone());
        match spec.kind(kind) {
            None => err(Code::UnknownRef, entity, format!("unknown component kind `{kind}`")),
            Some(k) if k.class != ComponentClass::Both => {
                err(Code::UnknownRef, entity, format!("`{kind}` is not declared `both`"))
            }
            Some(_) if !assigned.insert(kind.as_str()) => {
                err(Code::DuplicateName, entity, format!("class of `{kind}` assigned twice"))
            }
            Some(_) => {}
        }
    }
    let classes = match effective_classes(spec, Some(inst)) {
        Ok(c) => c,
        Err(diags) => {
            for d in diags {
                err(d.code, d.entity.unwrap_or(Entity::Kind(String::new())), d.message);
            }
            effective_classes(spec, None).unwrap_or_default()
        }
    };
    let is_input = |k: &str| classes.get(k) == Some(&EffectiveClass::Input);

    let mut seen_domain = BTreeSet::new();
    for d in &inst.input_domains {
        let entity = Entity::Domain(d.kind.clone());
        if spec.kind(&d.kind).is_none() {
            err(Code::UnknownRef, entity, format!("unknown component kind `{}`", d.kind));
            continue;
        }
        if !is_input(&d.kind) {
            err(Code::UnknownRef, entity, format!("`{}` is generated and takes no input domain", d.kind));
            continue;
        }
        if !seen_domain.insert(d.kind.as_str()) {
            err(Code::DuplicateName, entity, format!("second input domain for `{}`", d.kind));
            continue;
        }
        let mut ids = BTreeSet::new();
        for id in &d.ids {
            if !ids.insert(id.as_str()) {
                err(Code::DuplicateId, entity.clone(), format!("id `{id}` listed twice in the domain of `{}`", d.kind));
            }
        }
    }
    for kind in &spec.kinds {
        if is_input(&kind.name) && inst.domain(&kind.name).is_none() {
            err(
                Code::MissingDomain,
                Entity::Kind(kind.name.clone()),
                format!("input kind `{}` has no input domain", kind.name),
            );
        }
    }
    let total: usize = inst.input_domains.iter().filter(|d| is_input(&d.kind)).map(|d| d.ids.len()).sum();
    if total == 0 {
        let entity = spec
            .kinds
            .iter()
            .find(|k| is_input(&k.name))
            .map_or(Entity::Kind(String::new()), |k| Entity::Kind(k.name.clone()));
        err(Code::NoInput, entity, "the instance has no input components".to_string());
    }
    let in_domain = |kind: &str, id: &str| inst.domain(kind).is_some_and(|d| d.ids.iter().any(|x| x == id));

    // (kind, id) -> (first atom, its bindings)
    type Seen<'a> = BTreeMap<(&'a str, &'a str), (usize, Vec<Option<crate::model::Value>>)>;
    let mut atoms: Seen<'_> = BTreeMap::new();
    for (i, atom) in inst.required.iter().enumerate() {
        let entity = Entity::Required(i);
        let Some(kind) = spec.kind(&atom.kind) else {
            err(Code::UnknownRef, entity, format!("unknown component kind `{}`", atom.kind));
            continue;
        };
        if is_input(&atom.kind) && !in_domain(&atom.kind, &atom.id) {
            err(Code::UnknownRef, entity.clone(), format!("`{}` is not in the input domain of `{}`", atom.id, atom.kind));
        }
        if atom.bindings.len() > kind.attributes.len() {
            err(
                Code::BadBinding,
                entity,
                format!("`{}` has {} attributes but {} values are given", atom.kind, kind.attributes.len(), atom.bindings.len()),
            );
            continue;
        }
        let types = spec.attribute_types_of(kind);
        let mut typed = true;
        for (pos, b) in atom.bindings.iter().enumerate() {
            if let (Some(v), Some(Some(ty))) = (b, types.get(pos)) {
                if !ty.contains(v) {
                    typed = false;
                    err(
                        Code::BadBinding,
                        entity.clone(),
                        format!("`{v}` is not a value of `{}` for attribute `{}`", ty.name, kind.attributes[pos].name),
                    );
                }
            }
        }
        if typed {
            let matches = spec.catalogue_rows(kind).iter().any(|row| {
                atom.bindings.iter().zip(&row.0).all(|(b, v)| b.as_ref().is_none_or(|b| b == v))
            });
            if !matches {
                err(Code::BadBinding, entity.clone(), format!("no catalogue row of `{}` matches the required values", atom.kind));
            }
        }
        let mut bindings = atom.bindings.clone();
        bindings.resize(kind.attributes.len(), None);
        match atoms.get_mut(&(atom.kind.as_str(), atom.id.as_str())) {
            None => {
                atoms.insert((&atom.kind, &atom.id), (i, bindings));
            }
            Some((first, merged)) => {
                for (m, b) in merged.iter_mut().zip(bindings) {
                    match (m.as_ref(), b) {
                        (Some(x), Some(y)) if *x != y => {
                            err(
                                Code::LiteralConflict,
                                entity.clone(),
                                format!("`{}({})` is required with different values than in requirement {}", atom.kind, atom.id, *first + 1),
                            );
                            break;
                        }
                        (None, Some(y)) => *m = Some(y),
                        _ => {}
                    }
                }
            }
        }
    }

    let mut polarities: BTreeMap<(&str, &str, &str), Polarity> = BTreeMap::new();
    for (i, lit) in inst.literals.iter().enumerate() {
        let entity = Entity::Literal(i);
        let Some(conn) = spec.connection(&lit.connection) else {
            err(Code::UnknownRef, entity, format!("unknown connection `{}`", lit.connection));
            continue;
        };
        for (kind, id) in [(&conn.left, &lit.left_id), (&conn.right, &lit.right_id)] {
            if is_input(kind) && !in_domain(kind, id) {
                err(Code::UnknownRef, entity.clone(), format!("`{id}` is not in the input domain of `{kind}`"));
            }
        }
        if conn.is_self_loop() && lit.left_id == lit.right_id && lit.polarity == Polarity::Positive {
            err(
                Code::LiteralConflict,
                entity.clone(),
                format!("a component cannot be connected to itself in `{}`", conn.name),
            );
        }
        let key = (lit.connection.as_str(), lit.left_id.as_str(), lit.right_id.as_str());
        match polarities.get(&key) {
            Some(p) if *p != lit.polarity => err(
                Code::LiteralConflict,
                entity,
                format!("`{}({}, {})` is both asserted and denied", lit.connection, lit.left_id, lit.right_id),
            ),
            Some(_) => {}
            None => {
                polarities.insert(key, lit.polarity);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;
    use crate::testkit::BIN_PACKING;

    fn codes(diags: &[Diagnostic]) -> Vec<Code> {
        diags.iter().map(|d| d.code).collect()
    }

    #[test]
    fn classes_of_bin_packing() {
        let doc = parse(BIN_PACKING).unwrap();
        for inst in [None, Some(&doc.instance)] {
            let c = effective_classes(&doc.problem, inst).unwrap();
            assert_eq!(c["ThingA"], EffectiveClass::Input);
            assert_eq!(c["ThingB"], EffectiveClass::Input);
            assert_eq!(c["Bin"], EffectiveClass::Generated);
        }
    }

    #[test]
    fn both_kinds() {
        let doc = parse(
            "component I class input\ncomponent K class both\n\
             connect I - K forward [1,1] backward [1,1]\ninstance { input I = 1 input K = 2 }",
        )
        .unwrap();
        assert_eq!(effective_classes(&doc.problem, None).unwrap()["K"], EffectiveClass::Generated);
        assert_eq!(effective_classes(&doc.problem, Some(&doc.instance)).unwrap()["K"], EffectiveClass::Input);
        let bare = InstanceSpec::default();
        let err = effective_classes(&doc.problem, Some(&bare)).unwrap_err();
        assert_eq!(codes(&err), [Code::MissingBothAssignment]);
    }

    #[test]
    fn zero_lower_bound_rule() {
        let doc = parse(BIN_PACKING).unwrap();
        assert!(check_zero_lower_bound_rule(&doc.problem).is_empty());

        let doc = parse(
            "component I class input\ncomponent C1 class generated\ncomponent C2 class generated\n\
             connect C1 - C2 forward [0,1] backward [1,1]\nconnect I - C2 forward [1,1] backward [1,1]",
        )
        .unwrap();
        let d = check_zero_lower_bound_rule(&doc.problem);
        assert_eq!(codes(&d), [Code::ZeroLbRule]);
        assert_eq!(d[0].entity, Some(Entity::Kind("C1".into())));

        let doc = parse(
            "component I class input\ncomponent G class generated\n\
             connect I - G forward [1,2] backward [1,3]",
        )
        .unwrap();
        assert!(check_zero_lower_bound_rule(&doc.problem).is_empty());
    }

    #[test]
    fn levels_of_bin_packing() {
        let doc = parse(BIN_PACKING).unwrap();
        let m = compute_level_mapping(&doc.problem).unwrap();
        assert_eq!(m.level("ThingA"), Some(0));
        assert_eq!(m.level("ThingB"), Some(0));
        assert_eq!(m.level("Bin"), Some(1));
    }

    #[test]
    fn mutually_referencing_kinds_are_unleveled() {
        let doc = parse(
            "component C1 class input\ncomponent C2 class generated\ncomponent C3 class generated\n\
             connect C1 - C2 forward [0,1] backward [0,1]\nconnect C2 - C3 forward [0,2] backward [0,2]",
        )
        .unwrap();
        let err = compute_level_mapping(&doc.problem).unwrap_err();
        assert_eq!(err.kinds, ["C2", "C3"]);
        assert_eq!(codes(&err.diagnostics()), [Code::Unleveled, Code::Unleveled]);
    }

    #[test]
    fn input_only_and_chains() {
        let doc = parse("component A class input\ncomponent B class input").unwrap();
        let m = compute_level_mapping(&doc.problem).unwrap();
        assert!(m.levels.values().all(|l| *l == 0));

        let doc = parse(
            "component I class input\ncomponent G1 class generated\ncomponent G2 class generated\n\
             connect G2 - G1 forward [1,1] backward [0,4]\nconnect I - G1 forward [0,3] backward [2,2]",
        )
        .unwrap();
        let m = compute_level_mapping(&doc.problem).unwrap();
        assert_eq!((m.level("G1"), m.level("G2")), (Some(1), Some(2)));
        let classes = effective_classes(&doc.problem, None).unwrap();
        assert!(is_level_mapping(&doc.problem, &classes, &m));
        let mut lowered = m.clone();
        lowered.levels.insert("G2".into(), 1);
        assert!(!is_level_mapping(&doc.problem, &classes, &lowered));
    }

    #[test]
    fn self_loop_does_not_ground() {
        let doc = parse(
            "component I class input\ncomponent G class generated\n\
             connect I - G forward [0,1] backward [0,1]\nconnect G - G forward [1,1]",
        )
        .unwrap();
        assert_eq!(compute_level_mapping(&doc.problem).unwrap_err().kinds, ["G"]);
    }

    #[test]
    fn instance_checks() {
        let doc = parse(BIN_PACKING).unwrap();
        assert!(validate_instance(&doc.problem, &doc.instance).is_empty());

        let doc = parse(&BIN_PACKING.replace("input ThingA = 20  input ThingB = 20", "input ThingA = 0 input ThingB = 0")).unwrap();
        assert_eq!(codes(&validate_instance(&doc.problem, &doc.instance)), [Code::NoInput]);

        let doc = parse(&BIN_PACKING.replace(
            "input ThingB = 20",
            "input ThingB = 2 assert ThingA2Bin(ThingA_1, b1) deny ThingA2Bin(ThingA_1, b1)",
        ))
        .unwrap();
        assert_eq!(codes(&validate_instance(&doc.problem, &doc.instance)), [Code::LiteralConflict]);

        let doc = parse(&BIN_PACKING.replace(
            "input ThingB = 20",
            "input ThingB = 2 require ThingA(ThingA_1, 3) require ThingA(ThingA_1, 4) \
             require ThingA(zz, _) require ThingB(ThingB_1, 9) assert Nope(a, b)",
        ))
        .unwrap();
        assert_eq!(
            codes(&validate_instance(&doc.problem, &doc.instance)),
            [Code::LiteralConflict, Code::UnknownRef, Code::BadBinding, Code::UnknownRef]
        );

        let doc = parse(&BIN_PACKING.replace("input ThingB = 20", "")).unwrap();
        assert_eq!(codes(&validate_instance(&doc.problem, &doc.instance)), [Code::MissingDomain]);
    }
}
