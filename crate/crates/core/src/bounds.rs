//! Count bounds for generated kinds.
//!
//! A binary connection between a source kind `S` and a target kind `T`, with
//! `[l1, u1]` partners in `T` per `S` and `[l2, u2]` partners in `S` per `T`,
//! gives
//!
//! ```text
//! ceil(l1 * lb(S) / u2)  <=  |T|  <=  floor(u1 * ub(S) / l2)
//! ```
//!
//! and a one-to-many connection from `C` to `{C1..Ck}` with `[l, u]` partners
//! per `C`, where each `Ci` has `[li, ui]` partners in `C`, gives
//!
//! ```text
//! ceil(sum(li * lb(Ci)) / u)  <=  |C|  <=  floor(sum(ui * ub(Ci)) / l)
//! ```
//!
//! `propagate` applies these steps along a worklist until nothing changes.
//! Products are computed exactly; a result above `u64::MAX` becomes
//! unbounded (upper) or saturates (lower).

use alloc::boxed::Box;
use alloc::collections::VecDeque;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diag::Diagnostic;
use crate::model::{Bound, Cardinality, EffectiveClass, InstanceSpec, Limit, OneToManyConnectionDef, ProblemSpec};
use crate::validate::{compute_level_mapping_with, effective_classes, Unleveled};

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

fn lower_of(n: BigUint) -> u64 {
    n.to_u64().unwrap_or(u64::MAX)
}

fn upper_of(n: BigUint) -> Limit {
    n.to_u64().map_or(Limit::Unbounded, Limit::Finite)
}

/// Bound on the target kind of a binary connection given the source bound.
pub fn binary_bound_step(per_source: Cardinality, per_target: Cardinality, source: Bound) -> Bound {
    let lb = match per_target.upper {
        Limit::Finite(u2) if u2 > 0 => lower_of((big(per_source.lower) * big(source.lb)).div_ceil(&big(u2))),
        _ => 0,
    };
    let ub = match (per_source.upper, source.ub) {
        (Limit::Finite(u1), Limit::Finite(ub)) if per_target.lower > 0 => {
            upper_of((big(u1) * big(ub)) / big(per_target.lower))
        }
        _ => Limit::Unbounded,
    };
    Bound { lb, ub }
}

/// Bound on the left kind of a one-to-many connection. `per_right[i]` counts
/// left components per component of `rights[i]`.
pub fn one_to_many_bound_step(otm: &OneToManyConnectionDef, per_right: &[Cardinality], right_bounds: &[Bound]) -> Bound {
    let lb = match otm.card.upper {
        Limit::Finite(u) if u > 0 => {
            let total: BigUint = per_right.iter().zip(right_bounds).map(|(c, b)| big(c.lower) * big(b.lb)).sum();
            lower_of(total.div_ceil(&big(u)))
        }
        _ => 0,
    };
    let mut total = BigUint::zero();
    let mut finite = otm.card.lower > 0;
    for (c, b) in per_right.iter().zip(right_bounds) {
        match (c.upper, b.ub) {
            (Limit::Finite(u), Limit::Finite(n)) => total += big(u) * big(n),
            _ => finite = false,
        }
    }
    let ub = if finite { upper_of(total / big(otm.card.lower)) } else { Limit::Unbounded };
    Bound { lb, ub }
}

/// Intersects `current` with `candidate`; reports whether anything tightened.
pub fn update_bounds(current: Bound, candidate: Bound) -> (Bound, bool) {
    let next = Bound { lb: current.lb.max(candidate.lb), ub: current.ub.min(candidate.ub) };
    (next, next != current)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KindBounds {
    pub kind: String,
    pub class: EffectiveClass,
    pub bound: Bound,
}

/// Bounds of every kind, in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoundsMap {
    pub entries: Vec<KindBounds>,
}

impl BoundsMap {
    pub fn get(&self, kind: &str) -> Option<Bound> {
        self.entries.iter().find(|e| e.kind == kind).map(|e| e.bound)
    }

    pub fn class(&self, kind: &str) -> Option<EffectiveClass> {
        self.entries.iter().find(|e| e.kind == kind).map(|e| e.class)
    }

    pub fn iter(&self) -> impl Iterator<Item = &KindBounds> {
        self.entries.iter()
    }

    pub fn generated(&self) -> impl Iterator<Item = &KindBounds> {
        self.entries.iter().filter(|e| e.class == EffectiveClass::Generated)
    }

    /// True when re-running every bound step changes nothing.
    pub fn is_fixpoint(&self, spec: &ProblemSpec) -> bool {
        let bounds: Vec<Bound> = self.entries.iter().map(|e| e.bound).collect();
        let generated: Vec<bool> = self.entries.iter().map(|e| e.class == EffectiveClass::Generated).collect();
        let steps = Steps { spec, generated: &generated };
        (0..bounds.len()).all(|k| {
            steps.from(k, &bounds).into_iter().all(|s| !update_bounds(bounds[s.target], s.candidate).1)
        })
    }
}

/// One bound step that tightened a kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvenanceStep {
    pub connection: String,
    pub target: String,
    pub contributed: Bound,
    pub result: Bound,
}

/// Inconsistent bounds on `kind`, with the steps that produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectCertificate {
    pub kind: String,
    pub lb: u64,
    pub ub: u64,
    pub provenance: Vec<ProvenanceStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Accept(BoundsMap),
    Reject(RejectCertificate),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Propagation {
    pub outcome: Outcome,
    pub pops: u64,
    pub updates: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContractError {
    #[error("instance knowledge is incomplete: {}", .0.first().map_or(String::new(), |d| d.message.clone()))]
    Classes(Vec<Diagnostic>),
    #[error("input kind `{0}` has no input domain")]
    MissingDomain(String),
    #[error(transparent)]
    Unleveled(#[from] Unleveled),
    #[error("propagation did not settle within {0} pops")]
    FuelExhausted(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorklistOrder {
    Stack,
    Fifo,
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PropagateOptions {
    pub order: WorklistOrder,
    pub fuel: u64,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions { order: WorklistOrder::Stack, fuel: 1_000_000 }
    }
}

struct Step {
    connection: String,
    target: usize,
    candidate: Bound,
}

struct Steps<'a> {
    spec: &'a ProblemSpec,
    generated: &'a [bool],
}

impl Steps<'_> {
    fn index(&self, kind: &str) -> Option<usize> {
        self.spec.kind_index(kind)
    }

    fn one_to_many(&self, otm: &OneToManyConnectionDef, bounds: &[Bound]) -> Option<Step> {
        let target = self.index(&otm.left)?;
        let mut per_right = Vec::with_capacity(otm.rights.len());
        let mut right_bounds = Vec::with_capacity(otm.rights.len());
        for r in &otm.rights {
            let conn = self.spec.connection_between(&otm.left, r)?;
            let rule = if conn.left == otm.left { conn.backward.as_ref() } else { conn.forward.as_ref() }?;
            per_right.push(rule.card);
            right_bounds.push(bounds[self.index(r)?]);
        }
        let candidate = one_to_many_bound_step(otm, &per_right, &right_bounds);
        Some(Step { connection: otm.name(), target, candidate })
    }

    /// Every step triggered by a change of kind `k`.
    fn from(&self, k: usize, bounds: &[Bound]) -> Vec<Step> {
        let kind = &self.spec.kinds[k].name;
        let mut out = Vec::new();
        for conn in &self.spec.binary_connections {
            if conn.is_self_loop() {
                continue;
            }
            let (per_source, per_target, partner) = if &conn.left == kind {
                (conn.forward.as_ref(), conn.backward.as_ref(), &conn.right)
            } else if &conn.right == kind {
                (conn.backward.as_ref(), conn.forward.as_ref(), &conn.left)
            } else {
                continue;
            };
            let (Some(ps), Some(pt), Some(target)) = (per_source, per_target, self.index(partner)) else { continue };
            if self.generated[target] {
                let candidate = binary_bound_step(ps.card, pt.card, bounds[k]);
                out.push(Step { connection: conn.name.clone(), target, candidate });
            }
        }
        for otm in &self.spec.one_to_many {
            let own = self.generated[k] && &otm.left == kind;
            let right = otm.rights.contains(kind) && self.index(&otm.left).is_some_and(|l| self.generated[l]);
            if own || right {
                out.extend(self.one_to_many(otm, bounds));
            }
        }
        out
    }
}

enum Worklist {
    Stack(Vec<usize>),
    Fifo(VecDeque<usize>),
    Random(Vec<usize>, Box<ChaCha8Rng>),
}

impl Worklist {
    fn new(order: WorklistOrder) -> Self {
        match order {
            WorklistOrder::Stack => Worklist::Stack(Vec::new()),
            WorklistOrder::Fifo => Worklist::Fifo(VecDeque::new()),
            WorklistOrder::Random(seed) => Worklist::Random(Vec::new(), Box::new(ChaCha8Rng::seed_from_u64(seed))),
        }
    }

    fn push(&mut self, k: usize) {
        match self {
            Worklist::Stack(v) | Worklist::Random(v, _) => v.push(k),
            Worklist::Fifo(q) => q.push_back(k),
        }
    }

    fn pop(&mut self) -> Option<usize> {
        match self {
            Worklist::Stack(v) => v.pop(),
            Worklist::Fifo(q) => q.pop_front(),
            Worklist::Random(v, rng) => {
                if v.is_empty() {
                    None
                } else {
                    let i = rng.random_range(0..v.len());
                    Some(v.swap_remove(i))
                }
            }
        }
    }
}

pub fn propagate(spec: &ProblemSpec, inst: &InstanceSpec) -> Result<Propagation, ContractError> {
    propagate_with(spec, inst, &PropagateOptions::default())
}

/// Worklist propagation. Input kinds are fixed at their domain size and
/// pushed in declaration order; generated kinds start at `[0, unbounded]`.
/// A kind is re-pushed when its bound tightens and is never on the worklist
/// twice. Requires a level mapping under the instance's classes.
pub fn propagate_with(
    spec: &ProblemSpec,
    inst: &InstanceSpec,
    opts: &PropagateOptions,
) -> Result<Propagation, ContractError> {
    let classes = effective_classes(spec, Some(inst)).map_err(ContractError::Classes)?;
    compute_level_mapping_with(spec, &classes)?;

    let generated: Vec<bool> = spec.kinds.iter().map(|k| classes[&k.name] == EffectiveClass::Generated).collect();
    let mut bounds = Vec::with_capacity(spec.kinds.len());
    for (k, kind) in spec.kinds.iter().enumerate() {
        if generated[k] {
            bounds.push(Bound::UNCONSTRAINED);
        } else {
            let domain = inst.domain(&kind.name).ok_or_else(|| ContractError::MissingDomain(kind.name.clone()))?;
            bounds.push(Bound::exactly(domain.ids.len() as u64));
        }
    }

    let steps = Steps { spec, generated: &generated };
    let mut worklist = Worklist::new(opts.order);
    let mut queued = alloc::vec![false; spec.kinds.len()];
    for k in (0..spec.kinds.len()).filter(|k| !generated[*k]) {
        worklist.push(k);
        queued[k] = true;
    }
    let mut history: Vec<Vec<ProvenanceStep>> = alloc::vec![Vec::new(); spec.kinds.len()];
    let (mut pops, mut updates) = (0u64, 0u64);
    while let Some(k) = worklist.pop() {
        queued[k] = false;
        pops += 1;
        if pops > opts.fuel {
            return Err(ContractError::FuelExhausted(opts.fuel));
        }
        for step in steps.from(k, &bounds) {
            let (next, changed) = update_bounds(bounds[step.target], step.candidate);
            if !changed {
                continue;
            }
            updates += 1;
            bounds[step.target] = next;
            history[step.target].push(ProvenanceStep {
                connection: step.connection,
                target: spec.kinds[step.target].name.clone(),
                contributed: step.candidate,
                result: next,
            });
            if let Limit::Finite(ub) = next.ub {
                if next.lb > ub {
                    let certificate = RejectCertificate {
                        kind: spec.kinds[step.target].name.clone(),
                        lb: next.lb,
                        ub,
                        provenance: core::mem::take(&mut history[step.target]),
                    };
                    return Ok(Propagation { outcome: Outcome::Reject(certificate), pops, updates });
                }
            }
            if !queued[step.target] {
                queued[step.target] = true;
                worklist.push(step.target);
            }
        }
    }
    let entries = spec
        .kinds
        .iter()
        .zip(bounds)
        .zip(&generated)
        .map(|((kind, bound), g)| KindBounds {
            kind: kind.name.to_string(),
            class: if *g { EffectiveClass::Generated } else { EffectiveClass::Input },
            bound,
        })
        .collect();
    Ok(Propagation { outcome: Outcome::Accept(BoundsMap { entries }), pops, updates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;
    use crate::testkit::BIN_PACKING;

    fn accept(text: &str) -> BoundsMap {
        let doc = parse(text).unwrap();
        match propagate(&doc.problem, &doc.instance).unwrap().outcome {
            Outcome::Accept(b) => b,
            Outcome::Reject(c) => panic!("unexpected reject {c:?}"),
        }
    }

    #[test]
    fn binary_steps_of_bin_packing() {
        let twenty = Bound::exactly(20);
        assert_eq!(binary_bound_step(Cardinality::new(1, 1), Cardinality::new(0, 5), twenty), Bound::at_least(4));
        assert_eq!(binary_bound_step(Cardinality::new(1, 1), Cardinality::new(0, 2), twenty), Bound::at_least(10));
        assert_eq!(binary_bound_step(Cardinality::new(1, 1), Cardinality::new(1, 1), Bound::exactly(5)), Bound::exactly(5));
        assert_eq!(binary_bound_step(Cardinality::new(2, 3), Cardinality::new(1, 4), Bound::exactly(10)), Bound::new(5, 30));
    }

    #[test]
    fn unbounded_inputs_to_binary_step() {
        let open = binary_bound_step(Cardinality::new(2, 3), Cardinality::new(1, 4), Bound::at_least(10));
        assert_eq!(open, Bound::at_least(5));
        let huge = binary_bound_step(Cardinality::new(u64::MAX, u64::MAX), Cardinality::new(1, 1), Bound::exactly(u64::MAX));
        assert_eq!(huge, Bound { lb: u64::MAX, ub: Limit::Unbounded });
    }

    fn otm(l: u64, u: Limit) -> OneToManyConnectionDef {
        OneToManyConnectionDef {
            left: "C".into(),
            rights: alloc::vec!["A".into(), "B".into()],
            card: Cardinality { lower: l, upper: u },
            exclusive: false,
        }
    }

    #[test]
    fn one_to_many_steps() {
        let ones = [Cardinality::new(1, 1), Cardinality::new(1, 1)];
        let b = one_to_many_bound_step(&otm(1, Limit::Unbounded), &ones, &[Bound::exactly(20), Bound::exactly(20)]);
        assert_eq!(b, Bound::new(0, 40));
        let b = one_to_many_bound_step(&otm(1, Limit::Finite(1)), &ones[..1], &[Bound::exactly(7)]);
        assert_eq!(b, Bound::exactly(7));
        let b = one_to_many_bound_step(
            &otm(2, Limit::Finite(3)),
            &[Cardinality::new(1, 1), Cardinality::new(1, 2)],
            &[Bound::exactly(4), Bound::exactly(6)],
        );
        assert_eq!(b, Bound::new(4, 8));
        let b = one_to_many_bound_step(&otm(1, Limit::Unbounded), &ones, &[Bound::exactly(2), Bound::at_least(1)]);
        assert_eq!(b.ub, Limit::Unbounded);
    }

    #[test]
    fn update_examples() {
        assert_eq!(update_bounds(Bound::at_least(4), Bound::at_least(10)), (Bound::at_least(10), true));
        assert_eq!(update_bounds(Bound::new(10, 40), Bound::at_least(4)), (Bound::new(10, 40), false));
        assert_eq!(update_bounds(Bound::new(5, 8), Bound::new(9, 7)), (Bound::new(9, 7), true));
    }

    #[test]
    fn bin_packing_bounds() {
        let b = accept(BIN_PACKING);
        assert_eq!(b.get("Bin"), Some(Bound::new(10, 40)));
        assert_eq!(b.get("ThingA"), Some(Bound::exactly(20)));
        let doc = parse(BIN_PACKING).unwrap();
        assert!(b.is_fixpoint(&doc.problem));
    }

    #[test]
    fn chain() {
        let b = accept(
            "component C1 class input\ncomponent C2 class generated\n\
             connect C1 - C2 forward [2,2] backward [1,1]\ninstance { input C1 = 4 }",
        );
        assert_eq!(b.get("C2"), Some(Bound::exactly(8)));
    }

    #[test]
    fn conflict_rejects() {
        let doc = parse(
            "component C1 class input\ncomponent C2 class generated\ncomponent C3 class input\n\
             connect C1 - C2 forward [1,1] backward [1,2]\nconnect C3 - C2 forward [2,2] backward [3,3]\n\
             instance { input C1 = 10 input C3 = 6 }",
        )
        .unwrap();
        for order in [WorklistOrder::Stack, WorklistOrder::Fifo, WorklistOrder::Random(7)] {
            let opts = PropagateOptions { order, ..PropagateOptions::default() };
            let Outcome::Reject(c) = propagate_with(&doc.problem, &doc.instance, &opts).unwrap().outcome else {
                panic!("expected reject");
            };
            assert_eq!((c.kind.as_str(), c.lb, c.ub), ("C2", 5, 4));
            assert!(!c.provenance.is_empty());
        }
    }

    #[test]
    fn unleveled_is_a_contract_error() {
        let doc = parse(
            "component C1 class input\ncomponent C2 class generated\n\
             connect C1 - C2 forward [1,1] backward [0,1]\ninstance { input C1 = 3 }",
        )
        .unwrap();
        let err = propagate(&doc.problem, &doc.instance).unwrap_err();
        assert!(matches!(err, ContractError::Unleveled(_)));
    }

    #[test]
    fn one_to_many_without_binary_changes_still_fires() {
        let b = accept(
            "component A class input\ncomponent B class input\ncomponent G class generated\n\
             connect A - G forward [0,1] backward [0,3]\nconnect B - G forward [0,2] backward [0,3]\n\
             connect-one-to-many G -> {A, B} [2,*] inclusive\ninstance { input A = 5 input B = 4 }",
        );
        assert_eq!(b.get("G"), Some(Bound::new(0, 6)));
    }
}
